#include "wdistill/cavity.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace wdistill {

namespace {

constexpr Complex kI{0.0, 1.0};

struct PairLayout {
    std::size_t atom_pos;
    std::size_t field_pos;
    Eigen::Index atom_stride;
    Eigen::Index field_stride;
    int n_levels; // field dimension = n_max + 1
};

PairLayout locate_pair(const PureState& state, const std::string& atom,
                       const std::string& field, const CavityParams& params) {
    PairLayout l{};
    l.atom_pos = state.position_of(atom);
    l.field_pos = state.position_of(field);
    if (state.dim_at(l.atom_pos) != 2)
        throw DimensionError("atom subsystem must be a qubit");
    l.n_levels = state.dim_at(l.field_pos);
    if (l.n_levels != params.n_max + 1)
        throw DimensionError("field dimension does not match the Fock truncation");
    l.atom_stride = state.stride(l.atom_pos);
    l.field_stride = state.stride(l.field_pos);
    return l;
}

void check_truncation(const PureState& state, const PairLayout& l) {
    // |e, n_max> would rotate into photon number n_max + 1.
    double mass = 0.0;
    for (Eigen::Index i = 0; i < state.total_dim(); ++i) {
        const bool excited = (i / l.atom_stride) % 2 == 1;
        const bool top = (i / l.field_stride) % l.n_levels == l.n_levels - 1;
        if (excited && top) mass += std::norm(state.amplitudes()(i));
    }
    if (mass > 1e-24)
        throw TruncationError("evolution would exceed the Fock truncation");
}

// Apply a local (2 x n_levels) map to every (atom, field) block.
template <typename BlockMap>
PureState map_pair_blocks(const PureState& state, const PairLayout& l, BlockMap&& f) {
    Eigen::VectorXcd out = state.amplitudes();
    const int nf = l.n_levels;
    Eigen::VectorXcd block(2 * nf);
    for (Eigen::Index i = 0; i < state.total_dim(); ++i) {
        if ((i / l.atom_stride) % 2 != 0 || (i / l.field_stride) % nf != 0) continue;
        for (int u = 0; u < 2; ++u)
            for (int n = 0; n < nf; ++n)
                block(u * nf + n) = out(i + u * l.atom_stride + n * l.field_stride);
        f(block);
        for (int u = 0; u < 2; ++u)
            for (int n = 0; n < nf; ++n)
                out(i + u * l.atom_stride + n * l.field_stride) = block(u * nf + n);
    }
    return PureState(state.labels(), state.dims(), std::move(out), state.is_normalized());
}

} // namespace

const char* to_string(Frame f) {
    return f == Frame::interaction ? "interaction" : "lab";
}

CavityParams::CavityParams(double omega_, double omega0_, double epsilon_, int n_max_,
                           Frame frame_)
    : omega(omega_), omega0(omega0_), epsilon(epsilon_), n_max(n_max_), frame(frame_) {
    if (!(epsilon > 0.0)) throw InputError("coupling constant must be positive");
    if (n_max < 1) throw InputError("Fock truncation must allow at least one photon");
    if (std::abs(omega - omega0) > 1e-12 * std::max(1.0, std::abs(omega)))
        throw InputError("scheme requires resonance: omega must equal omega0");
}

PureState jc_evolve(const PureState& state, const std::string& atom,
                    const std::string& field, const CavityParams& params, double t) {
    const PairLayout l = locate_pair(state, atom, field, params);
    check_truncation(state, l);

    const int nf = l.n_levels;
    const bool lab = params.frame == Frame::lab;
    return map_pair_blocks(state, l, [&](Eigen::VectorXcd& block) {
        Eigen::VectorXcd next = block;
        for (int n = 0; n + 1 < nf; ++n) {
            const double theta = params.epsilon * t * std::sqrt(n + 1.0);
            const Complex x = block(nf + n);     // |e, n>
            const Complex y = block(n + 1);      // |g, n+1>
            Complex xe = std::cos(theta) * x - kI * std::sin(theta) * y;
            Complex yg = -kI * std::sin(theta) * x + std::cos(theta) * y;
            if (lab) {
                // doublet free energy omega*(n + 1/2)
                const Complex ph = std::exp(-kI * params.omega * t * (n + 0.5));
                xe *= ph;
                yg *= ph;
            }
            next(nf + n) = xe;
            next(n + 1) = yg;
        }
        if (lab) next(0) *= std::exp(kI * params.omega * t * 0.5); // dark |g, 0>
        block = std::move(next);
    });
}

PureState jc_evolve_dense(const PureState& state, const std::string& atom,
                          const std::string& field, const CavityParams& params, double t) {
    const PairLayout l = locate_pair(state, atom, field, params);
    check_truncation(state, l);

    const int nf = l.n_levels;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2 * nf, 2 * nf);
    for (int n = 0; n + 1 < nf; ++n) {
        const double g = params.epsilon * std::sqrt(n + 1.0);
        h(nf + n, n + 1) = g; // a S+ : |g, n+1> -> |e, n>
        h(n + 1, nf + n) = g;
    }
    if (params.frame == Frame::lab) {
        for (int u = 0; u < 2; ++u)
            for (int n = 0; n < nf; ++n)
                h(u * nf + n, u * nf + n) = params.omega * n + params.omega0 * (u - 0.5);
    }
    const Eigen::MatrixXcd u = (-kI * t * h).exp();
    return map_pair_blocks(state, l, [&](Eigen::VectorXcd& block) { block = u * block; });
}

InteractionTimes optimal_times(const WCoefficients& coeffs, double epsilon) {
    if (!(epsilon > 0.0)) throw InputError("coupling constant must be positive");
    const double s = std::sqrt(1.0 - 2.0 * coeffs.c2());
    InteractionTimes times;
    times.dt1 = std::acos(std::clamp(coeffs.c() / coeffs.a(), -1.0, 1.0)) / epsilon;
    times.dt2 = (std::asin(std::clamp(coeffs.b() / s, -1.0, 1.0)) -
                 std::asin(std::clamp(coeffs.c() / s, -1.0, 1.0))) /
                epsilon;
    return times;
}

std::vector<ProtocolOutcome> run_cavity_protocol(const WCoefficients& coeffs,
                                                 const CavityParams& params) {
    const InteractionTimes times = optimal_times(coeffs, params.epsilon);

    PureState st = tensor(make_wprime(coeffs),
                          PureState::basis({"c"}, {params.n_max + 1}, {0}));
    st = jc_evolve(st, "3", "c", params, times.dt1);
    st = jc_evolve(st, "2", "c", params, times.dt2);
    const auto res = measure_subsystem(st, "c");

    std::vector<ProtocolOutcome> out;
    for (const auto& br : res.branches) {
        ProtocolOutcome o;
        o.branch_label = "photon=" + std::to_string(br.outcome);
        o.probability = br.probability;
        o.classification =
            br.outcome == 0 ? Classification::W_SUCCESS : Classification::FAILURE;
        if (br.post_state) o.post_state = drop_collapsed(*br.post_state, "c");
        out.push_back(std::move(o));
    }
    return out;
}

CavityAbstractReport compare_with_abstract(const WCoefficients& coeffs,
                                           const CavityParams& params) {
    const auto outcomes = run_cavity_protocol(coeffs, params);

    CavityAbstractReport rep;
    rep.frame = params.frame;
    rep.probability_diff = std::abs(outcomes[0].probability - 3.0 * coeffs.c2());

    const auto magnitude_diff = [](const PureState& got, const PureState& want) {
        return (got.amplitudes().cwiseAbs() - want.amplitudes().cwiseAbs())
            .cwiseAbs()
            .maxCoeff();
    };
    if (outcomes[0].post_state)
        rep.success_magnitude_diff = magnitude_diff(*outcomes[0].post_state, make_w3());
    const PureState failure_ket = make_basis_state({"1", "2", "3"}, {2, 2, 2}, {0, 0, 0});
    for (std::size_t k = 1; k < outcomes.size(); ++k) {
        if (!outcomes[k].post_state) continue;
        const double d = magnitude_diff(*outcomes[k].post_state, failure_ket);
        rep.failure_magnitude_diff =
            std::max(rep.failure_magnitude_diff.value_or(0.0), d);
    }

    const double worst = std::max({rep.probability_diff,
                                   rep.success_magnitude_diff.value_or(0.0),
                                   rep.failure_magnitude_diff.value_or(0.0)});
    rep.lab_phase_artifact = params.frame == Frame::lab && worst > 1e-9;
    return rep;
}

} // namespace wdistill
