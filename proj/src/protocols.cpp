#include "wdistill/protocols.hpp"

#include <algorithm>
#include <cmath>

namespace wdistill {

namespace {

constexpr double kCoeffNormTol = 1e-9;
constexpr double kDirectBellTol = 1e-12; // relative |a-b| below which U3' is skipped

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

// Exchange-type rotation: |10> <-> |01> mixing with angle cos = r,
// local basis {|00>, |10>, |01>, |11>}.
Eigen::Matrix4cd exchange_rotation(double r) {
    const double s = std::sqrt(std::max(0.0, 1.0 - r * r));
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Identity();
    m(1, 1) = r;
    m(1, 2) = s;
    m(2, 1) = -s;
    m(2, 2) = r;
    return m;
}

// Excitation-parking rotation: |10> -> r|10> + s|11>, |01> -> -|01>,
// |11> -> s|10> - r|11>.
Eigen::Matrix4cd parking_rotation(double r) {
    const double s = std::sqrt(std::max(0.0, 1.0 - r * r));
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Identity();
    m(1, 1) = r;
    m(1, 3) = s;
    m(2, 2) = -1.0;
    m(3, 1) = s;
    m(3, 3) = -r;
    return m;
}

} // namespace

WCoefficients::WCoefficients(double a, double b, double c) : a_(a), b_(b), c_(c) {
    if (!(a >= 0.0) || !(b >= 0.0) || !(c >= 0.0))
        throw CoefficientError("coefficients must be non-negative reals");
    if (!(a >= b && b >= c))
        throw CoefficientError("coefficient ordering a >= b >= c violated");
    const double n = a * a + b * b + c * c;
    if (std::abs(n - 1.0) > kCoeffNormTol)
        throw CoefficientError("coefficients are not normalized: a^2+b^2+c^2 = " +
                               std::to_string(n));
    if (1.0 - 3.0 * c * c < -1e-12)
        throw CoefficientError("internal ordering consequence 1 - 3c^2 >= 0 violated");
    if (!(1.0 - 2.0 * c * c > 0.0))
        throw CoefficientError("internal ordering consequence 1 - 2c^2 > 0 violated");
}

WCoefficients WCoefficients::from_squares(double a2, double b2, double c2) {
    if (a2 < 0.0 || b2 < 0.0 || c2 < 0.0)
        throw CoefficientError("squared coefficients must be non-negative");
    return WCoefficients(std::sqrt(a2), std::sqrt(b2), std::sqrt(c2));
}

const char* to_string(Classification c) {
    switch (c) {
        case Classification::W_SUCCESS: return "W_SUCCESS";
        case Classification::BELL_SUCCESS: return "BELL_SUCCESS";
        case Classification::FAILURE: return "FAILURE";
    }
    return "?";
}

const char* to_string(ProtocolId p) {
    switch (p) {
        case ProtocolId::protocol1: return "protocol1";
        case ProtocolId::protocol2: return "protocol2";
        case ProtocolId::cavity: return "cavity";
    }
    return "?";
}

PureState make_wprime(const WCoefficients& coeffs) {
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(8);
    amps(1) = coeffs.a(); // |001>
    amps(2) = coeffs.b(); // |010>
    amps(4) = coeffs.c(); // |100>
    return PureState({"1", "2", "3"}, {2, 2, 2}, std::move(amps));
}

PureState make_w3() {
    const double r = 1.0 / std::sqrt(3.0);
    return make_wprime(WCoefficients(r, r, r));
}

JointUnitary build_u1(const WCoefficients& coeffs) {
    return JointUnitary(exchange_rotation(coeffs.c() / coeffs.a()));
}

MParameter solve_m(const WCoefficients& coeffs) {
    const double a2 = coeffs.a2(), c2 = coeffs.c2();
    const double denom = 1.0 - 2.0 * c2;
    double disc = (a2 - c2) * (1.0 - 3.0 * c2);
    if (disc < 0.0) {
        if (disc < -1e-12) throw SolverError("negative discriminant for valid coefficients");
        disc = 0.0;
    }
    const double root = std::sqrt(disc);
    const double bc = coeffs.b() * coeffs.c();

    const auto residual = [&](double m) {
        return coeffs.b() * m - std::sqrt(std::max(0.0, (a2 - c2) * (1.0 - m * m))) - coeffs.c();
    };
    const auto admissible = [&](double m) {
        return std::abs(m) <= 1.0 + 1e-12 && std::abs(residual(clamp_unit(m))) <= 1e-9;
    };

    const double m_plus = (bc + root) / denom;
    const double m_minus = (bc - root) / denom;
    if (admissible(m_plus)) return {clamp_unit(m_plus), MParameter::Sign::plus};
    if (admissible(m_minus)) return {clamp_unit(m_minus), MParameter::Sign::minus};
    throw SolverError("no root of the m quadratic satisfies the matching condition");
}

JointUnitary build_u2(const WCoefficients& coeffs) {
    return JointUnitary(exchange_rotation(solve_m(coeffs).value));
}

JointUnitary build_u1_prime(const WCoefficients& coeffs) {
    return JointUnitary(parking_rotation(coeffs.c() / coeffs.a()));
}

JointUnitary build_u2_prime(const WCoefficients& coeffs) {
    if (coeffs.b() == 0.0)
        throw CoefficientError("b = 0 is degenerate (bipartite input); second protocol undefined");
    return JointUnitary(parking_rotation(coeffs.c() / coeffs.b()));
}

JointUnitary build_u3_prime(const WCoefficients& coeffs) {
    const double num = coeffs.b2() - coeffs.c2();
    const double den = coeffs.a2() - coeffs.c2();
    // a = b = c makes the ratio 0/0; the rotation entry tends to 1 along a = b,
    // so take the continuous extension.
    const double r = den <= 1e-300 ? 1.0 : clamp_unit(std::sqrt(num / den));
    return JointUnitary(parking_rotation(r));
}

namespace {

std::vector<ProtocolOutcome> recycle_weighted(const PureState& garbage,
                                              const WCoefficients& coeffs, double weight);

} // namespace

std::vector<ProtocolOutcome> run_protocol1(const WCoefficients& coeffs) {
    PureState st = tensor(make_wprime(coeffs), qubit("a", 0));
    st = apply_joint_unitary(st, build_u1(coeffs), "3", "a");
    st = apply_joint_unitary(st, build_u2(coeffs), "2", "a");
    const auto res = measure_subsystem(st, "a");

    std::vector<ProtocolOutcome> out;
    for (const auto& br : res.branches) {
        ProtocolOutcome o;
        o.branch_label = "anc=" + std::to_string(br.outcome);
        o.probability = br.probability;
        o.classification =
            br.outcome == 0 ? Classification::W_SUCCESS : Classification::FAILURE;
        if (br.post_state) o.post_state = drop_collapsed(*br.post_state, "a");
        out.push_back(std::move(o));
    }
    return out;
}

std::vector<ProtocolOutcome> run_protocol2(const WCoefficients& coeffs) {
    PureState st = tensor(make_wprime(coeffs), qubit("a", 0));
    st = apply_joint_unitary(st, build_u1_prime(coeffs), "3", "a");
    st = apply_joint_unitary(st, build_u2_prime(coeffs), "2", "a");
    const auto res = measure_subsystem(st, "a");

    std::vector<ProtocolOutcome> out;

    ProtocolOutcome w;
    w.branch_label = "anc=0";
    w.probability = res.branches[0].probability;
    w.classification = Classification::W_SUCCESS;
    if (res.branches[0].post_state)
        w.post_state = drop_collapsed(*res.branches[0].post_state, "a");
    out.push_back(std::move(w));

    const auto& fail_branch = res.branches[1];
    if (!fail_branch.post_state) {
        // a = b = c: nothing to recycle, keep the empty slot for a fixed shape
        ProtocolOutcome f;
        f.branch_label = "anc=1";
        f.probability = fail_branch.probability;
        f.classification = Classification::FAILURE;
        out.push_back(std::move(f));
        return out;
    }

    const PureState garbage = drop_collapsed(*fail_branch.post_state, "a");
    for (auto& sub : recycle_weighted(garbage, coeffs, fail_branch.probability)) {
        sub.branch_label = sub.branch_label.empty() ? "anc=1" : "anc=1;" + sub.branch_label;
        out.push_back(std::move(sub));
    }
    return out;
}

namespace {

// Split a state known to be product across (q | rest) into its `rest` factor.
// The q marginal must be pure; every populated q-row of the amplitude tensor
// is then proportional to the factor, so the dominant row is taken.
PureState factor_out(const PureState& state, const std::string& q) {
    if (partial_trace(state, {q}).purity() < 1.0 - kCoeffNormTol)
        throw InputError("subsystem '" + q + "' is not separable from the rest");

    const std::size_t pos = state.position_of(q);
    const Eigen::Index s = state.stride(pos);
    const int d = state.dim_at(pos);
    const Eigen::Index rest_dim = state.total_dim() / d;

    // rows indexed by the q level, columns by the remaining register in order
    Eigen::MatrixXcd rows = Eigen::MatrixXcd::Zero(d, rest_dim);
    for (Eigen::Index i = 0; i < state.total_dim(); ++i) {
        const int lv = static_cast<int>((i / s) % d);
        const Eigen::Index col = (i / (s * d)) * s + (i % s);
        rows(lv, col) = state.amplitudes()(i);
    }
    Eigen::Index best = 0;
    rows.rowwise().norm().maxCoeff(&best);

    std::vector<std::string> labels;
    std::vector<int> dims;
    for (std::size_t p = 0; p < state.subsystem_count(); ++p) {
        if (p == pos) continue;
        labels.push_back(state.labels()[p]);
        dims.push_back(state.dim_at(p));
    }
    Eigen::VectorXcd amps = rows.row(best).transpose() / rows.row(best).norm();
    return PureState(std::move(labels), std::move(dims), std::move(amps));
}

std::vector<ProtocolOutcome> recycle_weighted(const PureState& garbage,
                                              const WCoefficients& coeffs, double weight) {
    const PureState pair = factor_out(garbage, "1"); // particles 2,3

    if (std::abs(coeffs.a() - coeffs.b()) <= kDirectBellTol * std::max(1.0, coeffs.a())) {
        // a = b: the pair is already maximally entangled, no rotation needed
        ProtocolOutcome o;
        o.branch_label = "";
        o.probability = weight;
        o.post_state = pair;
        o.classification = Classification::BELL_SUCCESS;
        return {std::move(o)};
    }

    PureState st = tensor(pair, qubit("a2", 0));
    st = apply_joint_unitary(st, build_u3_prime(coeffs), "3", "a2");
    const auto res = measure_subsystem(st, "a2");

    std::vector<ProtocolOutcome> out;
    for (const auto& br : res.branches) {
        ProtocolOutcome o;
        o.branch_label = "anc2=" + std::to_string(br.outcome);
        o.probability = weight * br.probability;
        o.classification =
            br.outcome == 0 ? Classification::BELL_SUCCESS : Classification::FAILURE;
        if (br.post_state) o.post_state = drop_collapsed(*br.post_state, "a2");
        out.push_back(std::move(o));
    }
    return out;
}

} // namespace

std::vector<ProtocolOutcome> recycle_garbage(const PureState& garbage,
                                             const WCoefficients& coeffs) {
    auto out = recycle_weighted(garbage, coeffs, 1.0 - 3.0 * coeffs.c2());
    for (auto& o : out)
        if (o.branch_label.empty()) o.branch_label = "direct";
    return out;
}

BranchProbabilities analytic_probabilities(const WCoefficients& coeffs) {
    BranchProbabilities p;
    p.p_w = 3.0 * coeffs.c2();
    p.p_bell = 2.0 * (coeffs.b2() - coeffs.c2());
    p.p_fail = coeffs.a2() - coeffs.b2();
    return p;
}

BranchProbabilities analytic_partition(ProtocolId protocol, const WCoefficients& coeffs) {
    if (protocol == ProtocolId::protocol2) return analytic_probabilities(coeffs);
    BranchProbabilities p;
    p.p_w = 3.0 * coeffs.c2();
    p.p_bell = 0.0;
    p.p_fail = 1.0 - 3.0 * coeffs.c2();
    return p;
}

} // namespace wdistill
