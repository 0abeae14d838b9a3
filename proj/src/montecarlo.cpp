#include "wdistill/montecarlo.hpp"

#include <algorithm>
#include <cmath>

namespace wdistill {

namespace {

std::optional<double> z_score(double freq, double p, std::uint64_t n) {
    if (p <= 0.0 || p >= 1.0) return std::nullopt;
    return (freq - p) / std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

void finalize(TrialReport& rep) {
    const double n = static_cast<double>(rep.n_trials);
    rep.freq_w = static_cast<double>(rep.count_w) / n;
    rep.freq_bell = static_cast<double>(rep.count_bell) / n;
    rep.freq_fail = static_cast<double>(rep.count_fail) / n;
    rep.analytic = analytic_partition(rep.protocol, rep.coeffs);
    rep.z_w = z_score(rep.freq_w, rep.analytic.p_w, rep.n_trials);
    rep.z_bell = z_score(rep.freq_bell, rep.analytic.p_bell, rep.n_trials);
    rep.z_fail = z_score(rep.freq_fail, rep.analytic.p_fail, rep.n_trials);
}

} // namespace

TrialReport simulate_trials(ProtocolId protocol, const WCoefficients& coeffs,
                            std::uint64_t n_trials, std::uint64_t seed,
                            const CavityParams& params) {
    if (n_trials < 1) throw InputError("trial count must be at least 1");

    TrialReport rep(protocol, coeffs);
    rep.n_trials = n_trials;
    rep.seed = seed;
    rep.rng_algorithm = UniformRng::kAlgorithmId;
    UniformRng rng(seed);

    if (protocol == ProtocolId::protocol1) {
        PureState st = tensor(make_wprime(coeffs), qubit("a", 0));
        st = apply_joint_unitary(st, build_u1(coeffs), "3", "a");
        st = apply_joint_unitary(st, build_u2(coeffs), "2", "a");
        for (std::uint64_t t = 0; t < n_trials; ++t) {
            if (sample_measurement(st, "a", rng) == 0) ++rep.count_w;
            else ++rep.count_fail;
        }
    } else if (protocol == ProtocolId::protocol2) {
        PureState st = tensor(make_wprime(coeffs), qubit("a", 0));
        st = apply_joint_unitary(st, build_u1_prime(coeffs), "3", "a");
        st = apply_joint_unitary(st, build_u2_prime(coeffs), "2", "a");

        // Deterministic continuation of the anc=1 branch, prepared once; the
        // per-trial work is the measurement sampling itself.
        const bool direct =
            std::abs(coeffs.a() - coeffs.b()) <= 1e-12 * std::max(1.0, coeffs.a());
        std::optional<PureState> recycled;
        const auto res = measure_subsystem(st, "a");
        if (!direct && res.branches[1].post_state) {
            const PureState garbage = drop_collapsed(*res.branches[1].post_state, "a");
            PureState pair = drop_collapsed(garbage, "1");
            PureState st2 = tensor(pair, qubit("a2", 0));
            recycled = apply_joint_unitary(st2, build_u3_prime(coeffs), "3", "a2");
        }

        for (std::uint64_t t = 0; t < n_trials; ++t) {
            if (sample_measurement(st, "a", rng) == 0) {
                ++rep.count_w;
            } else if (direct) {
                ++rep.count_bell;
            } else {
                if (sample_measurement(*recycled, "a2", rng) == 0) ++rep.count_bell;
                else ++rep.count_fail;
            }
        }
    } else {
        const InteractionTimes times = optimal_times(coeffs, params.epsilon);
        PureState st = tensor(make_wprime(coeffs),
                              PureState::basis({"c"}, {params.n_max + 1}, {0}));
        st = jc_evolve(st, "3", "c", params, times.dt1);
        st = jc_evolve(st, "2", "c", params, times.dt2);
        for (std::uint64_t t = 0; t < n_trials; ++t) {
            if (sample_measurement(st, "c", rng) == 0) ++rep.count_w;
            else ++rep.count_fail;
        }
    }

    finalize(rep);
    return rep;
}

TrialReport simulate_trials(ProtocolId protocol, const WCoefficients& coeffs,
                            std::uint64_t n_trials, std::uint64_t seed) {
    return simulate_trials(protocol, coeffs, n_trials, seed,
                           CavityParams(1.0, 1.0, 1.0, 1, Frame::interaction));
}

TrialReport report_from_counts(ProtocolId protocol, const WCoefficients& coeffs,
                               std::uint64_t count_w, std::uint64_t count_bell,
                               std::uint64_t count_fail, std::uint64_t seed) {
    TrialReport rep(protocol, coeffs);
    rep.count_w = count_w;
    rep.count_bell = count_bell;
    rep.count_fail = count_fail;
    rep.n_trials = count_w + count_bell + count_fail;
    if (rep.n_trials < 1) throw InputError("counts must sum to at least 1");
    rep.seed = seed;
    rep.rng_algorithm = "external-counts";
    finalize(rep);
    return rep;
}

FrequencyVerdict compare_frequencies(const TrialReport& report, double threshold) {
    FrequencyVerdict v;
    v.threshold = threshold;
    v.z_w = report.z_w;
    v.z_bell = report.z_bell;
    v.z_fail = report.z_fail;
    v.pass = true;
    for (const auto& z : {v.z_w, v.z_bell, v.z_fail})
        if (z && !(std::abs(*z) < threshold)) v.pass = false;
    return v;
}

} // namespace wdistill
