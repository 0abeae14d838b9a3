#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "wdistill/cavity.hpp"
#include "wdistill/protocols.hpp"

// Repeated-trial sampling of protocol outcomes with a z-score comparison
// against the closed-form branch probabilities. Every measurement is sampled
// trial by trial; only the deterministic evolution between measurements is
// shared across trials.

namespace wdistill {

struct TrialReport {
    TrialReport(ProtocolId protocol_, const WCoefficients& coeffs_)
        : protocol(protocol_), coeffs(coeffs_) {}

    ProtocolId protocol;
    WCoefficients coeffs;
    std::uint64_t n_trials = 0;
    std::uint64_t seed = 0;
    std::string rng_algorithm; // see UniformRng::kAlgorithmId

    std::uint64_t count_w = 0;
    std::uint64_t count_bell = 0;
    std::uint64_t count_fail = 0;
    double freq_w = 0.0;
    double freq_bell = 0.0;
    double freq_fail = 0.0;

    BranchProbabilities analytic;
    // z = (freq - p) / sqrt(p(1-p)/n); undefined (skipped) when p is 0 or 1.
    std::optional<double> z_w, z_bell, z_fail;
};

TrialReport simulate_trials(ProtocolId protocol, const WCoefficients& coeffs,
                            std::uint64_t n_trials, std::uint64_t seed);
TrialReport simulate_trials(ProtocolId protocol, const WCoefficients& coeffs,
                            std::uint64_t n_trials, std::uint64_t seed,
                            const CavityParams& params);

/// Assemble a report from externally supplied counts (test hook for the
/// failure path); frequencies and z-scores are recomputed.
TrialReport report_from_counts(ProtocolId protocol, const WCoefficients& coeffs,
                               std::uint64_t count_w, std::uint64_t count_bell,
                               std::uint64_t count_fail, std::uint64_t seed);

struct FrequencyVerdict {
    bool pass = false;
    double threshold = 4.0;
    std::optional<double> z_w, z_bell, z_fail;
};

/// Pass iff every defined |z| is strictly below the threshold.
FrequencyVerdict compare_frequencies(const TrialReport& report, double threshold = 4.0);

} // namespace wdistill
