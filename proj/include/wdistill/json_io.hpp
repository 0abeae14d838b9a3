#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "wdistill/cavity.hpp"
#include "wdistill/montecarlo.hpp"
#include "wdistill/protocols.hpp"

// Stable JSON schema shared by the CLI and downstream tooling:
//   {protocol, coefficients:{a2,b2,c2},
//    branches:[{label, probability, classification, fidelity, concurrence}],
//    cavity:{dt1, dt2, frame}?, montecarlo:{...}?}
// fidelity/concurrence are null where not applicable; the optional sections
// are omitted entirely when absent.

namespace wdistill {

struct BranchReport {
    std::string label;
    double probability = 0.0;
    std::string classification;
    std::optional<double> fidelity;    // vs |W3>, for three-qubit post states
    std::optional<double> concurrence; // for two-qubit post states

    bool operator==(const BranchReport&) const = default;
};

struct CavitySection {
    double dt1 = 0.0;
    double dt2 = 0.0;
    std::string frame;

    bool operator==(const CavitySection&) const = default;
};

struct MonteCarloSection {
    std::uint64_t n_trials = 0;
    std::uint64_t seed = 0;
    std::string rng;
    std::uint64_t count_w = 0, count_bell = 0, count_fail = 0;
    double freq_w = 0.0, freq_bell = 0.0, freq_fail = 0.0;
    double p_w = 0.0, p_bell = 0.0, p_fail = 0.0;
    std::optional<double> z_w, z_bell, z_fail;
    double threshold = 4.0;
    bool pass = false;

    bool operator==(const MonteCarloSection&) const = default;
};

struct RunReport {
    std::string protocol;
    double a2 = 0.0, b2 = 0.0, c2 = 0.0;
    std::vector<BranchReport> branches;
    std::optional<CavitySection> cavity;
    std::optional<MonteCarloSection> montecarlo;

    bool operator==(const RunReport&) const = default;
};

void to_json(nlohmann::json& j, const BranchReport& r);
void from_json(const nlohmann::json& j, BranchReport& r);
void to_json(nlohmann::json& j, const CavitySection& r);
void from_json(const nlohmann::json& j, CavitySection& r);
void to_json(nlohmann::json& j, const MonteCarloSection& r);
void from_json(const nlohmann::json& j, MonteCarloSection& r);
void to_json(nlohmann::json& j, const RunReport& r);
void from_json(const nlohmann::json& j, RunReport& r);

/// Assemble the report for a protocol run, certifying each branch post state
/// (fidelity with |W3> for three-qubit states, concurrence for pairs).
RunReport build_run_report(ProtocolId protocol, const WCoefficients& coeffs,
                           const std::vector<ProtocolOutcome>& outcomes,
                           std::optional<CavitySection> cavity = std::nullopt);

MonteCarloSection make_montecarlo_section(const TrialReport& report,
                                          const FrequencyVerdict& verdict);

/// Nonzero amplitudes as a ket string in register order, e.g.
/// "0.57735 |001> + 0.57735 |010> + ...". With atoms_as_ge, qubit levels are
/// written g/e instead of 0/1.
std::string format_ket(const PureState& state, bool atoms_as_ge = false);

} // namespace wdistill
