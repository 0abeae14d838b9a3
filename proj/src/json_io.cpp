#include "wdistill/json_io.hpp"

#include <cmath>
#include <sstream>

namespace wdistill {

namespace {

using nlohmann::json;

json opt_to_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

std::optional<double> opt_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

} // namespace

void to_json(json& j, const BranchReport& r) {
    j = json{{"label", r.label},
             {"probability", r.probability},
             {"classification", r.classification},
             {"fidelity", opt_to_json(r.fidelity)},
             {"concurrence", opt_to_json(r.concurrence)}};
}

void from_json(const json& j, BranchReport& r) {
    j.at("label").get_to(r.label);
    j.at("probability").get_to(r.probability);
    j.at("classification").get_to(r.classification);
    r.fidelity = opt_from_json(j.at("fidelity"));
    r.concurrence = opt_from_json(j.at("concurrence"));
}

void to_json(json& j, const CavitySection& r) {
    j = json{{"dt1", r.dt1}, {"dt2", r.dt2}, {"frame", r.frame}};
}

void from_json(const json& j, CavitySection& r) {
    j.at("dt1").get_to(r.dt1);
    j.at("dt2").get_to(r.dt2);
    j.at("frame").get_to(r.frame);
}

void to_json(json& j, const MonteCarloSection& r) {
    j = json{{"n_trials", r.n_trials},
             {"seed", r.seed},
             {"rng", r.rng},
             {"counts", {{"w", r.count_w}, {"bell", r.count_bell}, {"fail", r.count_fail}}},
             {"frequencies", {{"w", r.freq_w}, {"bell", r.freq_bell}, {"fail", r.freq_fail}}},
             {"analytic", {{"w", r.p_w}, {"bell", r.p_bell}, {"fail", r.p_fail}}},
             {"z_scores",
              {{"w", opt_to_json(r.z_w)},
               {"bell", opt_to_json(r.z_bell)},
               {"fail", opt_to_json(r.z_fail)}}},
             {"threshold", r.threshold},
             {"pass", r.pass}};
}

void from_json(const json& j, MonteCarloSection& r) {
    j.at("n_trials").get_to(r.n_trials);
    j.at("seed").get_to(r.seed);
    j.at("rng").get_to(r.rng);
    j.at("counts").at("w").get_to(r.count_w);
    j.at("counts").at("bell").get_to(r.count_bell);
    j.at("counts").at("fail").get_to(r.count_fail);
    j.at("frequencies").at("w").get_to(r.freq_w);
    j.at("frequencies").at("bell").get_to(r.freq_bell);
    j.at("frequencies").at("fail").get_to(r.freq_fail);
    j.at("analytic").at("w").get_to(r.p_w);
    j.at("analytic").at("bell").get_to(r.p_bell);
    j.at("analytic").at("fail").get_to(r.p_fail);
    r.z_w = opt_from_json(j.at("z_scores").at("w"));
    r.z_bell = opt_from_json(j.at("z_scores").at("bell"));
    r.z_fail = opt_from_json(j.at("z_scores").at("fail"));
    j.at("threshold").get_to(r.threshold);
    j.at("pass").get_to(r.pass);
}

void to_json(json& j, const RunReport& r) {
    j = json{{"protocol", r.protocol},
             {"coefficients", {{"a2", r.a2}, {"b2", r.b2}, {"c2", r.c2}}},
             {"branches", r.branches}};
    if (r.cavity) j["cavity"] = *r.cavity;
    if (r.montecarlo) j["montecarlo"] = *r.montecarlo;
}

void from_json(const json& j, RunReport& r) {
    j.at("protocol").get_to(r.protocol);
    j.at("coefficients").at("a2").get_to(r.a2);
    j.at("coefficients").at("b2").get_to(r.b2);
    j.at("coefficients").at("c2").get_to(r.c2);
    j.at("branches").get_to(r.branches);
    r.cavity.reset();
    if (j.contains("cavity")) r.cavity = j.at("cavity").get<CavitySection>();
    r.montecarlo.reset();
    if (j.contains("montecarlo"))
        r.montecarlo = j.at("montecarlo").get<MonteCarloSection>();
}

RunReport build_run_report(ProtocolId protocol, const WCoefficients& coeffs,
                           const std::vector<ProtocolOutcome>& outcomes,
                           std::optional<CavitySection> cavity) {
    RunReport rep;
    rep.protocol = to_string(protocol);
    rep.a2 = coeffs.a2();
    rep.b2 = coeffs.b2();
    rep.c2 = coeffs.c2();
    rep.cavity = std::move(cavity);

    for (const auto& o : outcomes) {
        BranchReport br;
        br.label = o.branch_label;
        br.probability = o.probability;
        br.classification = to_string(o.classification);
        if (o.post_state) {
            if (o.post_state->subsystem_count() == 3)
                br.fidelity = fidelity(*o.post_state, make_w3());
            else if (o.post_state->subsystem_count() == 2)
                br.concurrence = concurrence(partial_trace(*o.post_state,
                                                           o.post_state->labels()));
        }
        rep.branches.push_back(std::move(br));
    }
    return rep;
}

MonteCarloSection make_montecarlo_section(const TrialReport& report,
                                          const FrequencyVerdict& verdict) {
    MonteCarloSection s;
    s.n_trials = report.n_trials;
    s.seed = report.seed;
    s.rng = report.rng_algorithm;
    s.count_w = report.count_w;
    s.count_bell = report.count_bell;
    s.count_fail = report.count_fail;
    s.freq_w = report.freq_w;
    s.freq_bell = report.freq_bell;
    s.freq_fail = report.freq_fail;
    s.p_w = report.analytic.p_w;
    s.p_bell = report.analytic.p_bell;
    s.p_fail = report.analytic.p_fail;
    s.z_w = report.z_w;
    s.z_bell = report.z_bell;
    s.z_fail = report.z_fail;
    s.threshold = verdict.threshold;
    s.pass = verdict.pass;
    return s;
}

std::string format_ket(const PureState& state, bool atoms_as_ge) {
    std::ostringstream out;
    bool first = true;
    for (Eigen::Index i = 0; i < state.total_dim(); ++i) {
        const Complex amp = state.amplitudes()(i);
        if (std::abs(amp) < 1e-12) continue;
        if (!first) out << " + ";
        first = false;
        if (std::abs(amp.imag()) < 1e-15) {
            out << amp.real();
        } else {
            out << '(' << amp.real() << (amp.imag() < 0 ? "" : "+") << amp.imag() << "i)";
        }
        out << " |";
        for (std::size_t p = 0; p < state.subsystem_count(); ++p) {
            const int lv = state.level_at(i, p);
            if (state.dim_at(p) == 2 && atoms_as_ge) out << (lv == 0 ? 'g' : 'e');
            else out << lv;
        }
        out << '>';
    }
    if (first) out << "0";
    return out.str();
}

} // namespace wdistill
