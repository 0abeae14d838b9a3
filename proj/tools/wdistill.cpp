#include <algorithm>
#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "wdistill/cavity.hpp"
#include "wdistill/json_io.hpp"
#include "wdistill/locc.hpp"
#include "wdistill/montecarlo.hpp"
#include "wdistill/protocols.hpp"

namespace {

using namespace wdistill;

// Numbers may be given as decimals or small fractions like "1/3".
double parse_real(const std::string& text) {
    try {
        std::size_t used = 0;
        const auto slash = text.find('/');
        if (slash != std::string::npos) {
            const double num = std::stod(text.substr(0, slash), &used);
            if (used != slash) throw InputError("cannot parse number '" + text + "'");
            const double den = std::stod(text.substr(slash + 1), &used);
            if (used != text.size() - slash - 1 || den == 0.0)
                throw InputError("cannot parse number '" + text + "'");
            return num / den;
        }
        const double v = std::stod(text, &used);
        if (used != text.size()) throw InputError("cannot parse number '" + text + "'");
        return v;
    } catch (const std::invalid_argument&) {
        throw InputError("cannot parse number '" + text + "'");
    } catch (const std::out_of_range&) {
        throw InputError("number out of range: '" + text + "'");
    }
}

std::vector<double> parse_list(const std::string& text, std::size_t expected,
                               const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(item));
    if (out.size() != expected)
        throw InputError(std::string(what) + " needs " + std::to_string(expected) +
                         " comma-separated values");
    return out;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("WDISTILL_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw InputError("WDISTILL_SEED is not an unsigned integer");
        }
    }
    return 12345;
}

struct CoefficientOptions {
    std::string amp;
    std::string sq;
    bool allow_unsorted = false;
};

WCoefficients resolve_coefficients(const CoefficientOptions& opt) {
    if (opt.amp.empty() == opt.sq.empty())
        throw InputError("give exactly one of --amp a,b,c or --sq a2,b2,c2");

    const bool squares = !opt.sq.empty();
    std::array<double, 3> v{};
    {
        const auto parsed = parse_list(squares ? opt.sq : opt.amp, 3,
                                       squares ? "--sq" : "--amp");
        std::copy(parsed.begin(), parsed.end(), v.begin());
    }
    for (double x : v)
        if (x < 0.0)
            throw CoefficientError(squares ? "squared coefficients must be non-negative"
                                           : "amplitudes must be non-negative");

    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return v[i] > v[j]; });
    const bool sorted = order == std::array<int, 3>{0, 1, 2};
    if (!sorted) {
        if (!opt.allow_unsorted)
            throw CoefficientError(
                "coefficient ordering a >= b >= c violated; pass --allow-unsorted to relabel");
        std::cerr << "note: coefficients sorted descending; input positions used as (a,b,c): ("
                  << order[0] + 1 << "," << order[1] + 1 << "," << order[2] + 1 << ")\n";
    }
    std::array<double, 3> s{v[order[0]], v[order[1]], v[order[2]]};

    const double total = squares ? s[0] + s[1] + s[2] : s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
    if (std::abs(total - 1.0) > 1e-6)
        throw CoefficientError("coefficients are not normalized (|sum-1| = " +
                               std::to_string(std::abs(total - 1.0)) +
                               " exceeds the 1e-6 auto-renormalization band)");
    if (std::abs(total - 1.0) > 1e-12) {
        std::cerr << "warning: renormalizing coefficients (drift "
                  << std::abs(total - 1.0) << ")\n";
        for (double& x : s) x /= squares ? total : std::sqrt(total);
    }

    const WCoefficients coeffs = squares ? WCoefficients::from_squares(s[0], s[1], s[2])
                                         : WCoefficients(s[0], s[1], s[2]);
    if (coeffs.degenerate())
        std::cerr << "warning: c = 0 is degenerate; the W branch has probability 0\n";
    return coeffs;
}

ProtocolId protocol_from_string(const std::string& name) {
    if (name == "protocol1") return ProtocolId::protocol1;
    if (name == "protocol2") return ProtocolId::protocol2;
    if (name == "cavity") return ProtocolId::cavity;
    throw InputError("unknown protocol '" + name + "'");
}

std::string full_precision(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct RunOptions {
    CoefficientOptions coeff;
    std::string protocol = "protocol1";
    std::string frame = "interaction";
    double epsilon = 1.0;
    double omega = 1.0;
    int n_max = 1;
    std::string format = "human";
    std::uint64_t seed = 0;
    std::string session_log;
};

std::vector<ProtocolOutcome> execute(ProtocolId protocol, const WCoefficients& coeffs,
                                     const CavityParams& params) {
    switch (protocol) {
        case ProtocolId::protocol1: return run_protocol1(coeffs);
        case ProtocolId::protocol2: return run_protocol2(coeffs);
        case ProtocolId::cavity: return run_cavity_protocol(coeffs, params);
    }
    throw SolverError("unreachable protocol selector");
}

void print_human(const RunReport& rep, const std::vector<ProtocolOutcome>& outcomes,
                 bool atoms_as_ge) {
    std::cout << "protocol: " << rep.protocol << "\n";
    std::cout << "coefficients: a2=" << full_precision(rep.a2)
              << " b2=" << full_precision(rep.b2) << " c2=" << full_precision(rep.c2)
              << "\n";
    if (rep.cavity)
        std::cout << "interaction times: dt1=" << full_precision(rep.cavity->dt1)
                  << " dt2=" << full_precision(rep.cavity->dt2)
                  << " (frame=" << rep.cavity->frame << ")\n";
    std::cout << "branches:\n";
    for (std::size_t i = 0; i < rep.branches.size(); ++i) {
        const auto& br = rep.branches[i];
        std::cout << "  " << br.label << "  p=" << full_precision(br.probability) << "  "
                  << br.classification;
        if (br.fidelity) std::cout << "  fidelity(W3)=" << full_precision(*br.fidelity);
        if (br.concurrence) std::cout << "  concurrence=" << full_precision(*br.concurrence);
        if (outcomes[i].post_state)
            std::cout << "\n      " << format_ket(*outcomes[i].post_state, atoms_as_ge);
        std::cout << "\n";
    }
}

void print_csv(const RunReport& rep) {
    std::cout << "label,probability,classification,fidelity,concurrence\n";
    for (const auto& br : rep.branches) {
        std::cout << br.label << ',' << full_precision(br.probability) << ','
                  << br.classification << ','
                  << (br.fidelity ? full_precision(*br.fidelity) : "") << ','
                  << (br.concurrence ? full_precision(*br.concurrence) : "") << "\n";
    }
}

int do_run(const RunOptions& opt) {
    const WCoefficients coeffs = resolve_coefficients(opt.coeff);
    const ProtocolId protocol = protocol_from_string(opt.protocol);
    const Frame frame = opt.frame == "lab" ? Frame::lab : Frame::interaction;
    const CavityParams params(opt.omega, opt.omega, opt.epsilon, opt.n_max, frame);

    const auto outcomes = execute(protocol, coeffs, params);

    std::optional<CavitySection> cavity;
    if (protocol == ProtocolId::cavity) {
        const InteractionTimes times = optimal_times(coeffs, params.epsilon);
        cavity = CavitySection{times.dt1, times.dt2, to_string(params.frame)};
    }
    const RunReport rep = build_run_report(protocol, coeffs, outcomes, cavity);

    if (opt.format == "json") {
        std::cout << nlohmann::json(rep).dump(2) << "\n";
    } else if (opt.format == "csv") {
        print_csv(rep);
    } else {
        print_human(rep, outcomes, protocol == ProtocolId::cavity);
    }

    if (!opt.session_log.empty()) {
        UniformRng rng(opt.seed);
        const SessionRun run = protocol == ProtocolId::protocol1
                                   ? run_protocol1_session(coeffs, rng)
                               : protocol == ProtocolId::protocol2
                                   ? run_protocol2_session(coeffs, rng)
                                   : run_cavity_session(coeffs, params, rng);
        std::ofstream out(opt.session_log, std::ios::binary);
        if (!out) throw InputError("cannot open session log file '" + opt.session_log + "'");
        out << run.session.serialize_log();
        std::cerr << "session log (" << run.branch_label << ", "
                  << to_string(run.result) << ") written to " << opt.session_log << "\n";
    }
    return 0;
}

struct SweepOptions {
    std::string protocol = "protocol1";
    std::string c2_spec;
    std::string b2_spec;
    bool a_eq_b = false;
    std::string out_path;
    double epsilon = 1.0;
    std::string frame = "interaction";
};

std::vector<double> parse_grid_axis(const std::string& spec, const char* what) {
    std::stringstream ss(spec);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() != 3)
        throw InputError(std::string(what) + " must be min:max:steps");
    const double lo = parse_real(parts[0]);
    const double hi = parse_real(parts[1]);
    int steps = 0;
    try {
        steps = std::stoi(parts[2]);
    } catch (const std::exception&) {
        throw InputError(std::string(what) + ": steps must be an integer");
    }
    if (steps < 1) throw InputError(std::string(what) + ": steps must be >= 1");
    std::vector<double> axis;
    axis.reserve(static_cast<std::size_t>(steps));
    if (steps == 1) {
        axis.push_back(lo);
        return axis;
    }
    for (int i = 0; i < steps; ++i)
        axis.push_back(lo + (hi - lo) * static_cast<double>(i) / (steps - 1));
    return axis;
}

int do_sweep(const SweepOptions& opt) {
    if (opt.b2_spec.empty() == !opt.a_eq_b)
        throw InputError("give exactly one of --b2 min:max:steps or --a-eq-b");
    if (opt.out_path.empty()) throw InputError("--out is required");

    const ProtocolId protocol = protocol_from_string(opt.protocol);
    const Frame frame = opt.frame == "lab" ? Frame::lab : Frame::interaction;
    const CavityParams params(1.0, 1.0, opt.epsilon, 1, frame);

    struct Row {
        double a2, b2, c2, p_w, p_bell, p_fail, p_w_sim, max_err;
    };
    std::vector<Row> rows;

    const auto c2_axis = parse_grid_axis(opt.c2_spec, "--c2");
    for (double c2 : c2_axis) {
        std::vector<double> b2_axis;
        if (opt.a_eq_b) b2_axis.push_back((1.0 - c2) / 2.0);
        else b2_axis = parse_grid_axis(opt.b2_spec, "--b2");
        for (double b2 : b2_axis) {
            const double a2 = 1.0 - b2 - c2;
            if (a2 < 0.0) continue;
            // grid arithmetic may flip ties by one ulp; relabeling is free
            std::array<double, 3> sq{a2, b2, c2};
            std::sort(sq.begin(), sq.end(), std::greater<>());
            if (std::abs(sq[2] - c2) > 1e-12 || std::abs(sq[1] - b2) > 1e-12)
                continue; // genuinely outside the ordered region
            std::optional<WCoefficients> coeffs;
            try {
                coeffs = WCoefficients::from_squares(sq[0], sq[1], sq[2]);
            } catch (const CoefficientError&) {
                continue;
            }
            const auto analytic = analytic_partition(protocol, *coeffs);
            double w = 0.0, bell = 0.0, fail = 0.0;
            for (const auto& o : execute(protocol, *coeffs, params)) {
                if (o.classification == Classification::W_SUCCESS) w += o.probability;
                else if (o.classification == Classification::BELL_SUCCESS) bell += o.probability;
                else fail += o.probability;
            }
            const double err = std::max({std::abs(w - analytic.p_w),
                                         std::abs(bell - analytic.p_bell),
                                         std::abs(fail - analytic.p_fail)});
            rows.push_back(Row{sq[0], sq[1], sq[2], analytic.p_w, analytic.p_bell,
                               analytic.p_fail, w, err});
        }
    }
    if (rows.empty())
        throw InputError("sweep grid is empty after filtering to the ordered region");

    std::sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
        return std::tie(x.c2, x.b2) < std::tie(y.c2, y.b2);
    });

    const std::filesystem::path target(opt.out_path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw InputError("cannot open output file '" + opt.out_path + "'");
        out << "# wdistill-sweep-v1\n";
        out << "a2,b2,c2,p_w,p_bell,p_fail,p_w_simulated,max_abs_error\n";
        for (const auto& r : rows) {
            out << full_precision(r.a2) << ',' << full_precision(r.b2) << ','
                << full_precision(r.c2) << ',' << full_precision(r.p_w) << ','
                << full_precision(r.p_bell) << ',' << full_precision(r.p_fail) << ','
                << full_precision(r.p_w_sim) << ',' << full_precision(r.max_err) << '\n';
        }
    }
    std::filesystem::rename(tmp, target);
    std::cerr << rows.size() << " rows written to " << opt.out_path << "\n";
    return 0;
}

struct MonteCarloOptions {
    CoefficientOptions coeff;
    std::string protocol = "protocol1";
    std::uint64_t trials = 100000;
    std::uint64_t seed = 0;
    double threshold = 4.0;
    std::string force_counts;
    double epsilon = 1.0;
    std::string frame = "interaction";
};

int do_montecarlo(const MonteCarloOptions& opt) {
    if (opt.trials < 1) throw InputError("--trials must be >= 1");
    const WCoefficients coeffs = resolve_coefficients(opt.coeff);
    const ProtocolId protocol = protocol_from_string(opt.protocol);
    const Frame frame = opt.frame == "lab" ? Frame::lab : Frame::interaction;
    const CavityParams params(1.0, 1.0, opt.epsilon, 1, frame);

    TrialReport report = [&] {
        if (!opt.force_counts.empty()) {
            const auto counts = parse_list(opt.force_counts, 3, "--force-counts");
            return report_from_counts(protocol, coeffs,
                                      static_cast<std::uint64_t>(counts[0]),
                                      static_cast<std::uint64_t>(counts[1]),
                                      static_cast<std::uint64_t>(counts[2]), opt.seed);
        }
        return simulate_trials(protocol, coeffs, opt.trials, opt.seed, params);
    }();

    const FrequencyVerdict verdict = compare_frequencies(report, opt.threshold);
    RunReport rep = build_run_report(protocol, coeffs, execute(protocol, coeffs, params));
    rep.montecarlo = make_montecarlo_section(report, verdict);
    std::cout << nlohmann::json(rep).dump(2) << "\n";
    return verdict.pass ? 0 : 1;
}

int do_replay(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open session log '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();

    const auto result = replay_session_log(buffer.str());
    std::cout << "events: " << result.session.log().size() << "\n";
    std::cout << "owners:";
    for (const auto& [label, loc] : result.session.registry())
        std::cout << ' ' << label << "->" << loc;
    std::cout << "\n";
    if (!result.final_state_deviation) {
        std::cerr << "warning: log has no final snapshot to verify against\n";
        return 0;
    }
    std::cout << "final state deviation: " << full_precision(*result.final_state_deviation)
              << "\n";
    if (*result.final_state_deviation > 1e-12) {
        std::cerr << "error: replay deviates from the recorded final state\n";
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distillation of three-particle W-class states: exact branch "
                 "enumeration, cavity realization, LOCC sessions and Monte Carlo checks"};
    app.require_subcommand(1);

    RunOptions run_opt;
    MonteCarloOptions mc_opt;
    SweepOptions sweep_opt;
    std::string replay_path;

    const auto add_coeff_options = [](CLI::App* cmd, CoefficientOptions& c) {
        cmd->add_option("--amp", c.amp, "amplitudes a,b,c (fractions like 1/3 allowed)");
        cmd->add_option("--sq", c.sq, "squared amplitudes a2,b2,c2");
        cmd->add_flag("--allow-unsorted", c.allow_unsorted,
                      "sort coefficients descending instead of rejecting");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "run one protocol and print all branches");
    add_coeff_options(run_cmd, run_opt.coeff);
    run_cmd->add_option("--protocol", run_opt.protocol, "protocol1|protocol2|cavity");
    run_cmd->add_option("--frame", run_opt.frame, "interaction|lab (cavity only)");
    run_cmd->add_option("--epsilon", run_opt.epsilon, "atom-field coupling");
    run_cmd->add_option("--omega", run_opt.omega, "cavity mode frequency (lab frame phases)");
    run_cmd->add_option("--n-max", run_opt.n_max, "Fock truncation");
    run_cmd->add_option("--format", run_opt.format, "json|csv|human");
    run_cmd->add_option("--seed", run_opt.seed, "seed for --session-log sampling");
    run_cmd->add_option("--session-log", run_opt.session_log,
                        "also execute one sampled LOCC session and write its log");

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "evaluate a coefficient grid and write a CSV");
    sweep_cmd->add_option("--protocol", sweep_opt.protocol, "protocol1|protocol2|cavity");
    sweep_cmd->add_option("--c2", sweep_opt.c2_spec, "c^2 axis as min:max:steps")->required();
    sweep_cmd->add_option("--b2", sweep_opt.b2_spec, "b^2 axis as min:max:steps");
    sweep_cmd->add_flag("--a-eq-b", sweep_opt.a_eq_b, "set a = b on every grid point");
    sweep_cmd->add_option("--out", sweep_opt.out_path, "output CSV path")->required();
    sweep_cmd->add_option("--epsilon", sweep_opt.epsilon, "atom-field coupling (cavity)");
    sweep_cmd->add_option("--frame", sweep_opt.frame, "interaction|lab (cavity)");

    CLI::App* mc_cmd = app.add_subcommand(
        "montecarlo", "sample repeated trials and test frequencies against analytic values");
    add_coeff_options(mc_cmd, mc_opt.coeff);
    mc_cmd->add_option("--protocol", mc_opt.protocol, "protocol1|protocol2|cavity");
    mc_cmd->add_option("--trials", mc_opt.trials, "number of trials");
    mc_cmd->add_option("--seed", mc_opt.seed, "rng seed (default: WDISTILL_SEED or 12345)");
    mc_cmd->add_option("--threshold", mc_opt.threshold, "|z| pass threshold");
    mc_cmd->add_option("--force-counts", mc_opt.force_counts,
                       "test hook: use these w,bell,fail counts instead of sampling");
    mc_cmd->add_option("--epsilon", mc_opt.epsilon, "atom-field coupling (cavity)");
    mc_cmd->add_option("--frame", mc_opt.frame, "interaction|lab (cavity)");

    CLI::App* replay_cmd =
        app.add_subcommand("locc-replay", "replay a session log and verify the final state");
    replay_cmd->add_option("log", replay_path, "session log file")->required();

    bool seed_given = false;
    try {
        app.parse(argc, argv);
        seed_given = mc_cmd->count("--seed") > 0 || run_cmd->count("--seed") > 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!seed_given) {
            const std::uint64_t seed = default_seed();
            run_opt.seed = seed;
            mc_opt.seed = seed;
        }
        if (*run_cmd) return do_run(run_opt);
        if (*sweep_cmd) return do_sweep(sweep_opt);
        if (*mc_cmd) return do_montecarlo(mc_opt);
        if (*replay_cmd) return do_replay(replay_path);
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
