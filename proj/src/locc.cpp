#include "wdistill/locc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace wdistill {

namespace {

using nlohmann::json;

json complex_vector_to_json(const Eigen::VectorXcd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        arr.push_back({v(i).real(), v(i).imag()});
    return arr;
}

Eigen::VectorXcd complex_vector_from_json(const json& arr) {
    Eigen::VectorXcd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = Complex(arr[i][0].get<double>(),
                                                  arr[i][1].get<double>());
    return v;
}

json matrix_to_json(const Eigen::Matrix4cd& m) {
    json arr = json::array();
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            arr.push_back({m(r, c).real(), m(r, c).imag()});
    return arr;
}

Eigen::Matrix4cd matrix_from_json(const json& arr) {
    Eigen::Matrix4cd m;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            const auto& e = arr[static_cast<std::size_t>(r * 4 + c)];
            m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
        }
    return m;
}

} // namespace

LoccSession::LoccSession(PureState state, std::map<std::string, std::string> ownership)
    : state_(std::move(state)), registry_(std::move(ownership)) {
    for (const auto& label : state_.labels())
        if (registry_.find(label) == registry_.end())
            throw RegistryError("subsystem '" + label + "' has no owner");
    for (const auto& [label, loc] : registry_)
        if (!state_.has_label(label))
            throw RegistryError("ownership entry for unknown subsystem '" + label + "'");

    json ownership_json = json::object();
    for (const auto& [label, loc] : registry_) ownership_json[label] = loc;
    push_event("-", "init",
               {{"labels", state_.labels()},
                {"dims", state_.dims()},
                {"amps", complex_vector_to_json(state_.amplitudes())},
                {"ownership", ownership_json}});
}

const std::string& LoccSession::owner(const std::string& label) const {
    const auto it = registry_.find(label);
    if (it == registry_.end())
        throw RegistryError("subsystem '" + label + "' is not registered");
    return it->second;
}

void LoccSession::push_event(std::string location, std::string kind, json payload) {
    LoccEvent ev;
    ev.ordinal = static_cast<int>(log_.size());
    ev.location = std::move(location);
    ev.kind = std::move(kind);
    ev.payload = std::move(payload);
    log_.push_back(std::move(ev));
}

void LoccSession::add_ancilla(const std::string& label, int dim, int level,
                              const std::string& location) {
    if (registry_.count(label) != 0)
        throw RegistryError("subsystem label '" + label + "' already registered");
    state_ = tensor(state_, PureState::basis({label}, {dim}, {level}));
    registry_[label] = location;
    push_event(location, "ancilla",
               {{"label", label}, {"dim", dim}, {"level", level}});
}

void LoccSession::local_apply(const JointUnitary& u, const std::string& p,
                              const std::string& a) {
    const std::string& op = owner(p);
    const std::string& oa = owner(a);
    if (op != oa)
        throw LocalityError("joint operation on '" + p + "' (" + op + ") and '" + a +
                            "' (" + oa + ") spans two locations");
    state_ = apply_joint_unitary(state_, u, p, a);
    push_event(op, "apply", {{"p", p}, {"a", a}, {"u", matrix_to_json(u.entries())}});
}

void LoccSession::local_jc_evolve(const std::string& atom, const std::string& field,
                                  const CavityParams& params, double t) {
    const std::string& oa = owner(atom);
    const std::string& of = owner(field);
    if (oa != of)
        throw LocalityError("atom '" + atom + "' (" + oa + ") is not at the cavity's location (" +
                            of + ")");
    state_ = jc_evolve(state_, atom, field, params, t);
    push_event(oa, "jc",
               {{"atom", atom},
                {"field", field},
                {"t", t},
                {"omega", params.omega},
                {"omega0", params.omega0},
                {"epsilon", params.epsilon},
                {"n_max", params.n_max},
                {"frame", to_string(params.frame)}});
}

int LoccSession::local_measure(const std::string& q, UniformRng& rng) {
    const int outcome = sample_measurement(state_, q, rng);
    resolve_measure(q, outcome);
    return outcome;
}

void LoccSession::resolve_measure(const std::string& q, int outcome) {
    const std::string& loc = owner(q);
    const auto res = measure_subsystem(state_, q);
    if (outcome < 0 || outcome >= static_cast<int>(res.branches.size()))
        throw InputError("measurement outcome out of range");
    const auto& br = res.branches[static_cast<std::size_t>(outcome)];
    if (!br.post_state)
        throw InputError("cannot resolve a zero-probability measurement outcome");
    const double probability = br.probability;
    state_ = *br.post_state;
    push_event(loc, "measure",
               {{"q", q}, {"outcome", outcome}, {"probability", probability}});
}

void LoccSession::broadcast(const std::string& location, const std::string& message) {
    push_event(location, "broadcast", {{"message", message}});
}

void LoccSession::transfer_particle(const std::string& q, const std::string& from,
                                    const std::string& to) {
    if (owner(q) != from)
        throw RegistryError("transfer of '" + q + "' claimed from '" + from +
                            "' but its owner is '" + owner(q) + "'");
    registry_[q] = to;
    push_event(from, "transfer", {{"q", q}, {"from", from}, {"to", to}});
}

std::string LoccSession::serialize_log() const {
    std::ostringstream out;
    for (const auto& ev : log_)
        out << ev.ordinal << '\t' << ev.location << '\t' << ev.kind << '\t'
            << ev.payload.dump() << '\n';
    out << log_.size() << "\t-\tfinal\t"
        << json{{"amps", complex_vector_to_json(state_.amplitudes())}}.dump() << '\n';
    return out.str();
}

ReplayResult replay_session_log(const std::string& text) {
    struct ParsedEvent {
        std::string location, kind;
        json payload;
    };
    std::vector<ParsedEvent> events;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::array<std::size_t, 3> tabs{};
        std::size_t from = 0;
        for (auto& t : tabs) {
            t = line.find('\t', from);
            if (t == std::string::npos)
                throw InputError("malformed session log at line " + std::to_string(lineno));
            from = t + 1;
        }
        ParsedEvent ev;
        ev.location = line.substr(tabs[0] + 1, tabs[1] - tabs[0] - 1);
        ev.kind = line.substr(tabs[1] + 1, tabs[2] - tabs[1] - 1);
        try {
            ev.payload = json::parse(line.substr(tabs[2] + 1));
        } catch (const json::parse_error&) {
            throw InputError("malformed payload in session log at line " +
                             std::to_string(lineno));
        }
        events.push_back(std::move(ev));
    }
    if (events.empty() || events.front().kind != "init")
        throw InputError("session log must start with an init record");

    const json& init = events.front().payload;
    std::map<std::string, std::string> ownership;
    for (const auto& [label, loc] : init.at("ownership").items())
        ownership[label] = loc.get<std::string>();
    PureState initial(init.at("labels").get<std::vector<std::string>>(),
                      init.at("dims").get<std::vector<int>>(),
                      complex_vector_from_json(init.at("amps")));
    LoccSession session(std::move(initial), std::move(ownership));

    std::optional<double> deviation;
    for (std::size_t k = 1; k < events.size(); ++k) {
        const auto& ev = events[k];
        const json& p = ev.payload;
        if (ev.kind == "ancilla") {
            session.add_ancilla(p.at("label").get<std::string>(), p.at("dim").get<int>(),
                                p.at("level").get<int>(), ev.location);
        } else if (ev.kind == "apply") {
            session.local_apply(JointUnitary(matrix_from_json(p.at("u"))),
                                p.at("p").get<std::string>(), p.at("a").get<std::string>());
        } else if (ev.kind == "jc") {
            const Frame frame = p.at("frame").get<std::string>() == "lab"
                                    ? Frame::lab
                                    : Frame::interaction;
            CavityParams params(p.at("omega").get<double>(), p.at("omega0").get<double>(),
                                p.at("epsilon").get<double>(), p.at("n_max").get<int>(),
                                frame);
            session.local_jc_evolve(p.at("atom").get<std::string>(),
                                    p.at("field").get<std::string>(), params,
                                    p.at("t").get<double>());
        } else if (ev.kind == "measure") {
            session.resolve_measure(p.at("q").get<std::string>(), p.at("outcome").get<int>());
        } else if (ev.kind == "broadcast") {
            session.broadcast(ev.location, p.at("message").get<std::string>());
        } else if (ev.kind == "transfer") {
            session.transfer_particle(p.at("q").get<std::string>(),
                                      p.at("from").get<std::string>(),
                                      p.at("to").get<std::string>());
        } else if (ev.kind == "final") {
            const Eigen::VectorXcd recorded = complex_vector_from_json(p.at("amps"));
            if (recorded.size() != session.state().amplitudes().size())
                throw InputError("final snapshot dimension does not match replayed state");
            deviation = (session.state().amplitudes() - recorded).cwiseAbs().maxCoeff();
        } else {
            throw InputError("unknown session log event kind '" + ev.kind + "'");
        }
    }
    return ReplayResult{std::move(session), deviation};
}

namespace {

const std::map<std::string, std::string> kProtocolOwnership = {
    {"1", "Alice"}, {"2", "Bob"}, {"3", "Bob"}};

bool direct_bell_case(const WCoefficients& coeffs) {
    return std::abs(coeffs.a() - coeffs.b()) <= 1e-12 * std::max(1.0, coeffs.a());
}

} // namespace

SessionRun run_protocol1_session(const WCoefficients& coeffs, UniformRng& rng) {
    LoccSession s(make_wprime(coeffs), kProtocolOwnership);
    s.add_ancilla("a", 2, 0, "Bob");
    s.local_apply(build_u1(coeffs), "3", "a");
    s.local_apply(build_u2(coeffs), "2", "a");
    const int outcome = s.local_measure("a", rng);
    s.broadcast("Bob", "anc=" + std::to_string(outcome));
    if (outcome == 0) {
        s.transfer_particle("3", "Bob", "Cliff");
        return SessionRun{std::move(s), Classification::W_SUCCESS, "anc=0"};
    }
    return SessionRun{std::move(s), Classification::FAILURE, "anc=1"};
}

SessionRun run_protocol2_session(const WCoefficients& coeffs, UniformRng& rng) {
    LoccSession s(make_wprime(coeffs), kProtocolOwnership);
    s.add_ancilla("a", 2, 0, "Bob");
    s.local_apply(build_u1_prime(coeffs), "3", "a");
    s.local_apply(build_u2_prime(coeffs), "2", "a");
    const int outcome = s.local_measure("a", rng);
    s.broadcast("Bob", "anc=" + std::to_string(outcome));
    if (outcome == 0) {
        s.transfer_particle("3", "Bob", "Cliff");
        return SessionRun{std::move(s), Classification::W_SUCCESS, "anc=0"};
    }
    if (direct_bell_case(coeffs)) {
        s.broadcast("Bob", "bell=direct");
        s.transfer_particle("3", "Bob", "Cliff");
        return SessionRun{std::move(s), Classification::BELL_SUCCESS, "anc=1"};
    }
    s.add_ancilla("a2", 2, 0, "Bob");
    s.local_apply(build_u3_prime(coeffs), "3", "a2");
    const int outcome2 = s.local_measure("a2", rng);
    s.broadcast("Bob", "anc2=" + std::to_string(outcome2));
    if (outcome2 == 0) {
        s.transfer_particle("3", "Bob", "Cliff");
        return SessionRun{std::move(s), Classification::BELL_SUCCESS, "anc=1;anc2=0"};
    }
    return SessionRun{std::move(s), Classification::FAILURE, "anc=1;anc2=1"};
}

SessionRun run_cavity_session(const WCoefficients& coeffs, const CavityParams& params,
                              UniformRng& rng) {
    auto ownership = kProtocolOwnership;
    ownership["c"] = "Bob"; // the cavity is a fixture at Bob's location
    LoccSession s(tensor(make_wprime(coeffs),
                         PureState::basis({"c"}, {params.n_max + 1}, {0})),
                  std::move(ownership));
    const InteractionTimes times = optimal_times(coeffs, params.epsilon);
    s.local_jc_evolve("3", "c", params, times.dt1);
    s.local_jc_evolve("2", "c", params, times.dt2);
    const int outcome = s.local_measure("c", rng);
    s.broadcast("Bob", "photon=" + std::to_string(outcome));
    if (outcome == 0) {
        s.transfer_particle("3", "Bob", "Cliff");
        return SessionRun{std::move(s), Classification::W_SUCCESS, "photon=0"};
    }
    return SessionRun{std::move(s), Classification::FAILURE,
                      "photon=" + std::to_string(outcome)};
}

} // namespace wdistill
