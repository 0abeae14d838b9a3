#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "wdistill/cavity.hpp"
#include "wdistill/protocols.hpp"
#include "wdistill/statevec.hpp"

// Locality bookkeeping: every subsystem is owned by a named location (Alice,
// Bob, Cliff, ...), joint operations are permitted only on co-located
// subsystems, measurement outcomes are broadcast as classical messages, and
// particle transfer is a registry mutation. A session is single-writer;
// distinct sessions are independent.

namespace wdistill {

struct LoccEvent {
    int ordinal = 0;
    std::string location; // "-" for session-level records
    std::string kind;     // init, ancilla, apply, jc, measure, broadcast, transfer
    nlohmann::json payload;
};

class LoccSession {
public:
    /// Ownership must assign exactly the subsystem labels present in `state`.
    LoccSession(PureState state, std::map<std::string, std::string> ownership);

    const PureState& state() const { return state_; }
    const std::map<std::string, std::string>& registry() const { return registry_; }
    const std::vector<LoccEvent>& log() const { return log_; }
    const std::string& owner(const std::string& label) const;

    /// Adjoin a fresh subsystem prepared in a basis level; it is owned by its
    /// creating location.
    void add_ancilla(const std::string& label, int dim, int level,
                     const std::string& location);

    /// Joint unitary on (p, a); rejected with LocalityError unless both
    /// operands share one owner.
    void local_apply(const JointUnitary& u, const std::string& p, const std::string& a);

    /// Resonant atom-field evolution; atom and field must be co-located.
    void local_jc_evolve(const std::string& atom, const std::string& field,
                         const CavityParams& params, double t);

    /// Sample a measurement of q at its owner's location and collapse onto the
    /// drawn branch. Returns the outcome level.
    int local_measure(const std::string& q, UniformRng& rng);

    /// Collapse onto a recorded outcome (log replay path).
    void resolve_measure(const std::string& q, int outcome);

    /// Classical message, visible to all locations via the log.
    void broadcast(const std::string& location, const std::string& message);

    void transfer_particle(const std::string& q, const std::string& from,
                           const std::string& to);

    /// Line-delimited structured text: "ordinal<TAB>location<TAB>kind<TAB>payload"
    /// with a JSON payload per line. Starts with the init record and ends with
    /// a snapshot of the current state for replay verification.
    std::string serialize_log() const;

private:
    void push_event(std::string location, std::string kind, nlohmann::json payload);

    PureState state_;
    std::map<std::string, std::string> registry_;
    std::vector<LoccEvent> log_;
};

struct ReplayResult {
    LoccSession session;
    /// max elementwise |replayed - recorded| against the final snapshot.
    std::optional<double> final_state_deviation;
};

/// Reconstruct a session from a serialized log and re-execute every event,
/// resolving measurements to their recorded outcomes.
ReplayResult replay_session_log(const std::string& text);

/// One sampled pass through a protocol executed entirely through the session
/// interface (so any non-local operation would have thrown).
struct SessionRun {
    LoccSession session;
    Classification result;
    std::string branch_label;
};

SessionRun run_protocol1_session(const WCoefficients& coeffs, UniformRng& rng);
SessionRun run_protocol2_session(const WCoefficients& coeffs, UniformRng& rng);
SessionRun run_cavity_session(const WCoefficients& coeffs, const CavityParams& params,
                              UniformRng& rng);

} // namespace wdistill
