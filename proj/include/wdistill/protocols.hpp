#pragma once

#include <string>
#include <vector>

#include "wdistill/statevec.hpp"

// The two distillation protocols for three-particle W-class states
// a|001> + b|010> + c|100>, plus the garbage-recycling path that turns the
// failed branch of the second protocol into a Bell pair on particles 2,3.
//
// Register labels: particles "1","2","3"; first ancilla "a"; recycling
// ancilla "a2". Particle 1 sits with Alice, everything else with Bob.

namespace wdistill {

/// Real ordered coefficient triple with a >= b >= c >= 0 and unit norm.
class WCoefficients {
public:
    WCoefficients(double a, double b, double c);
    static WCoefficients from_squares(double a2, double b2, double c2);

    double a() const { return a_; }
    double b() const { return b_; }
    double c() const { return c_; }
    double a2() const { return a_ * a_; }
    double b2() const { return b_ * b_; }
    double c2() const { return c_ * c_; }

    /// c = 0: the |100> component is absent and distillation to W cannot succeed.
    bool degenerate() const { return c_ == 0.0; }

    bool operator==(const WCoefficients&) const = default;

private:
    double a_, b_, c_;
};

enum class Classification { W_SUCCESS, BELL_SUCCESS, FAILURE };

const char* to_string(Classification c);

/// One fully resolved measurement branch of a protocol run. Probabilities are
/// listed from the initial state (joint, not conditional), so every run's
/// outcome list sums to one.
struct ProtocolOutcome {
    std::string branch_label;
    double probability = 0.0;
    std::optional<PureState> post_state; // surviving register; empty for ~zero-probability branches
    Classification classification = Classification::FAILURE;
};

/// Rotation parameter of the second-stage transformation, with the sign of the
/// quadratic root that satisfies the unsquared matching condition
/// b*m - sqrt((a^2-c^2)(1-m^2)) = c.
struct MParameter {
    enum class Sign { plus, minus };
    double value = 0.0;
    Sign sign_choice = Sign::plus;
};

PureState make_wprime(const WCoefficients& coeffs);

/// |W3> = (|001> + |010> + |100>)/sqrt(3) on particles 1,2,3.
PureState make_w3();

// First protocol: rotate the |001> coefficient down to c on (particle 3,
// ancilla), then the |010> coefficient on (particle 2, ancilla).
JointUnitary build_u1(const WCoefficients& coeffs);
MParameter solve_m(const WCoefficients& coeffs);
JointUnitary build_u2(const WCoefficients& coeffs);
std::vector<ProtocolOutcome> run_protocol1(const WCoefficients& coeffs);

// Second protocol: same coefficient rotations but parking the removed weight
// on |1>a without flipping the particles, so the failed branch keeps a usable
// entangled pair on particles 2,3.
JointUnitary build_u1_prime(const WCoefficients& coeffs);
JointUnitary build_u2_prime(const WCoefficients& coeffs);
JointUnitary build_u3_prime(const WCoefficients& coeffs);
std::vector<ProtocolOutcome> run_protocol2(const WCoefficients& coeffs);

/// Distill the failed-branch ("garbage") state of protocol 2 into a Bell pair
/// on particles 2,3. `garbage` must be the normalized anc=1 branch over
/// particles 1-3, with particle 1 separable. Returned probabilities are joint
/// (already weighted by the garbage branch weight 1 - 3c^2).
std::vector<ProtocolOutcome> recycle_garbage(const PureState& garbage,
                                             const WCoefficients& coeffs);

/// Closed-form branch probabilities of protocol 2 (the test oracle for the
/// simulated values): W success 3c^2, Bell success 2(b^2-c^2), failure a^2-b^2.
struct BranchProbabilities {
    double p_w = 0.0;
    double p_bell = 0.0;
    double p_fail = 0.0;
};

BranchProbabilities analytic_probabilities(const WCoefficients& coeffs);

enum class ProtocolId { protocol1, protocol2, cavity };

const char* to_string(ProtocolId p);

/// Closed-form partition per protocol: protocol 1 and the cavity realization
/// have no Bell branch (their failure weight is 1 - 3c^2).
BranchProbabilities analytic_partition(ProtocolId protocol, const WCoefficients& coeffs);

} // namespace wdistill
