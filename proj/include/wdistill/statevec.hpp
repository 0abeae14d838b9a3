#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "wdistill/errors.hpp"
#include "wdistill/rng.hpp"

// Dense pure-state engine: register construction, two-subsystem unitaries,
// projective measurement with exact branch probabilities, partial trace and
// entanglement/fidelity diagnostics.
//
// Register conventions, fixed once for the whole library:
//  - A register is an ordered list of subsystems addressed by label; the label
//    list order defines the tensor slot order.
//  - The amplitude index is big-endian in label order: for a qubit register,
//    |x1 x2 ... xn> sits at index x1*2^(n-1) + x2*2^(n-2) + ... + xn.
//  - A (particle p, ancilla a) pair unitary is written in the local basis
//    {|0>p|0>a, |1>p|0>a, |0>p|1>a, |1>p|1>a}, i.e. local index
//    = bit(p) + 2*bit(a), with the particle listed first.

namespace wdistill {

using Complex = std::complex<double>;

inline constexpr double kStateNormTol = 1e-9;   // validity of a normalized state
inline constexpr double kUnitaryTol = 1e-12;    // max |U U^dag - I| at construction
inline constexpr double kNullBranchProb = 1e-14; // below this a branch carries no post state

/// Immutable dense state vector over an ordered, labelled register.
/// Unnormalized instances are permitted only as tagged intermediate branch
/// vectors (normalized = false).
class PureState {
public:
    PureState(std::vector<std::string> labels, std::vector<int> dims,
              Eigen::VectorXcd amplitudes, bool normalized = true);

    static PureState basis(std::vector<std::string> labels, std::vector<int> dims,
                           const std::vector<int>& occupation);

    const Eigen::VectorXcd& amplitudes() const { return amps_; }
    const std::vector<int>& dims() const { return dims_; }
    const std::vector<std::string>& labels() const { return labels_; }
    bool is_normalized() const { return normalized_; }

    Eigen::Index total_dim() const { return amps_.size(); }
    std::size_t subsystem_count() const { return dims_.size(); }

    /// Register position of a label; throws LabelError for unknown labels.
    std::size_t position_of(const std::string& label) const;
    bool has_label(const std::string& label) const;

    /// Big-endian index stride of the subsystem at register position pos.
    Eigen::Index stride(std::size_t pos) const;
    int dim_at(std::size_t pos) const { return dims_[pos]; }
    /// Level of subsystem pos within the basis ket of amplitude index idx.
    int level_at(Eigen::Index idx, std::size_t pos) const;

    double norm() const { return amps_.norm(); }
    PureState renormalized() const;

private:
    std::vector<std::string> labels_;
    std::vector<int> dims_;
    Eigen::VectorXcd amps_;
    bool normalized_;
};

/// 4x4 unitary acting on an ordered (particle, ancilla) qubit pair under the
/// local basis convention above. Unitarity is checked at construction.
class JointUnitary {
public:
    explicit JointUnitary(const Eigen::Matrix4cd& entries);

    static JointUnitary identity();

    const Eigen::Matrix4cd& entries() const { return entries_; }
    /// max |U U^dag - I| over all entries.
    double unitarity_defect() const;

private:
    Eigen::Matrix4cd entries_;
};

/// Reduced density operator over a sub-register. Hermiticity, unit trace and
/// positivity are checked at construction.
class DensityMatrix {
public:
    DensityMatrix(Eigen::MatrixXcd entries, std::vector<int> dims);

    const Eigen::MatrixXcd& entries() const { return entries_; }
    const std::vector<int>& dims() const { return dims_; }
    Eigen::Index dim() const { return entries_.rows(); }

    /// tr(rho^2); 1 for pure states, 1/d for maximally mixed.
    double purity() const;

private:
    Eigen::MatrixXcd entries_;
    std::vector<int> dims_;
};

/// Full resolution of a projective measurement: one branch per level of the
/// measured subsystem, probabilities summing to one. Branches below
/// kNullBranchProb keep their slot (probability ~0) but carry no post state.
struct MeasurementResolution {
    struct Branch {
        int outcome = 0;
        double probability = 0.0;
        std::optional<PureState> post_state; // full register, measured subsystem collapsed
    };
    std::vector<Branch> branches;
};

PureState make_basis_state(const std::vector<int>& dims, const std::vector<int>& occupation);
PureState make_basis_state(std::vector<std::string> labels, std::vector<int> dims,
                           const std::vector<int>& occupation);

/// Single qubit |0> or |1> with the given label.
PureState qubit(const std::string& label, int level);

/// Kronecker product; lhs subsystems ordered before rhs subsystems.
PureState tensor(const PureState& lhs, const PureState& rhs);

/// Apply u to the (p, a) qubit pair, identity elsewhere. Norm preserving.
PureState apply_joint_unitary(const PureState& state, const JointUnitary& u,
                              const std::string& p, const std::string& a);

/// Resolve a projective measurement of subsystem q into all branches.
MeasurementResolution measure_subsystem(const PureState& state, const std::string& q);

/// Draw one measurement outcome of subsystem q with the exact branch
/// probabilities; deterministic given the rng stream.
int sample_measurement(const PureState& state, const std::string& q, UniformRng& rng);

/// |<target|state>|^2.
double fidelity(const PureState& state, const PureState& target);

/// Reduced density matrix over `keep` (in register order).
DensityMatrix partial_trace(const PureState& state, const std::vector<std::string>& keep);

/// Wootters concurrence of a two-qubit density matrix, clamped to [0, 1].
double concurrence(const DensityMatrix& rho);

/// Remove a subsystem that is collapsed onto a single basis level (as after a
/// measurement), returning the state over the remaining register.
PureState drop_collapsed(const PureState& state, const std::string& q);

} // namespace wdistill
