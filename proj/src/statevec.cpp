#include "wdistill/statevec.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <unordered_set>

namespace wdistill {

namespace {

Eigen::Index product_of(const std::vector<int>& dims) {
    Eigen::Index d = 1;
    for (int k : dims) d *= k;
    return d;
}

} // namespace

PureState::PureState(std::vector<std::string> labels, std::vector<int> dims,
                     Eigen::VectorXcd amplitudes, bool normalized)
    : labels_(std::move(labels)), dims_(std::move(dims)), amps_(std::move(amplitudes)),
      normalized_(normalized) {
    if (labels_.size() != dims_.size())
        throw DimensionError("label list and dimension list differ in length");
    if (dims_.empty())
        throw DimensionError("register needs at least one subsystem");
    for (int d : dims_)
        if (d < 2) throw DimensionError("subsystem dimension must be >= 2");
    if (amps_.size() != product_of(dims_))
        throw DimensionError("amplitude vector length does not match register dimension");
    std::unordered_set<std::string> seen;
    for (const auto& l : labels_)
        if (!seen.insert(l).second) throw LabelError("duplicate subsystem label '" + l + "'");
    if (normalized_ && std::abs(amps_.norm() - 1.0) > kStateNormTol)
        throw InputError("state flagged normalized but has norm " + std::to_string(amps_.norm()));
}

PureState PureState::basis(std::vector<std::string> labels, std::vector<int> dims,
                           const std::vector<int>& occupation) {
    if (occupation.size() != dims.size())
        throw DimensionError("occupation list length does not match register");
    Eigen::Index idx = 0;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (occupation[i] < 0 || occupation[i] >= dims[i])
            throw DimensionError("occupation level out of range for subsystem " +
                                 std::to_string(i));
        idx = idx * dims[i] + occupation[i];
    }
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(product_of(dims));
    amps(idx) = Complex(1.0, 0.0);
    return PureState(std::move(labels), std::move(dims), std::move(amps));
}

std::size_t PureState::position_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == label) return i;
    throw LabelError("unknown subsystem label '" + label + "'");
}

bool PureState::has_label(const std::string& label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

Eigen::Index PureState::stride(std::size_t pos) const {
    Eigen::Index s = 1;
    for (std::size_t i = pos + 1; i < dims_.size(); ++i) s *= dims_[i];
    return s;
}

int PureState::level_at(Eigen::Index idx, std::size_t pos) const {
    return static_cast<int>((idx / stride(pos)) % dims_[pos]);
}

PureState PureState::renormalized() const {
    const double n = norm();
    if (n < 1e-154) throw InputError("cannot renormalize a zero vector");
    return PureState(labels_, dims_, amps_ / n, true);
}

JointUnitary::JointUnitary(const Eigen::Matrix4cd& entries) : entries_(entries) {
    if (unitarity_defect() > kUnitaryTol)
        throw InputError("matrix is not unitary within tolerance");
}

JointUnitary JointUnitary::identity() {
    return JointUnitary(Eigen::Matrix4cd::Identity());
}

double JointUnitary::unitarity_defect() const {
    Eigen::Matrix4cd r = entries_ * entries_.adjoint() - Eigen::Matrix4cd::Identity();
    return r.cwiseAbs().maxCoeff();
}

DensityMatrix::DensityMatrix(Eigen::MatrixXcd entries, std::vector<int> dims)
    : entries_(std::move(entries)), dims_(std::move(dims)) {
    if (entries_.rows() != entries_.cols())
        throw DimensionError("density matrix must be square");
    if (entries_.rows() != product_of(dims_))
        throw DimensionError("density matrix size does not match dimension list");
    if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw InputError("density matrix is not Hermitian within tolerance");
    if (std::abs(entries_.trace().real() - 1.0) > kStateNormTol ||
        std::abs(entries_.trace().imag()) > kStateNormTol)
        throw InputError("density matrix trace is not 1 within tolerance");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(entries_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw InputError("density matrix has a negative eigenvalue beyond tolerance");
}

double DensityMatrix::purity() const {
    return (entries_ * entries_).trace().real();
}

PureState make_basis_state(const std::vector<int>& dims, const std::vector<int>& occupation) {
    std::vector<std::string> labels;
    labels.reserve(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i) labels.push_back("q" + std::to_string(i));
    return PureState::basis(std::move(labels), dims, occupation);
}

PureState make_basis_state(std::vector<std::string> labels, std::vector<int> dims,
                           const std::vector<int>& occupation) {
    return PureState::basis(std::move(labels), std::move(dims), occupation);
}

PureState qubit(const std::string& label, int level) {
    return PureState::basis({label}, {2}, {level});
}

PureState tensor(const PureState& lhs, const PureState& rhs) {
    for (const auto& l : rhs.labels())
        if (lhs.has_label(l)) throw LabelError("label collision in tensor product: '" + l + "'");

    std::vector<std::string> labels = lhs.labels();
    labels.insert(labels.end(), rhs.labels().begin(), rhs.labels().end());
    std::vector<int> dims = lhs.dims();
    dims.insert(dims.end(), rhs.dims().begin(), rhs.dims().end());

    const Eigen::Index dr = rhs.total_dim();
    Eigen::VectorXcd amps(lhs.total_dim() * dr);
    for (Eigen::Index i = 0; i < lhs.total_dim(); ++i)
        for (Eigen::Index j = 0; j < dr; ++j)
            amps(i * dr + j) = lhs.amplitudes()(i) * rhs.amplitudes()(j);

    return PureState(std::move(labels), std::move(dims), std::move(amps),
                     lhs.is_normalized() && rhs.is_normalized());
}

PureState apply_joint_unitary(const PureState& state, const JointUnitary& u,
                              const std::string& p, const std::string& a) {
    if (p == a) throw LabelError("joint unitary needs two distinct subsystems");
    const std::size_t pp = state.position_of(p);
    const std::size_t pa = state.position_of(a);
    if (state.dim_at(pp) != 2 || state.dim_at(pa) != 2)
        throw DimensionError("joint unitary operands must be qubits");

    const Eigen::Index sp = state.stride(pp);
    const Eigen::Index sa = state.stride(pa);
    const Eigen::Matrix4cd& m = u.entries();

    Eigen::VectorXcd out = state.amplitudes();
    for (Eigen::Index i = 0; i < state.total_dim(); ++i) {
        if ((i / sp) % 2 != 0 || (i / sa) % 2 != 0) continue;
        // local basis order: |p a> = |00>, |10>, |01>, |11>
        const Eigen::Index idx[4] = {i, i + sp, i + sa, i + sp + sa};
        Eigen::Vector4cd v;
        for (int k = 0; k < 4; ++k) v(k) = out(idx[k]);
        Eigen::Vector4cd w = m * v;
        for (int k = 0; k < 4; ++k) out(idx[k]) = w(k);
    }
    return PureState(state.labels(), state.dims(), std::move(out), state.is_normalized());
}

namespace {

std::vector<double> level_probabilities(const PureState& state, std::size_t pos) {
    std::vector<double> probs(state.dim_at(pos), 0.0);
    const Eigen::Index s = state.stride(pos);
    const int d = state.dim_at(pos);
    for (Eigen::Index i = 0; i < state.total_dim(); ++i)
        probs[static_cast<std::size_t>((i / s) % d)] += std::norm(state.amplitudes()(i));
    return probs;
}

void require_normalized(const PureState& state, const char* op) {
    if (!state.is_normalized() || std::abs(state.norm() - 1.0) > kStateNormTol)
        throw InputError(std::string(op) + " requires a normalized state");
}

} // namespace

MeasurementResolution measure_subsystem(const PureState& state, const std::string& q) {
    require_normalized(state, "measure_subsystem");
    const std::size_t pos = state.position_of(q);
    const Eigen::Index s = state.stride(pos);
    const int d = state.dim_at(pos);
    const auto probs = level_probabilities(state, pos);

    MeasurementResolution res;
    res.branches.reserve(static_cast<std::size_t>(d));
    for (int level = 0; level < d; ++level) {
        MeasurementResolution::Branch br;
        br.outcome = level;
        br.probability = probs[static_cast<std::size_t>(level)];
        if (br.probability >= kNullBranchProb) {
            Eigen::VectorXcd proj = Eigen::VectorXcd::Zero(state.total_dim());
            for (Eigen::Index i = 0; i < state.total_dim(); ++i)
                if ((i / s) % d == level) proj(i) = state.amplitudes()(i);
            proj /= std::sqrt(br.probability);
            br.post_state.emplace(state.labels(), state.dims(), std::move(proj), true);
        }
        res.branches.push_back(std::move(br));
    }
    return res;
}

int sample_measurement(const PureState& state, const std::string& q, UniformRng& rng) {
    require_normalized(state, "sample_measurement");
    const auto probs = level_probabilities(state, state.position_of(q));
    const double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t level = 0; level + 1 < probs.size(); ++level) {
        acc += probs[level];
        if (u < acc) return static_cast<int>(level);
    }
    return static_cast<int>(probs.size()) - 1;
}

double fidelity(const PureState& state, const PureState& target) {
    if (state.dims() != target.dims())
        throw DimensionError("fidelity requires matching register dimensions");
    require_normalized(state, "fidelity");
    require_normalized(target, "fidelity");
    return std::norm(target.amplitudes().dot(state.amplitudes()));
}

DensityMatrix partial_trace(const PureState& state, const std::vector<std::string>& keep) {
    if (keep.empty()) throw LabelError("partial_trace needs a non-empty keep list");
    require_normalized(state, "partial_trace");

    std::vector<bool> kept(state.subsystem_count(), false);
    for (const auto& l : keep) {
        const std::size_t pos = state.position_of(l);
        if (kept[pos]) throw LabelError("duplicate label in keep list: '" + l + "'");
        kept[pos] = true;
    }

    // Row index of each amplitude within the kept sub-register (register order)
    // and a grouping key over the traced-out environment.
    std::vector<int> keep_dims;
    for (std::size_t p = 0; p < state.subsystem_count(); ++p)
        if (kept[p]) keep_dims.push_back(state.dim_at(p));

    const Eigen::Index d = state.total_dim();
    std::vector<Eigen::Index> row(static_cast<std::size_t>(d)), env(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) {
        Eigen::Index r = 0, e = 0;
        for (std::size_t p = 0; p < state.subsystem_count(); ++p) {
            const int lv = state.level_at(i, p);
            if (kept[p]) r = r * state.dim_at(p) + lv;
            else e = e * state.dim_at(p) + lv;
        }
        row[static_cast<std::size_t>(i)] = r;
        env[static_cast<std::size_t>(i)] = e;
    }

    Eigen::Index dk = 1;
    for (int k : keep_dims) dk *= k;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dk, dk);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (state.amplitudes()(i) == Complex(0.0, 0.0)) continue;
        for (Eigen::Index j = 0; j < d; ++j) {
            if (env[static_cast<std::size_t>(i)] != env[static_cast<std::size_t>(j)]) continue;
            rho(row[static_cast<std::size_t>(i)], row[static_cast<std::size_t>(j)]) +=
                state.amplitudes()(i) * std::conj(state.amplitudes()(j));
        }
    }
    return DensityMatrix(std::move(rho), std::move(keep_dims));
}

double concurrence(const DensityMatrix& rho) {
    if (rho.dims() != std::vector<int>{2, 2})
        throw DimensionError("concurrence is defined for two-qubit density matrices");

    // spin flip rho~ = (sy (x) sy) rho* (sy (x) sy); sy (x) sy is real symmetric
    Eigen::Matrix4cd flip = Eigen::Matrix4cd::Zero();
    flip(0, 3) = -1.0;
    flip(1, 2) = 1.0;
    flip(2, 1) = 1.0;
    flip(3, 0) = -1.0;

    // The Wootters lambdas sqrt(eig(rho rho~)) are the singular values of
    // sqrt(rho~) sqrt(rho). Computing them as singular values avoids the
    // square-root amplification of eigenvalue noise near zero.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho.entries());
    Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::Matrix4cd sqrt_rho =
        es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    const Eigen::Matrix4cd sqrt_flipped = flip * sqrt_rho.conjugate() * flip;

    Eigen::JacobiSVD<Eigen::Matrix4cd> svd(sqrt_flipped * sqrt_rho);
    const auto& sv = svd.singularValues();
    return std::clamp(sv(0) - sv(1) - sv(2) - sv(3), 0.0, 1.0);
}

PureState drop_collapsed(const PureState& state, const std::string& q) {
    const std::size_t pos = state.position_of(q);
    const Eigen::Index s = state.stride(pos);
    const int d = state.dim_at(pos);

    const auto probs = level_probabilities(state, pos);
    const auto it = std::max_element(probs.begin(), probs.end());
    const int level = static_cast<int>(it - probs.begin());
    double off = 0.0;
    for (int k = 0; k < d; ++k)
        if (k != level) off += probs[static_cast<std::size_t>(k)];
    if (off > kNullBranchProb)
        throw InputError("subsystem '" + q + "' is not collapsed onto a single level");

    std::vector<std::string> labels;
    std::vector<int> dims;
    for (std::size_t p = 0; p < state.subsystem_count(); ++p) {
        if (p == pos) continue;
        labels.push_back(state.labels()[p]);
        dims.push_back(state.dim_at(p));
    }
    if (labels.empty()) throw DimensionError("cannot drop the only subsystem");

    Eigen::VectorXcd out(state.total_dim() / d);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < state.total_dim(); ++i)
        if ((i / s) % d == level) out(k++) = state.amplitudes()(i);
    return PureState(std::move(labels), std::move(dims), std::move(out), state.is_normalized());
}

} // namespace wdistill
