#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "wdistill/protocols.hpp"
#include "wdistill/statevec.hpp"

using namespace wdistill;

namespace {

PureState random_state(int n_qubits, UniformRng& rng) {
    const Eigen::Index d = Eigen::Index(1) << n_qubits;
    Eigen::VectorXcd amps(d);
    for (Eigen::Index i = 0; i < d; ++i)
        amps(i) = Complex(rng.next_double() - 0.5, rng.next_double() - 0.5);
    amps /= amps.norm();
    std::vector<std::string> labels;
    std::vector<int> dims(static_cast<std::size_t>(n_qubits), 2);
    for (int q = 0; q < n_qubits; ++q) labels.push_back("q" + std::to_string(q));
    return PureState(labels, dims, amps);
}

JointUnitary random_unitary(UniformRng& rng) {
    Eigen::Matrix4cd m;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            m(r, c) = Complex(rng.next_double() - 0.5, rng.next_double() - 0.5);
    Eigen::HouseholderQR<Eigen::Matrix4cd> qr(m);
    return JointUnitary(Eigen::Matrix4cd(qr.householderQ()));
}

// protocol-1 pre-measurement state, assembled from raw engine calls
PureState protocol1_premeasure(const WCoefficients& coeffs) {
    PureState st = tensor(make_wprime(coeffs), qubit("a", 0));
    st = apply_joint_unitary(st, build_u1(coeffs), "3", "a");
    return apply_joint_unitary(st, build_u2(coeffs), "2", "a");
}

} // namespace

TEST_CASE("basis state construction") {
    const PureState s = make_basis_state({2, 2, 2}, {0, 0, 1});
    CHECK(s.amplitudes()(1) == Complex(1.0, 0.0));
    CHECK(s.amplitudes().cwiseAbs().sum() == doctest::Approx(1.0));
    CHECK(s.is_normalized());

    const PureState z = make_basis_state({2, 2, 2, 2}, {0, 0, 0, 0});
    CHECK(z.amplitudes()(0) == Complex(1.0, 0.0));

    CHECK_THROWS_AS(make_basis_state({2, 2}, {0, 2}), DimensionError);
    CHECK_THROWS_AS(make_basis_state({2, 2}, {0}), DimensionError);
}

TEST_CASE("tensor product ordering and labels") {
    const PureState s01 = tensor(qubit("x", 0), qubit("y", 1));
    CHECK(s01.amplitudes()(1) == Complex(1.0, 0.0)); // |01>
    CHECK(s01.labels() == std::vector<std::string>{"x", "y"});

    const WCoefficients coeffs = WCoefficients::from_squares(0.5, 0.3, 0.2);
    const PureState joined = tensor(make_wprime(coeffs), qubit("a", 0));
    CHECK(joined.amplitudes()(2).real() == doctest::Approx(coeffs.a()).epsilon(1e-15));
    CHECK(joined.amplitudes()(4).real() == doctest::Approx(coeffs.b()).epsilon(1e-15));
    CHECK(joined.amplitudes()(8).real() == doctest::Approx(coeffs.c()).epsilon(1e-15));

    CHECK_THROWS_AS(tensor(qubit("x", 0), qubit("x", 0)), LabelError);
}

TEST_CASE("tensor preserves norm for random states") {
    UniformRng rng(7);
    for (int k = 0; k < 50; ++k) {
        PureState s = random_state(2, rng);
        PureState t = random_state(2, rng);
        // relabel t to avoid collisions
        PureState t2({"r0", "r1"}, t.dims(), t.amplitudes());
        CHECK(std::abs(tensor(s, t2).norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("joint unitary reproduces the first-stage evolution") {
    // a^2, b^2, c^2 = 0.5, 0.3, 0.2
    const WCoefficients coeffs = WCoefficients::from_squares(0.5, 0.3, 0.2);
    PureState st = tensor(make_wprime(coeffs), qubit("a", 0));
    st = apply_joint_unitary(st, build_u1(coeffs), "3", "a");

    // |001>|0>a and |100>|0>a both end at amplitude c, |010>|0>a keeps b, and
    // the removed weight sits on |000>|1>a with amplitude -sqrt(a^2-c^2).
    CHECK(st.amplitudes()(2).real() == doctest::Approx(0.44721359549995794).epsilon(1e-14));
    CHECK(st.amplitudes()(4).real() == doctest::Approx(0.54772255750516611).epsilon(1e-14));
    CHECK(st.amplitudes()(8).real() == doctest::Approx(0.44721359549995794).epsilon(1e-14));
    CHECK(st.amplitudes()(1).real() == doctest::Approx(-0.54772255750516611).epsilon(1e-14));
    CHECK(std::abs(st.norm() - 1.0) < 1e-12);
}

TEST_CASE("identity leaves states unchanged") {
    UniformRng rng(11);
    const PureState s = random_state(3, rng);
    const PureState t = apply_joint_unitary(s, JointUnitary::identity(), "q0", "q2");
    CHECK((t.amplitudes() - s.amplitudes()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("joint unitary argument validation") {
    UniformRng rng(13);
    const PureState s = random_state(2, rng);
    CHECK_THROWS_AS(apply_joint_unitary(s, JointUnitary::identity(), "q0", "q0"), LabelError);
    CHECK_THROWS_AS(apply_joint_unitary(s, JointUnitary::identity(), "q0", "zz"), LabelError);

    const PureState fock = tensor(qubit("q", 0), PureState::basis({"c"}, {3}, {0}));
    CHECK_THROWS_AS(apply_joint_unitary(fock, JointUnitary::identity(), "q", "c"),
                    DimensionError);
}

TEST_CASE("norm preservation under random unitaries") {
    UniformRng rng(17);
    for (int k = 0; k < 100; ++k) {
        const PureState s = random_state(3, rng);
        const PureState t = apply_joint_unitary(s, random_unitary(rng), "q0", "q2");
        CHECK(std::abs(t.norm() - s.norm()) < 1e-12);
    }
}

TEST_CASE("unitarity is enforced at construction") {
    Eigen::Matrix4cd bad = Eigen::Matrix4cd::Identity();
    bad(1, 1) = 0.9;
    CHECK_THROWS_AS(JointUnitary{bad}, InputError);
    CHECK(JointUnitary::identity().unitarity_defect() == 0.0);
}

TEST_CASE("measurement branch probabilities") {
    const WCoefficients coeffs = WCoefficients::from_squares(0.5, 0.3, 0.2);
    const auto res = measure_subsystem(protocol1_premeasure(coeffs), "a");
    REQUIRE(res.branches.size() == 2);
    CHECK(res.branches[0].probability == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(res.branches[1].probability == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(res.branches[0].post_state);
    CHECK(std::abs(res.branches[0].post_state->norm() - 1.0) < 1e-12);
}

TEST_CASE("measuring a basis state yields one certain branch") {
    const PureState s = make_basis_state({2, 2}, {1, 0});
    const auto res = measure_subsystem(s, "q0");
    CHECK(res.branches[0].probability == 0.0);
    CHECK(!res.branches[0].post_state); // zero-probability branch keeps its slot
    CHECK(res.branches[1].probability == doctest::Approx(1.0));
}

TEST_CASE("measurement completeness over random states") {
    UniformRng rng(23);
    for (int k = 0; k < 100; ++k) {
        const PureState s = random_state(4, rng);
        const auto res = measure_subsystem(s, "q1");
        double total = 0.0;
        for (const auto& br : res.branches) total += br.probability;
        CHECK(std::abs(total - 1.0) < 1e-9);
    }
}

TEST_CASE("sampling a definite state is deterministic") {
    UniformRng rng(29);
    const PureState s = qubit("q", 1);
    for (int k = 0; k < 10; ++k) CHECK(sample_measurement(s, "q", rng) == 1);
}

TEST_CASE("sampling matches probabilities for an equal superposition") {
    Eigen::VectorXcd amps(2);
    amps << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    const PureState s({"q"}, {2}, amps);
    UniformRng rng(31);
    const int n = 1000000;
    int zeros = 0;
    for (int k = 0; k < n; ++k)
        if (sample_measurement(s, "q", rng) == 0) ++zeros;
    const double freq = static_cast<double>(zeros) / n;
    CHECK(std::abs(freq - 0.5) < 4.0 * 0.0005); // 4 sigma, sigma = sqrt(0.25/1e6)
}

TEST_CASE("sampling matches the heralded branch weight") {
    const WCoefficients coeffs = WCoefficients::from_squares(0.5, 0.3, 0.2);
    const PureState st = protocol1_premeasure(coeffs);
    UniformRng rng(37);
    const int n = 100000;
    int success = 0;
    for (int k = 0; k < n; ++k)
        if (sample_measurement(st, "a", rng) == 0) ++success;
    const double freq = static_cast<double>(success) / n;
    CHECK(std::abs(freq - 0.6) < 0.0061967734); // 4*sqrt(0.24/1e5)
}

TEST_CASE("fidelity basics") {
    UniformRng rng(41);
    const PureState s = random_state(3, rng);
    CHECK(fidelity(s, s) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fidelity(qubit("q", 0), qubit("q", 1)) == 0.0);

    const PureState t = random_state(3, rng);
    CHECK(fidelity(s, t) == doctest::Approx(fidelity(t, s)).epsilon(1e-12));

    CHECK_THROWS_AS(fidelity(qubit("q", 0), random_state(2, rng)), DimensionError);
}

TEST_CASE("partial trace marginals") {
    // Bell pair: one-qubit marginal is maximally mixed
    Eigen::VectorXcd bell(4);
    bell << 1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0);
    const PureState pair({"x", "y"}, {2, 2}, bell);
    CHECK(partial_trace(pair, {"x"}).purity() == doctest::Approx(0.5).epsilon(1e-12));

    // product state: pure marginal
    const PureState prod = tensor(qubit("x", 0), qubit("y", 1));
    CHECK(partial_trace(prod, {"y"}).purity() == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(partial_trace(pair, {"zz"}), LabelError);
    CHECK_THROWS_AS(partial_trace(pair, {}), LabelError);
}

TEST_CASE("purity detects product bipartitions") {
    UniformRng rng(43);
    for (int k = 0; k < 20; ++k) {
        const PureState left = random_state(1, rng);
        PureState right = random_state(2, rng);
        right = PureState({"r0", "r1"}, right.dims(), right.amplitudes());
        const PureState prod = tensor(left, right);
        CHECK(partial_trace(prod, {"q0"}).purity() == doctest::Approx(1.0).epsilon(1e-9));
    }
    // an entangled state is not product across the cut
    Eigen::VectorXcd bell(4);
    bell << 1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0);
    const PureState pair({"x", "y"}, {2, 2}, bell);
    CHECK(partial_trace(pair, {"x"}).purity() < 1.0 - 1e-9);
}

TEST_CASE("concurrence of reference states") {
    Eigen::VectorXcd singlet(4);
    singlet << 0.0, -1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
    const PureState s({"x", "y"}, {2, 2}, singlet);
    CHECK(concurrence(partial_trace(s, {"x", "y"})) == doctest::Approx(1.0).epsilon(1e-12));

    const PureState prod = tensor(qubit("x", 0), qubit("y", 0));
    CHECK(concurrence(partial_trace(prod, {"x", "y"})) == doctest::Approx(0.0).epsilon(1e-12));

    // pure state alpha|10> - beta|01> has concurrence 2*alpha*beta
    const double alpha = 0.5, beta = 0.86602540378443865;
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(4);
    amps(2) = alpha;
    amps(1) = -beta;
    const PureState g({"x", "y"}, {2, 2}, amps);
    CHECK(concurrence(partial_trace(g, {"x", "y"})) ==
          doctest::Approx(0.86602540378443865).epsilon(1e-12));

    CHECK_THROWS_AS(concurrence(partial_trace(qubit("q", 0), {"q"})), DimensionError);
}

TEST_CASE("dropping a collapsed subsystem") {
    const WCoefficients coeffs = WCoefficients::from_squares(0.5, 0.3, 0.2);
    const auto res = measure_subsystem(protocol1_premeasure(coeffs), "a");
    const PureState reduced = drop_collapsed(*res.branches[0].post_state, "a");
    CHECK(reduced.subsystem_count() == 3);
    CHECK(reduced.labels() == std::vector<std::string>{"1", "2", "3"});
    CHECK(std::abs(reduced.norm() - 1.0) < 1e-12);

    // a subsystem in superposition cannot be dropped
    Eigen::VectorXcd plus(2);
    plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    const PureState sup = tensor(PureState({"p"}, {2}, plus), qubit("q", 0));
    CHECK_THROWS_AS(drop_collapsed(sup, "p"), InputError);
}

TEST_CASE("density matrix validation") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(0, 0) = 1.5;
    m(1, 1) = -0.5;
    CHECK_THROWS_AS(DensityMatrix(m, {2}), InputError);

    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
    h(0, 1) = Complex(0.0, 1.0);
    h(1, 0) = Complex(0.0, 1.0); // not Hermitian
    h(0, 0) = 0.5;
    h(1, 1) = 0.5;
    CHECK_THROWS_AS(DensityMatrix(h, {2}), InputError);
}
