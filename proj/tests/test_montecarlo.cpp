#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "wdistill/montecarlo.hpp"

using namespace wdistill;

namespace {

const WCoefficients kExample = WCoefficients::from_squares(0.5, 0.3, 0.2);
const double kThird = 1.0 / std::sqrt(3.0);

} // namespace

TEST_CASE("identical inputs give identical reports") {
    const auto a = simulate_trials(ProtocolId::protocol2, kExample, 20000, 77);
    const auto b = simulate_trials(ProtocolId::protocol2, kExample, 20000, 77);
    CHECK(a.count_w == b.count_w);
    CHECK(a.count_bell == b.count_bell);
    CHECK(a.count_fail == b.count_fail);
    CHECK(a.rng_algorithm == std::string("mt19937_64/u53"));

    const auto c = simulate_trials(ProtocolId::protocol2, kExample, 20000, 78);
    CHECK(a.count_w != c.count_w); // different stream
}

TEST_CASE("certain outcomes produce degenerate counts") {
    const WCoefficients equal(kThird, kThird, kThird);
    const auto rep = simulate_trials(ProtocolId::protocol1, equal, 5000, 1);
    CHECK(rep.count_w == 5000);
    CHECK(!rep.z_w);   // p = 1: no defined z
    CHECK(!rep.z_fail);
    CHECK(compare_frequencies(rep).pass);
}

TEST_CASE("sampled frequencies track the heralding probability") {
    const auto rep = simulate_trials(ProtocolId::protocol1, kExample, 100000, 4242);
    CHECK(std::abs(rep.freq_w - 0.6) < 0.0061967734); // 4*sqrt(0.24/1e5)
    CHECK(compare_frequencies(rep).pass);
}

TEST_CASE("three-way partition passes the z test") {
    const auto rep = simulate_trials(ProtocolId::protocol2, kExample, 100000, 4243);
    REQUIRE(rep.z_w);
    REQUIRE(rep.z_bell);
    REQUIRE(rep.z_fail);
    CHECK(std::abs(*rep.z_w) < 4.0);
    CHECK(std::abs(*rep.z_bell) < 4.0);
    CHECK(std::abs(*rep.z_fail) < 4.0);
    CHECK(rep.count_w + rep.count_bell + rep.count_fail == rep.n_trials);
}

TEST_CASE("cavity trials match the abstract law") {
    const auto rep = simulate_trials(ProtocolId::cavity, kExample, 100000, 4244);
    CHECK(std::abs(rep.freq_w - 0.6) < 0.0061967734);
    CHECK(rep.count_bell == 0);
    CHECK(compare_frequencies(rep).pass);
}

TEST_CASE("exact counts give zero z-scores") {
    const auto rep = report_from_counts(ProtocolId::protocol2, kExample, 60000, 20000, 20000, 0);
    CHECK(*rep.z_w == doctest::Approx(0.0));
    CHECK(*rep.z_bell == doctest::Approx(0.0));
    CHECK(*rep.z_fail == doctest::Approx(0.0));
    CHECK(compare_frequencies(rep).pass);
}

TEST_CASE("a z-score at the threshold fails the strict test") {
    const auto rep = report_from_counts(ProtocolId::protocol1, kExample, 61000, 0, 39000, 0);
    REQUIRE(rep.z_w);
    const double z = std::abs(*rep.z_w);
    CHECK(!compare_frequencies(rep, z).pass);          // boundary: |z| == threshold
    CHECK(compare_frequencies(rep, z + 1e-9).pass);    // just above passes
}

TEST_CASE("wildly off counts fail the default threshold") {
    const auto rep = report_from_counts(ProtocolId::protocol1, kExample, 70000, 0, 30000, 0);
    CHECK(!compare_frequencies(rep).pass);
}

TEST_CASE("false-positive rate stays near the normal-tail estimate") {
    int failures = 0;
    for (std::uint64_t seed = 9000; seed < 9100; ++seed)
        if (!compare_frequencies(simulate_trials(ProtocolId::protocol2, kExample, 10000, seed))
                 .pass)
            ++failures;
    CHECK(failures <= 1);
}

TEST_CASE("trial count validation") {
    CHECK_THROWS_AS(simulate_trials(ProtocolId::protocol1, kExample, 0, 1), InputError);
}
