#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "wdistill/locc.hpp"

using namespace wdistill;

namespace {

const std::map<std::string, std::string> kOwners = {
    {"1", "Alice"}, {"2", "Bob"}, {"3", "Bob"}};

const WCoefficients kExample = WCoefficients::from_squares(0.5, 0.3, 0.2);
const CavityParams kCavity{1.0, 1.0, 1.0, 1, Frame::interaction};

} // namespace

TEST_CASE("session construction and registry") {
    LoccSession s(make_wprime(kExample), kOwners);
    CHECK(s.owner("1") == "Alice");
    CHECK(s.owner("2") == "Bob");
    CHECK(s.log().size() == 1); // init record
    CHECK(s.log().front().kind == "init");

    CHECK_THROWS_AS(LoccSession(make_wprime(kExample), {{"1", "Alice"}, {"2", "Bob"}}),
                    RegistryError);
    auto extra = kOwners;
    extra["ghost"] = "Bob";
    CHECK_THROWS_AS(LoccSession(make_wprime(kExample), extra), RegistryError);
}

TEST_CASE("ancillas belong to their creator") {
    LoccSession s(make_wprime(kExample), kOwners);
    s.add_ancilla("a", 2, 0, "Bob");
    CHECK(s.owner("a") == "Bob");
    CHECK(s.state().subsystem_count() == 4);
    CHECK_THROWS_AS(s.add_ancilla("a", 2, 0, "Bob"), RegistryError);
}

TEST_CASE("co-located gates pass, cross-site gates are rejected") {
    LoccSession s(make_wprime(kExample), kOwners);
    s.add_ancilla("a", 2, 0, "Bob");
    s.local_apply(build_u1(kExample), "3", "a"); // both at Bob
    CHECK(s.log().back().kind == "apply");
    CHECK(s.log().back().location == "Bob");

    for (int k = 0; k < 20; ++k)
        CHECK_THROWS_AS(s.local_apply(JointUnitary::identity(), "1", "2"), LocalityError);
}

TEST_CASE("transfer updates the registry and is single-shot") {
    LoccSession s(make_wprime(kExample), kOwners);
    CHECK_THROWS_AS(s.transfer_particle("1", "Bob", "Cliff"), RegistryError);
    s.transfer_particle("2", "Bob", "Cliff");
    CHECK(s.owner("2") == "Cliff");
    CHECK_THROWS_AS(s.transfer_particle("2", "Bob", "Cliff"), RegistryError);

    // after the move, 2 and 3 no longer share a site
    CHECK_THROWS_AS(s.local_apply(JointUnitary::identity(), "2", "3"), LocalityError);
}

TEST_CASE("measurement plus broadcast appends two events") {
    LoccSession s(make_wprime(kExample), kOwners);
    s.add_ancilla("a", 2, 0, "Bob");
    const std::size_t before = s.log().size();
    UniformRng rng(5);
    const int outcome = s.local_measure("a", rng);
    s.broadcast("Bob", "anc=" + std::to_string(outcome));
    CHECK(s.log().size() == before + 2);
    CHECK(outcome == 0); // the ancilla is still untouched
}

TEST_CASE("protocol runs stay local and finish at three sites on success") {
    UniformRng rng(42);
    int w_seen = 0;
    for (int k = 0; k < 40; ++k) {
        const SessionRun run = run_protocol1_session(kExample, rng);
        if (run.result == Classification::W_SUCCESS) {
            ++w_seen;
            CHECK(run.session.owner("1") == "Alice");
            CHECK(run.session.owner("2") == "Bob");
            CHECK(run.session.owner("3") == "Cliff");
        }
    }
    CHECK(w_seen > 0);
}

TEST_CASE("second protocol sessions cover all classifications") {
    std::set<Classification> seen;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        UniformRng rng(seed);
        seen.insert(run_protocol2_session(kExample, rng).result);
    }
    CHECK(seen.count(Classification::W_SUCCESS) == 1);
    CHECK(seen.count(Classification::BELL_SUCCESS) == 1);
    CHECK(seen.count(Classification::FAILURE) == 1);

    // the direct Bell path needs no second ancilla
    const WCoefficients ab = WCoefficients::from_squares(0.4, 0.4, 0.2);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        UniformRng rng(seed);
        const SessionRun run = run_protocol2_session(ab, rng);
        if (run.result == Classification::BELL_SUCCESS)
            CHECK(!run.session.state().has_label("a2"));
    }
}

TEST_CASE("cavity sessions run at Bob's site") {
    UniformRng rng(7);
    for (int k = 0; k < 20; ++k) {
        const SessionRun run = run_cavity_session(kExample, kCavity, rng);
        CHECK((run.result == Classification::W_SUCCESS ||
               run.result == Classification::FAILURE));
        if (run.result == Classification::W_SUCCESS)
            CHECK(run.session.owner("3") == "Cliff");
    }
}

TEST_CASE("log replay reproduces the final state") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 11ULL, 19ULL}) {
        UniformRng rng(seed);
        const SessionRun run = run_protocol2_session(kExample, rng);
        const auto replayed = replay_session_log(run.session.serialize_log());
        REQUIRE(replayed.final_state_deviation);
        CHECK(*replayed.final_state_deviation < 1e-12);
        CHECK(replayed.session.registry() == run.session.registry());
    }

    UniformRng rng(23);
    const SessionRun cavity_run = run_cavity_session(kExample, kCavity, rng);
    const auto replayed = replay_session_log(cavity_run.session.serialize_log());
    REQUIRE(replayed.final_state_deviation);
    CHECK(*replayed.final_state_deviation < 1e-12);
}

TEST_CASE("malformed logs are rejected") {
    CHECK_THROWS_AS(replay_session_log(""), InputError);
    CHECK_THROWS_AS(replay_session_log("0\tBob\tapply\t{}"), InputError);

    UniformRng rng(3);
    const SessionRun run = run_protocol1_session(kExample, rng);
    std::string log = run.session.serialize_log();
    log.insert(log.find('\n') + 1, "9\tEve\tteleport\t{}\n");
    CHECK_THROWS_AS(replay_session_log(log), InputError);
}
