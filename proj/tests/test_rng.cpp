#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "cass/rng.hpp"

using cass::Rng;

TEST_CASE("same seed reproduces the same sequence") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i)
        if (a.next_u64() == b.next_u64()) ++same;
    CHECK(same == 0);
}

TEST_CASE("uniform stays in [0,1) and has the right moments") {
    Rng r(7);
    const int n = 200000;
    double sum = 0, sumsq = 0;
    for (int i = 0; i < n; ++i) {
        double x = r.uniform();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
        sum += x;
        sumsq += x * x;
    }
    double mean = sum / n;
    double var = sumsq / n - mean * mean;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
    CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.03));
}

TEST_CASE("ranged uniform respects bounds") {
    Rng r(3);
    for (int i = 0; i < 10000; ++i) {
        double x = r.uniform(80.0, 90.0);
        REQUIRE(x >= 80.0);
        REQUIRE(x < 90.0);
    }
}

TEST_CASE("uniform_int covers all residues and stays in range") {
    Rng r(11);
    std::set<uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        uint64_t x = r.uniform_int(7);
        REQUIRE(x < 7);
        seen.insert(x);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("uniform_int of 1 is always zero") {
    Rng r(5);
    for (int i = 0; i < 100; ++i) CHECK(r.uniform_int(1) == 0);
}

TEST_CASE("normal has zero mean and unit variance") {
    Rng r(13);
    const int n = 200000;
    double sum = 0, sumsq = 0;
    for (int i = 0; i < n; ++i) {
        double x = r.normal();
        REQUIRE(std::isfinite(x));
        sum += x;
        sumsq += x * x;
    }
    double mean = sum / n;
    double var = sumsq / n - mean * mean;
    CHECK(mean == doctest::Approx(0.0).epsilon(1).scale(0.01));
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("split is deterministic and does not disturb the parent") {
    Rng parent(99);
    parent.next_u64();
    uint64_t before = parent.state();
    Rng c1 = parent.split(0);
    Rng c2 = parent.split(0);
    CHECK(parent.state() == before);
    CHECK(c1.next_u64() == c2.next_u64());
}

TEST_CASE("split streams are pairwise distinct and differ from the parent") {
    Rng parent(1234);
    std::vector<uint64_t> firsts;
    for (uint64_t s = 0; s < 16; ++s) firsts.push_back(parent.split(s).next_u64());
    Rng p2(1234);
    uint64_t parent_first = p2.next_u64();
    std::set<uint64_t> uniq(firsts.begin(), firsts.end());
    CHECK(uniq.size() == firsts.size());
    CHECK(uniq.count(parent_first) == 0);
}

TEST_CASE("state save and restore replays the stream") {
    Rng r(77);
    r.next_u64();
    uint64_t s = r.state();
    uint64_t a = r.next_u64();
    r.set_state(s);
    CHECK(r.next_u64() == a);
}
