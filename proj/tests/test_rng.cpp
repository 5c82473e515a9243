#include <doctest.h>

#include <cmath>

#include "langsim/rng.hpp"

using namespace langsim;

TEST_CASE("streams replay bit-for-bit from their key") {
    RngStream a(42, 7, 1000, 3);
    std::vector<uint64_t> first;
    for (int i = 0; i < 64; ++i) first.push_back(a.next_u64());

    RngStream b(42, 7, 1000, 3);
    for (int i = 0; i < 64; ++i) CHECK(b.next_u64() == first[i]);
}

TEST_CASE("distinct keys give distinct draws") {
    RngStream base(42, 7, 1000, 3);
    RngStream traj(42, 8, 1000, 3);
    RngStream step(42, 7, 1001, 3);
    RngStream sub(42, 7, 1000, 4);
    RngStream seed(43, 7, 1000, 3);
    uint64_t v = base.next_u64();
    CHECK(traj.next_u64() != v);
    CHECK(step.next_u64() != v);
    CHECK(sub.next_u64() != v);
    CHECK(seed.next_u64() != v);
}

TEST_CASE("uniform stays inside (0,1)") {
    RngStream r(1, 0, 0);
    for (int i = 0; i < 100000; ++i) {
        double u = r.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("normal moments") {
    RngStream r(5, 0, 0);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = r.normal();
        s += x;
        s2 += x * x;
    }
    double mean = s / n;
    double var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("uniform_below is in range and unbiased-ish") {
    RngStream r(9, 0, 0);
    std::vector<int> counts(10, 0);
    for (int i = 0; i < 100000; ++i) ++counts[r.uniform_below(10)];
    for (int c : counts) {
        CHECK(c > 9000);
        CHECK(c < 11000);
    }
}
