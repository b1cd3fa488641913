#include <doctest.h>

#include <cmath>
#include <set>

#include "sop/rng.hpp"

using sop::Philox;

TEST_CASE("philox4x32-10 known-answer vectors") {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(sop::philox4x32_10({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(sop::philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(sop::philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and substreams differ") {
    Philox a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Philox s0 = Philox(42).substream(0), s1 = Philox(42).substream(1);
    int same = 0;
    for (int i = 0; i < 100; ++i) same += s0.next_u64() == s1.next_u64();
    CHECK(same == 0);
}

TEST_CASE("uniform and below stay in range") {
    Philox r(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(r.below(7) < 7u);
        const auto k = r.integer(-3, 3);
        CHECK(k >= -3);
        CHECK(k <= 3);
    }
}

TEST_CASE("uniform mean and normal moments") {
    Philox r(9);
    const int n = 200000;
    double su = 0, sn = 0, sn2 = 0;
    for (int i = 0; i < n; ++i) {
        su += r.uniform();
        const double z = r.normal();
        sn += z;
        sn2 += z * z;
    }
    // Tolerances are about 5 standard errors.
    CHECK(std::fabs(su / n - 0.5) < 5 * 0.2887 / std::sqrt(n));
    CHECK(std::fabs(sn / n) < 5.0 / std::sqrt(n));
    CHECK(std::fabs(sn2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
}

TEST_CASE("derive_seed is deterministic and spreads indices") {
    CHECK(sop::derive_seed(1, 2) == sop::derive_seed(1, 2));
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(sop::derive_seed(5, i));
    CHECK(seen.size() == 1000);
    CHECK(sop::derive_seed(5, 0) != sop::derive_seed(6, 0));
}
