#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "spikeforge/rng.hpp"

using namespace spikeforge;

TEST_CASE("rng: same seed reproduces the stream")
{
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: different seeds diverge")
{
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 100; ++i)
        if (a.next_u64() == b.next_u64()) ++same;
    CHECK(same == 0);
}

TEST_CASE("rng: uniform stays in [0,1) with plausible mean")
{
    Rng rng(7);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    // 5 sigma of the sample mean: 5 * sqrt(1/12) / sqrt(n) ~ 0.0046
    CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("rng: uniform_int covers all residues without bias artifacts")
{
    Rng rng(11);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        std::uint64_t v = rng.uniform_int(7);
        REQUIRE(v < 7);
        ++counts[static_cast<int>(v)];
    }
    // chi-square with 6 dof; 33.1 is far beyond the 0.999 quantile (22.5)
    double chi2 = 0.0;
    const double expect = n / 7.0;
    for (int c : counts) chi2 += (c - expect) * (c - expect) / expect;
    CHECK(chi2 < 33.1);
}

TEST_CASE("rng: normal has near-standard moments")
{
    Rng rng(3);
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = rng.normal();
        s1 += x;
        s2 += x * x;
    }
    double mean = s1 / n;
    double var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("rng: permutation is a bijection on 0..n-1")
{
    Rng rng(9);
    auto p = rng.permutation(257);
    REQUIRE(p.size() == 257);
    std::set<std::size_t> seen(p.begin(), p.end());
    CHECK(seen.size() == 257);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == 256);
}

TEST_CASE("rng: weighted_index respects the weights")
{
    Rng rng(5);
    auto cum = cumulative_weights({1.0, 0.0, 3.0});
    std::vector<int> counts(3, 0);
    const int n = 40000;
    for (int i = 0; i < n; ++i) ++counts[rng.weighted_index(cum)];
    CHECK(counts[1] == 0);
    CHECK(std::abs(counts[0] / double(n) - 0.25) < 0.02);
    CHECK(std::abs(counts[2] / double(n) - 0.75) < 0.02);
}

TEST_CASE("rng: weighted sampling rejects bad input")
{
    CHECK_THROWS_AS(cumulative_weights({1.0, -0.5}), std::invalid_argument);
    Rng rng(1);
    CHECK_THROWS_AS(rng.weighted_index({}), std::invalid_argument);
    CHECK_THROWS_AS(rng.weighted_index({0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("rng: derived streams look independent of the master stream")
{
    const std::uint64_t master = 1234;
    Rng base(master);
    Rng derived(Rng::derive_seed(master, 1));
    Rng derived2(Rng::derive_seed(master, 2));
    int same12 = 0, sameb1 = 0;
    for (int i = 0; i < 200; ++i) {
        std::uint64_t b = base.next_u64();
        std::uint64_t d1 = derived.next_u64();
        std::uint64_t d2 = derived2.next_u64();
        if (d1 == d2) ++same12;
        if (b == d1) ++sameb1;
    }
    CHECK(same12 == 0);
    CHECK(sameb1 == 0);
    CHECK(Rng::derive_seed(master, 1) != Rng::derive_seed(master, 2));
}

TEST_CASE("rng: fnv1a matches the published reference values")
{
    // Reference vectors for 64-bit FNV-1a.
    CHECK(fnv1a_hash("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a_hash("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a_hash("foobar") == 0x85944171f73967e8ULL);
    CHECK(fnv1a_hash("ab") != fnv1a_hash("ba"));
}

TEST_CASE("rng: bernoulli edge probabilities are exact")
{
    Rng rng(17);
    for (int i = 0; i < 100; ++i) {
        CHECK_FALSE(rng.bernoulli(0.0));
        CHECK(rng.bernoulli(1.0));
    }
}
