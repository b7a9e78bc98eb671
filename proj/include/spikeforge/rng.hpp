#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace spikeforge {

/// Portable xoshiro256++ generator. All stochastic steps in the library draw
/// from this so that fixtures and trained models are bit-identical across
/// platforms; std::mt19937 distributions are implementation-defined and are
/// deliberately not used.
class Rng {
public:
    explicit Rng(std::uint64_t seed) { reseed(seed); }

    /// Seeds the four state words from the sequence of a splitmix64 run.
    void reseed(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform double in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Uniform integer in [0, n). Uses rejection sampling so the result is
    /// unbiased and identical everywhere.
    std::uint64_t uniform_int(std::uint64_t n);

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller (the deterministic, portable choice).
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Index draw with probability proportional to weights[i]; weights need
    /// not be normalized. Weights must be non-negative with a positive sum.
    std::size_t weighted_index(const std::vector<double>& cumulative_weights);

    /// Fisher-Yates shuffle of indices 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

    /// Derives an independent stream for sub-tasks (per fold, per modality).
    /// Mixing is splitmix64-based so streams with different salts never
    /// collide in practice.
    static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt);

private:
    std::uint64_t state_[4];
    bool have_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

/// Builds the cumulative-sum table consumed by Rng::weighted_index.
std::vector<double> cumulative_weights(const std::vector<double>& weights);

/// 64-bit FNV-1a, used for order-independent seed salts (e.g. subject ids)
/// and config digests.
std::uint64_t fnv1a_hash(std::string_view bytes);

}  // namespace spikeforge
