#include "spikeforge/rng.hpp"

#include <cmath>
#include <iostream>
#include <mutex>
#include <stdexcept>

#include "spikeforge/types.hpp"

namespace spikeforge {

namespace {

std::uint64_t splitmix64(std::uint64_t& x)
{
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

}  // namespace

void Rng::reseed(std::uint64_t seed)
{
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
    have_cached_normal_ = false;
}

std::uint64_t Rng::next_u64()
{
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform()
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_int(std::uint64_t n)
{
    if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % n;
}

double Rng::normal()
{
    if (have_cached_normal_) {
        have_cached_normal_ = false;
        return cached_normal_;
    }
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_normal_ = r * std::sin(theta);
    have_cached_normal_ = true;
    return r * std::cos(theta);
}

std::size_t Rng::weighted_index(const std::vector<double>& cumulative)
{
    if (cumulative.empty() || cumulative.back() <= 0.0)
        throw std::invalid_argument("weighted_index: weights must have positive sum");
    const double u = uniform() * cumulative.back();
    std::size_t lo = 0, hi = cumulative.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (cumulative[mid] <= u)
            lo = mid + 1;
        else
            hi = mid;
    }
    return lo;
}

std::vector<std::size_t> Rng::permutation(std::size_t n)
{
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = uniform_int(i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

std::uint64_t Rng::derive_seed(std::uint64_t master, std::uint64_t salt)
{
    std::uint64_t s = master ^ (0x6a09e667f3bcc909ULL + salt * 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}

std::vector<double> cumulative_weights(const std::vector<double>& weights)
{
    std::vector<double> cum(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] < 0.0)
            throw std::invalid_argument("cumulative_weights: negative weight");
        acc += weights[i];
        cum[i] = acc;
    }
    return cum;
}

std::uint64_t fnv1a_hash(std::string_view bytes)
{
    std::uint64_t h = 14695981039346656037ULL;
    for (const char ch : bytes) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ULL;
    }
    return h;
}

Modality modality_from_string(const std::string& s)
{
    if (s == "sEMG") return Modality::kSemg;
    if (s == "Angle") return Modality::kAngle;
    if (s == "Energy") return Modality::kEnergy;
    throw std::invalid_argument("unknown modality: " + s);
}

namespace {
std::function<void(const std::string&)> g_warning_sink;
std::mutex g_warning_mutex;
}  // namespace

void log_warning(const std::string& message)
{
    std::lock_guard<std::mutex> lock(g_warning_mutex);
    if (g_warning_sink)
        g_warning_sink(message);
    else
        std::cerr << "[spikeforge] warning: " << message << "\n";
}

void set_warning_sink(std::function<void(const std::string&)> sink)
{
    std::lock_guard<std::mutex> lock(g_warning_mutex);
    g_warning_sink = std::move(sink);
}

}  // namespace spikeforge
