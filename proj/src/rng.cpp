#include "xaibench/rng.hpp"

#include <cmath>

namespace xaibench {

namespace {

// SplitMix64 finalizer, used as the mixing step for seed derivation.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t mix_string(std::uint64_t state, std::string_view s) {
    // FNV-1a over the label, folded into the running state.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(state ^ h);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
    return mix_string(mix64(base), label);
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view label, std::uint64_t index) {
    return mix64(derive_seed(base, label) ^ index);
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view label, std::uint64_t a,
                          std::uint64_t b) {
    return mix64(mix64(derive_seed(base, label) ^ a) ^ b);
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

void Rng::fill_uniform(double* out, std::size_t n, double lo, double hi) {
    for (std::size_t i = 0; i < n; ++i) out[i] = uniform(lo, hi);
}

void Rng::fill_normal(double* out, std::size_t n, double mean, double sigma) {
    for (std::size_t i = 0; i < n; ++i) out[i] = mean + sigma * normal();
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) return 0;
    std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % n;
}

} // namespace xaibench
