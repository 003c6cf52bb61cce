#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace xaibench {

// Derives a child seed from a base seed plus a labeled counter path.
// Same inputs give the same seed on every platform, so any task in the
// pipeline can be re-run in isolation (or on another worker) and draw
// the exact same random stream.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);
std::uint64_t derive_seed(std::uint64_t base, std::string_view label, std::uint64_t index);
std::uint64_t derive_seed(std::uint64_t base, std::string_view label, std::uint64_t a,
                          std::uint64_t b);

// mt19937_64 wrapper with hand-rolled distributions. std::normal_distribution
// and friends are implementation defined, which would make outputs differ
// across standard libraries; these transforms are pinned.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform();
    // Uniform in [lo, hi).
    double uniform(double lo, double hi);
    // Standard normal via Box-Muller; caches the second variate.
    double normal();
    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    void fill_uniform(double* out, std::size_t n, double lo, double hi);
    void fill_normal(double* out, std::size_t n, double mean, double sigma);

    // Uniform integer in [0, n). Rejection sampled, no modulo bias.
    std::uint64_t below(std::uint64_t n);

    // In-place Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace xaibench
