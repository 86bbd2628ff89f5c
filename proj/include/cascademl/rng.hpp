#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "cascademl/matrix.hpp"

namespace cascademl {

/// SplitMix64 step: advances `state` by 0x9E3779B97F4A7C15 and returns the
/// mixed output. Used for seeding and for deriving independent child seeds.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Child seed for stream `stream` of `parent`. Stable across platforms, so a
/// candidate or fold seeded this way is independent of execution order.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) noexcept;

/// xoshiro256** generator, state filled from four SplitMix64 outputs of the
/// seed. Doubles use the top 53 bits: (next() >> 11) * 2^-53, in [0, 1).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t next() noexcept;

    /// Uniform in [0, 1).
    double uniform() noexcept;
    /// Uniform in (0, 1].
    double uniform_open_closed() noexcept { return 1.0 - uniform(); }
    /// Uniform in [lo, hi). Throws InvalidArgument unless lo < hi.
    double uniform(double lo, double hi);
    /// Unbiased integer in [0, bound) by rejection. bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    /// Fisher-Yates, iterating from the back.
    void shuffle(std::vector<std::size_t>& values);

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> s_{};
};

double rand_uniform(Rng& rng, double lo, double hi);

/// Row-major fill with U[lo, hi). lo == hi yields a constant matrix, which is
/// how zero-initialised networks are built.
Matrix rand_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi);

}  // namespace cascademl
