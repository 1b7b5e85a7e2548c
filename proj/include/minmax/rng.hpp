#pragma once

#include <array>
#include <cstdint>

namespace minmax {

/// Seedable xoshiro256** generator with Box-Muller normals.
///
/// Determinism contract:
///  - the state is expanded from the 64-bit seed with splitmix64;
///  - uniform() uses the top 53 bits of one next_u64() call;
///  - normal() draws two uniforms (u1, u2) per pair and returns
///    sqrt(-2 ln(1-u1)) * cos(2 pi u2) first, then caches the matching sin
///    value and returns it on the following call. Callers that need a fixed
///    number of normals per vector consume them in coordinate order.
///  - stream(seed, id) derives an independent generator from a key and a
///    stream index without touching any other generator's state.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    std::uint64_t next_u64();
    double uniform();
    double uniform(double lo, double hi);
    double normal();

    std::uint64_t seed() const noexcept { return seed_; }

    static Rng stream(std::uint64_t key, std::uint64_t id);
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b);

private:
    std::array<std::uint64_t, 4> s_{};
    std::uint64_t seed_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace minmax
