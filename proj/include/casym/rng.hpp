#pragma once

#include <cstdint>

// Counter-based random numbers. Every draw is a pure function of
// (seed, stream, index, counter), so results do not depend on the order in
// which users or realizations are processed.

namespace casym {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

[[nodiscard]] inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

[[nodiscard]] inline constexpr std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b + 0x632BE59BD9B4E019ULL));
}

enum class Stream : std::uint64_t { init = 1, prejudice = 2, post = 3, users = 4, synthetic = 5 };

// Midpoint of a 32-bit cell: never 0, never 1.
[[nodiscard]] inline constexpr double unit_from_u32(std::uint32_t k) {
    return (static_cast<double>(k) + 0.5) * 0x1p-32;
}

[[nodiscard]] inline constexpr double unit_from_u64(std::uint64_t k) {
    return (static_cast<double>(k >> 12) + 0.5) * 0x1p-52;
}

// Sequential generator over one keyed stream; satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, Stream stream, std::uint64_t index)
        : key_(mix_key(mix_key(seed, static_cast<std::uint64_t>(stream)), index)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() { return splitmix64(key_ + (++counter_) * kGolden); }
    double uniform() { return unit_from_u64((*this)()); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

struct UserDraws {
    double exposure;
    double feedback;
};

// Key shared by all user draws of one step.
[[nodiscard]] inline constexpr std::uint64_t user_step_key(std::uint64_t seed, std::uint64_t step) {
    return mix_key(mix_key(seed, static_cast<std::uint64_t>(Stream::users)), step);
}

[[nodiscard]] inline constexpr UserDraws user_draws(std::uint64_t step_key, std::uint64_t user) {
    std::uint64_t h = splitmix64(step_key + (user + 1) * kGolden);
    return {unit_from_u32(static_cast<std::uint32_t>(h >> 32)),
            unit_from_u32(static_cast<std::uint32_t>(h))};
}

} // namespace casym
