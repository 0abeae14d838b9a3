#pragma once

#include <cstdint>
#include <random>

namespace wdistill {

// Seedable uniform source used everywhere randomness enters.
//
// The [0,1) mapping takes the top 53 bits of raw mt19937_64 output instead of
// going through std::uniform_real_distribution, whose stream is not pinned by
// the standard. mt19937_64 itself is, so the full sequence is reproducible
// across standard libraries. Algorithm identifier: "mt19937_64/u53".
class UniformRng {
public:
    explicit UniformRng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(gen_() >> 11) * kInv53;
    }

    std::uint64_t next_u64() { return gen_(); }

    static constexpr const char* kAlgorithmId = "mt19937_64/u53";

private:
    static constexpr double kInv53 = 1.0 / 9007199254740992.0; // 2^-53
    std::mt19937_64 gen_;
};

} // namespace wdistill
