#pragma once

#include <cmath>
#include <cstdint>

namespace guidelab {

// Counter-based generator: every draw is a pure function of (seed, lane, t, j),
// so parallel loops can sample any coordinate independently of iteration order.
// The mixing function is the splitmix64 finalizer applied to key + (ctr+1)*GAMMA.
class CounterRng {
public:
    // Stream ids. Keeping them disjoint means e.g. the per-step noise sequence
    // is unchanged when extra fresh-noise draws are enabled.
    enum Lane : std::uint64_t {
        kInitState = 0,   // initial state x_N
        kStepNoise = 1,   // shared per-step z
        kFreshNoise = 2,  // independent second draw per step
        kScatter = 3,     // landscape / distribution sampling
    };

    explicit CounterRng(std::uint64_t seed) : key_(seed) {}

    std::uint64_t seed() const noexcept { return key_; }

    // Raw 64-bit output for counter (lane, t, j, sub). j is a flat index
    // (coordinate or sample id); sub selects within a Box-Muller pair.
    std::uint64_t bits(Lane lane, std::uint64_t t, std::uint64_t j, std::uint64_t sub) const {
        std::uint64_t ctr = (static_cast<std::uint64_t>(lane) << 57) | (t << 33) | (j << 1) | sub;
        return mix(key_ + (ctr + 1) * kGamma);
    }

    // Uniform in (0,1]: never 0, safe under log().
    double uniform_pos(Lane lane, std::uint64_t t, std::uint64_t j, std::uint64_t sub) const {
        return static_cast<double>((bits(lane, t, j, sub) >> 11) + 1) * 0x1p-53;
    }

    // Uniform in [0,1).
    double uniform(Lane lane, std::uint64_t t, std::uint64_t j, std::uint64_t sub) const {
        return static_cast<double>(bits(lane, t, j, sub) >> 11) * 0x1p-53;
    }

    // Standard normal via Box-Muller, cosine branch only: one draw consumes the
    // (j,0) and (j,1) counters and ignores the sine partner.
    double normal(Lane lane, std::uint64_t t, std::uint64_t j) const {
        double u1 = uniform_pos(lane, t, j, 0);
        double u2 = uniform(lane, t, j, 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
    static constexpr double kPi = 3.141592653589793238462643383279502884;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
};

}  // namespace guidelab
