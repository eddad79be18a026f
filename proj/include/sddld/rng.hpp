#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace sddld {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// A (seed, stream) pair addresses an independent substream; draws within a
// substream are indexed by a 64-bit counter. Identical (seed, stream, counter)
// always produces the same bits, so parallel and serial runs agree exactly.
class CounterRng {
public:
    CounterRng() : CounterRng(0, 0) {}

    CounterRng(std::uint64_t seed, std::uint64_t stream) {
        const std::uint64_t k = splitmix(seed);
        key_[0] = static_cast<std::uint32_t>(k);
        key_[1] = static_cast<std::uint32_t>(k >> 32);
        stream_ = stream;
        counter_ = 0;
        buf_pos_ = 4;
        have_gauss_ = false;
        gauss_ = 0.0;
    }

    // Independent substream derived from this generator's seed material.
    CounterRng substream(std::uint64_t idx) const {
        CounterRng r;
        r.key_ = key_;
        r.stream_ = splitmix(stream_ ^ (0x9E3779B97F4A7C15ULL + idx));
        r.counter_ = 0;
        r.buf_pos_ = 4;
        r.have_gauss_ = false;
        r.gauss_ = 0.0;
        return r;
    }

    std::uint32_t next_u32() {
        if (buf_pos_ >= 4) {
            fill_block();
            buf_pos_ = 0;
        }
        return buf_[buf_pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, bound) by rejection (no modulo bias).
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

    // Standard normal via Box-Muller; explicit formulas keep the sequence
    // reproducible across standard libraries.
    double next_gaussian() {
        if (have_gauss_) {
            have_gauss_ = false;
            return gauss_;
        }
        double u1 = next_double();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        gauss_ = r * std::sin(a);
        have_gauss_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
        const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        hi = static_cast<std::uint32_t>(p >> 32);
        lo = static_cast<std::uint32_t>(p);
    }

    void fill_block() {
        std::uint32_t c0 = static_cast<std::uint32_t>(counter_);
        std::uint32_t c1 = static_cast<std::uint32_t>(counter_ >> 32);
        std::uint32_t c2 = static_cast<std::uint32_t>(stream_);
        std::uint32_t c3 = static_cast<std::uint32_t>(stream_ >> 32);
        std::uint32_t k0 = key_[0];
        std::uint32_t k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            std::uint32_t hi0, lo0, hi1, lo1;
            mulhilo(0xD2511F53u, c0, hi0, lo0);
            mulhilo(0xCD9E8D57u, c2, hi1, lo1);
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0; c1 = n1; c2 = n2; c3 = n3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        buf_ = {c0, c1, c2, c3};
        ++counter_;
    }

    std::array<std::uint32_t, 2> key_{};
    std::uint64_t stream_ = 0;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;
    bool have_gauss_ = false;
    double gauss_ = 0.0;
};

// Fixed purpose tags so unrelated consumers of one seed never collide.
namespace rng_stream {
inline constexpr std::uint64_t kMcSample   = 1;
inline constexpr std::uint64_t kSketch     = 2;
inline constexpr std::uint64_t kSparsify   = 3;
inline constexpr std::uint64_t kTree       = 4;
inline constexpr std::uint64_t kGenerate   = 5;
inline constexpr std::uint64_t kPowerIter  = 6;

inline std::uint64_t tagged(std::uint64_t purpose, std::uint64_t idx) {
    return (purpose << 48) ^ idx;
}
} // namespace rng_stream

} // namespace sddld
