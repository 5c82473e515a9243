#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "langsim/vec.hpp"

namespace langsim {

// Philox 4x32-10 counter-based generator (Salmon et al., SC 2011).
// Every draw is a pure function of (seed, trajectory, step, substream, index),
// so replaying any sub-range of a simulation reproduces identical bits no
// matter how trajectories are distributed over workers.
namespace philox {

constexpr uint32_t kW32A = 0x9E3779B9u;
constexpr uint32_t kW32B = 0xBB67AE85u;
constexpr uint32_t kM4x32A = 0xD2511F53u;
constexpr uint32_t kM4x32B = 0xCD9E8D57u;

inline void mul_hi_lo(uint32_t a, uint32_t b, uint32_t& lo, uint32_t& hi) {
    uint64_t p = static_cast<uint64_t>(a) * b;
    lo = static_cast<uint32_t>(p);
    hi = static_cast<uint32_t>(p >> 32);
}

inline std::array<uint32_t, 4> block(uint64_t key64, std::array<uint32_t, 4> ctr) {
    uint32_t k0 = static_cast<uint32_t>(key64);
    uint32_t k1 = static_cast<uint32_t>(key64 >> 32);
    for (int round = 0; round < 10; ++round) {
        uint32_t lo0, hi0, lo1, hi1;
        mul_hi_lo(kM4x32A, ctr[0], lo0, hi0);
        mul_hi_lo(kM4x32B, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
        k0 += kW32A;
        k1 += kW32B;
    }
    return ctr;
}

}  // namespace philox

// One logical random stream, addressed by (seed, traj, step, substream).
class RngStream {
   public:
    RngStream(uint64_t seed, uint32_t traj, uint32_t step, uint32_t substream = 0)
        : seed_(seed), traj_(traj), step_(step), sub_(substream) {}

    uint32_t next_u32() {
        if (pos_ == 4) {
            buf_ = philox::block(seed_, {block_idx_++, traj_ ^ (step_ << 16 | step_ >> 16), step_, sub_});
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    uint64_t next_u64() {
        uint64_t lo = next_u32();
        uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform on (0,1): never returns 0, safe for log().
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    // Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    void fill_normal(double* out, int n) {
        for (int i = 0; i < n; ++i) out[i] = normal();
    }

    Vec normal_vec(int n) {
        Vec v(static_cast<std::size_t>(n));
        fill_normal(v.data(), n);
        return v;
    }

    // Unbiased integer in [0, bound) by rejection.
    uint32_t uniform_below(uint32_t bound) {
        uint32_t threshold = (0u - bound) % bound;
        for (;;) {
            uint32_t r = next_u32();
            if (r >= threshold) return r % bound;
        }
    }

   private:
    uint64_t seed_;
    uint32_t traj_, step_, sub_;
    uint32_t block_idx_ = 0;
    std::array<uint32_t, 4> buf_{};
    int pos_ = 4;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Substream tags keep independent purposes on disjoint counters.
namespace substream {
constexpr uint32_t kEmNoise = 0;
constexpr uint32_t kXiNoise = 1;
constexpr uint32_t kCoupleV = 2;
constexpr uint32_t kCoupleW = 3;
constexpr uint32_t kMinibatch = 4;
constexpr uint32_t kInit = 5;
constexpr uint32_t kProjection = 6;
constexpr uint32_t kProbe = 7;
}  // namespace substream

}  // namespace langsim
