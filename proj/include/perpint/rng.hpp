// Counter-based RNG (Philox 4x32-10). One stream per (trajectory,
// coordinate) pair, derived from the master seed, so ensembles are
// bitwise reproducible at any worker count.
#pragma once

#include <cmath>
#include <cstdint>

namespace perpint {

namespace philox_detail {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

struct Block {
    std::uint32_t v[4];
};

inline Block philox4x32_10(std::uint64_t counter, std::uint64_t stream,
                           std::uint64_t seed) {
    std::uint32_t c0 = static_cast<std::uint32_t>(counter);
    std::uint32_t c1 = static_cast<std::uint32_t>(counter >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(stream);
    std::uint32_t c3 = static_cast<std::uint32_t>(stream >> 32);
    std::uint32_t k0 = static_cast<std::uint32_t>(seed);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0;
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2;
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        const std::uint32_t n0 = hi1 ^ c1 ^ k0;
        const std::uint32_t n1 = lo1;
        const std::uint32_t n2 = hi0 ^ c3 ^ k1;
        const std::uint32_t n3 = lo0;
        c0 = n0; c1 = n1; c2 = n2; c3 = n3;
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return Block{{c0, c1, c2, c3}};
}

}  // namespace philox_detail

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {}

    std::uint32_t next_u32() {
        if (avail_ == 0) {
            block_ = philox_detail::philox4x32_10(counter_++, stream_, seed_);
            avail_ = 4;
        }
        return block_.v[4 - avail_--];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    // uniform in (0, 1), 53-bit resolution
    double uniform() {
        const double u = static_cast<double>(next_u64() >> 11) * 0x1p-53;
        return u == 0.0 ? 0x1p-54 : u;
    }

    // standard normal, Box-Muller (pairs cached within the stream)
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    philox_detail::Block block_{};
    int avail_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Stream-id layout: | context (24 bits) | trajectory (32 bits) | coordinate (8 bits) |
inline std::uint64_t make_stream(std::uint64_t context, std::uint64_t trajectory,
                                 std::uint64_t coordinate) {
    return (context << 40) | ((trajectory & 0xFFFFFFFFull) << 8) | (coordinate & 0xFFull);
}

}  // namespace perpint
