#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>

namespace pcax {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

// Marsaglia-Tsang ziggurat tables for the standard normal (128 layers).
struct ZigguratTables {
    std::uint32_t kn[128];
    double wn[128];
    double fn[128];

    ZigguratTables() {
        const double m1 = 2147483648.0;
        double dn = 3.442619855899, tn = dn;
        const double vn = 9.91256303526217e-3;
        const double q = vn / std::exp(-0.5 * dn * dn);
        kn[0] = static_cast<std::uint32_t>((dn / q) * m1);
        kn[1] = 0;
        wn[0] = q / m1;
        wn[127] = dn / m1;
        fn[0] = 1.0;
        fn[127] = std::exp(-0.5 * dn * dn);
        for (int i = 126; i >= 1; --i) {
            dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
            kn[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
            tn = dn;
            fn[i] = std::exp(-0.5 * dn * dn);
            wn[i] = dn / m1;
        }
    }
};

inline const ZigguratTables ziggurat_tables{};

}  // namespace detail

// xoshiro256++ with ziggurat normals. Deterministic independent substream
// per (seed, stream) pair, so path-level parallel runs do not depend on
// scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t sm = seed;
        const std::uint64_t a = detail::splitmix64(sm);
        sm = a ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
        for (auto& w : s_) w = detail::splitmix64(sm);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    std::uint64_t next() {
        const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl(s_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1).
    double uniform01() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform01()) / rate; }

    /// Standard normal via the 128-layer ziggurat.
    double normal() {
        const auto& zt = detail::ziggurat_tables;
        for (;;) {
            const auto hz = next32();
            const std::uint32_t iz = static_cast<std::uint32_t>(hz) & 127u;
            const std::uint32_t az =
                hz < 0 ? static_cast<std::uint32_t>(-static_cast<std::int64_t>(hz))
                       : static_cast<std::uint32_t>(hz);
            if (az < zt.kn[iz]) return hz * zt.wn[iz];

            if (iz == 0) {
                // tail beyond r = 3.4426...
                constexpr double r = 3.442619855899;
                double x, y;
                do {
                    x = -std::log(uniform01()) * (1.0 / r);
                    y = -std::log(uniform01());
                } while (y + y < x * x);
                return hz > 0 ? r + x : -r - x;
            }
            const double x = hz * zt.wn[iz];
            if (zt.fn[iz] + uniform01() * (zt.fn[iz - 1] - zt.fn[iz]) <
                std::exp(-0.5 * x * x))
                return x;
            // fall through and redraw
        }
    }

private:
    // normals consume 32 bits per attempt; serve both halves of one draw
    std::int32_t next32() {
        if (have_half_) {
            have_half_ = false;
            return static_cast<std::int32_t>(half_);
        }
        const std::uint64_t u = next();
        half_ = static_cast<std::uint32_t>(u);
        have_half_ = true;
        return static_cast<std::int32_t>(u >> 32);
    }

    std::uint64_t s_[4];
    std::uint32_t half_ = 0;
    bool have_half_ = false;
};

}  // namespace pcax
