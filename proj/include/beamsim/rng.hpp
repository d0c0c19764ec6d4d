// SPDX-License-Identifier: Apache-2.0
//
// beamsim: mm-wave MIMO beam selection with in-band positioning

#ifndef BEAMSIM_RNG_H
#define BEAMSIM_RNG_H

#include <cmath>
#include <cstdint>

namespace beamsim {

// Self-contained splitmix64 generator with Box-Muller gaussians. Keeping the
// generator independent of the standard library distributions makes protocol
// runs bit-reproducible across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform on (0, 1]
    double uniform() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Stable seed derivation for independent streams (grid point, realization,
// protocol); mixing through splitmix keeps streams uncorrelated.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
    Rng mix(base ^ 0x5851f42d4c957f2dull);
    std::uint64_t s = mix.next();
    s ^= Rng(a + 0x9e3779b97f4a7c15ull).next();
    s = Rng(s).next();
    s ^= Rng(b + 0xda942042e4dd58b5ull).next();
    s = Rng(s).next();
    s ^= Rng(c + 0xca01f9dd43b4b9ull).next();
    return Rng(s).next();
}

} // namespace beamsim

#endif
