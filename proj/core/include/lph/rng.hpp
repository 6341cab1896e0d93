#ifndef LPH_RNG_HPP
#define LPH_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace lph {

/// Seeded random generator with explicitly coded variate transforms, so that
/// streams are reproducible across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Independent stream for (base, index), e.g. one per EM restart or
    /// bootstrap replicate.
    static Rng derived(std::uint64_t base, std::uint64_t index) {
        std::seed_seq seq{static_cast<std::uint32_t>(base),
                          static_cast<std::uint32_t>(base >> 32),
                          static_cast<std::uint32_t>(index),
                          static_cast<std::uint32_t>(index >> 32)};
        Rng r(0);
        r.gen_.seed(seq);
        return r;
    }

    std::uint64_t raw() { return gen_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    double normal(double mean = 0.0, double sd = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + sd * spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return mean + sd * r * std::cos(theta);
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace lph

#endif
