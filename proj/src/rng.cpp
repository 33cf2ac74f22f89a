#include "sbt/rng.hpp"

#include "sbt/constants.hpp"
#include "sbt/errors.hpp"

#include <cmath>

namespace sbt {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) noexcept
{
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

// log(k!) for the PTRD acceptance test; exact table below 10, Stirling
// with correction terms above.
double log_factorial(std::uint64_t k) noexcept
{
    static const double table[10] = {
        0.0, 0.0, 0.6931471805599453, 1.791759469228055, 3.1780538303479458,
        4.787491742782046, 6.579251212010101, 8.525161361065415,
        10.60460290274525, 12.801827480081469};
    if (k < 10)
        return table[k];
    const double x = static_cast<double>(k) + 1.0;
    return (x - 0.5) * std::log(x) - x + 0.9189385332046727
        + 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x * x);
}

} // namespace

SplitRng::SplitRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : seed_(seed), stream_(stream), counter_(0),
      key_(mix64(seed + kGolden * (stream + 1)))
{
}

std::uint64_t SplitRng::next_u64() noexcept
{
    counter_ += kGolden;
    return mix64(counter_ ^ key_);
}

double SplitRng::next_double() noexcept
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SplitRng::normal() noexcept
{
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0)
        u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::uint64_t SplitRng::poisson(double mean)
{
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw DomainError("poisson: mean must be finite and non-negative");
    if (mean == 0.0)
        return 0;

    if (mean < 30.0) {
        // Multiplicative inversion.
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double product = next_double();
        while (product > limit) {
            ++k;
            product *= next_double();
        }
        return k;
    }

    // PTRS: transformed rejection with a squeeze (Hoermann 1993).
    const double smu = std::sqrt(mean);
    const double log_mu = std::log(mean);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);

    for (;;) {
        const double u = next_double() - 0.5;
        const double v = next_double();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r)
            return static_cast<std::uint64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us))
            continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b)
            <= k * log_mu - mean - log_factorial(static_cast<std::uint64_t>(k)))
            return static_cast<std::uint64_t>(k);
    }
}

} // namespace sbt
