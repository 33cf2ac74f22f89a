#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sbt/constants.hpp"
#include "sbt/errors.hpp"
#include "sbt/fit.hpp"
#include "sbt/inference.hpp"
#include "sbt/rng.hpp"

#include <cmath>
#include <vector>

using namespace sbt;

namespace {

DeviceModel paper_device()
{
    DeviceModel device;
    device.optical = {196.78e12, 1585e6, 480e6, 4.8e9};
    device.mechanical = {1.085e9, 6e6};
    device.g0_hz = 220e3;
    return device;
}

double lorentz(double x, double fwhm)
{
    const double h = 0.5 * fwhm;
    return h * h / (x * x + h * h);
}

} // namespace

TEST_CASE("occupancy estimate inverts noise-free counts exactly")
{
    const double amp = 100.0;
    const double dark = 11.0;
    const double t = 100.0;
    CountsWithExposure blue{(amp * 1.66 + dark) * t, t};
    CountsWithExposure red{(amp * 0.66 + dark) * t, t};
    const auto est = estimate_occupancy(blue, red, dark, 0.95);
    CHECK(est.n_b == doctest::Approx(0.66).epsilon(1e-9));
    CHECK_FALSE(est.boundary);
    CHECK(est.ci_low < est.n_b);
    CHECK(est.ci_high > est.n_b);
    CHECK(est.ci_low > 0.0);
    CHECK(est.ci_high < 1.0);
}

TEST_CASE("red channel at the dark level clips to the physical boundary")
{
    const double t = 50.0;
    CountsWithExposure blue{(80.0 + 11.0) * t, t};
    CountsWithExposure red{11.0 * t, t};
    const auto est = estimate_occupancy(blue, red, 11.0, 0.95);
    CHECK(est.n_b == 0.0);
    CHECK(est.boundary);
    CHECK(est.ci_low == 0.0);
    CHECK(est.ci_high > 0.0);
}

TEST_CASE("inverted asymmetry yields an unbounded estimate, flagged")
{
    CountsWithExposure blue{500.0, 10.0};
    CountsWithExposure red{600.0, 10.0};
    const auto est = estimate_occupancy(blue, red, 0.0, 0.95);
    CHECK(est.boundary);
    CHECK_FALSE(std::isfinite(est.n_b));
}

TEST_CASE("occupancy estimate input validation")
{
    CountsWithExposure ok{100.0, 1.0};
    CHECK_THROWS_AS(estimate_occupancy({100.0, 0.0}, ok, 0.0, 0.95), DomainError);
    CHECK_THROWS_AS(estimate_occupancy(ok, ok, -1.0, 0.95), DomainError);
    CHECK_THROWS_AS(estimate_occupancy(ok, ok, 0.0, 1.5), DomainError);
    CHECK_THROWS_AS(estimate_occupancy({-1.0, 1.0}, ok, 0.0, 0.95), DomainError);
}

TEST_CASE("profile-likelihood intervals cover across the occupancy range")
{
    const double amp = 25.0;
    const double dark = 11.0;
    const double t = 100.0;
    for (double n_true : {0.1, 0.66, 5.0, 80.0}) {
        SplitRng rng(2024, static_cast<std::uint64_t>(10.0 * n_true));
        const double mu_b = (amp * (n_true + 1.0) + dark) * t;
        const double mu_r = (amp * n_true + dark) * t;
        int covered = 0;
        const int reps = 500;
        for (int i = 0; i < reps; ++i) {
            CountsWithExposure blue{static_cast<double>(rng.poisson(mu_b)), t};
            CountsWithExposure red{static_cast<double>(rng.poisson(mu_r)), t};
            const auto est = estimate_occupancy(blue, red, dark, 0.95);
            if (est.ci_low <= n_true && n_true <= est.ci_high)
                ++covered;
        }
        const double coverage = covered / static_cast<double>(reps);
        INFO("n_true = ", n_true, ", coverage = ", coverage);
        CHECK(coverage > 0.91);
        CHECK(coverage < 0.99);
    }
}

TEST_CASE("profile and bootstrap intervals agree on paper-like data")
{
    const double dark = 11.0;
    const double t = 100.0;
    CountsWithExposure blue{(82.0 + dark) * t, t};
    CountsWithExposure red{(32.6 + dark) * t, t};
    const auto profile = estimate_occupancy(blue, red, dark, 0.95,
                                            IntervalMethod::ProfileLikelihood);
    const auto boot = estimate_occupancy(blue, red, dark, 0.95,
                                         IntervalMethod::Bootstrap, 7);
    CHECK(profile.n_b == doctest::Approx(boot.n_b).epsilon(1e-9));
    const double width_p = profile.ci_high - profile.ci_low;
    const double width_b = boot.ci_high - boot.ci_low;
    CHECK(std::abs(width_p - width_b) < 0.15 * width_p);
    CHECK(std::abs(profile.ci_low - boot.ci_low) < 0.15 * width_p);
    CHECK(std::abs(profile.ci_high - boot.ci_high) < 0.15 * width_p);
}

TEST_CASE("power-law fit recovers exact exponents")
{
    std::vector<double> powers{1e-8, 3e-8, 1e-7, 3e-7, 1e-6, 3e-6, 1e-5};
    std::vector<double> exact14(powers.size());
    std::vector<double> linear(powers.size());
    for (std::size_t i = 0; i < powers.size(); ++i) {
        exact14[i] = 2.5e9 * std::pow(powers[i], 1.4);
        linear[i] = 7.7e9 * powers[i];
    }
    const auto fit14 = fit_power_law(powers, exact14);
    CHECK(fit14.exponent == doctest::Approx(1.4).epsilon(1e-10));
    CHECK(fit14.amplitude == doctest::Approx(2.5e9).epsilon(1e-8));
    const auto fit1 = fit_power_law(powers, linear);
    CHECK(fit1.exponent == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("power-law fit uncertainty is calibrated against Monte Carlo")
{
    std::vector<double> powers{1e-8, 3e-8, 1e-7, 3e-7, 1e-6, 3e-6, 1e-5};
    SplitRng rng(5150, 0);
    const int trials = 200;
    int within_2sigma = 0;
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<double> rates(powers.size());
        std::vector<double> sigmas(powers.size());
        for (std::size_t i = 0; i < powers.size(); ++i) {
            const double truth = 2.5e9 * std::pow(powers[i], 1.4);
            sigmas[i] = 0.03 * truth;
            rates[i] = truth * (1.0 + 0.03 * rng.normal());
            if (rates[i] <= 0.0)
                rates[i] = 0.01 * truth;
        }
        const auto fit = fit_power_law(powers, rates, sigmas);
        if (std::abs(fit.exponent - 1.4) < 2.0 * fit.exponent_sigma)
            ++within_2sigma;
    }
    CHECK(within_2sigma >= static_cast<int>(0.90 * trials));
}

TEST_CASE("power-law fit rejects degenerate input")
{
    CHECK_THROWS_AS(fit_power_law({1.0, 2.0}, {1.0, 2.0}), FitError);
    CHECK_THROWS_AS(fit_power_law({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}), FitError);
    CHECK_THROWS_AS(fit_power_law({1.0, -2.0, 3.0}, {1.0, 2.0, 3.0}),
                    DomainError);
    CHECK_THROWS_AS(fit_power_law({1.0, 2.0, 3.0}, {1.0, 0.0, 3.0}),
                    DomainError);
}

TEST_CASE("g0 extraction closes the loop on the rate formula")
{
    const auto device = paper_device();
    DetectorModel detector;
    detector.efficiency_total = 0.26;
    const double n_b = 76.3;

    const auto rates = sideband_rates(device, 1.0, n_b, detector);
    const double sum_slope = rates.blue_hz + rates.red_hz;
    const auto sum = extract_g0(sum_slope, 0.0, device, detector, n_b,
                                SidebandConvention::Sum);
    CHECK(sum.g0_hz == doctest::Approx(220e3).epsilon(1e-9));

    const auto mean = extract_g0(0.5 * sum_slope, 0.0, device, detector, n_b,
                                 SidebandConvention::Mean);
    CHECK(mean.g0_hz == doctest::Approx(220e3).epsilon(1e-9));

    const auto single = extract_g0(rates.blue_hz, 0.0, device, detector, n_b,
                                   SidebandConvention::SingleSideband);
    CHECK(single.g0_hz == doctest::Approx(220e3).epsilon(1e-9));

    // Misassigning the efficiency by 2x biases g0^2 by 2x.
    DetectorModel half = detector;
    half.efficiency_total *= 2.0;
    const auto biased = extract_g0(sum_slope, 0.0, device, half, n_b,
                                   SidebandConvention::Sum);
    CHECK(biased.g0_hz == doctest::Approx(220e3 / std::sqrt(2.0)).epsilon(1e-9));

    // Relative slope error of 10% maps to 5% on g0.
    const auto with_sigma = extract_g0(sum_slope, 0.1 * sum_slope, device,
                                       detector, n_b, SidebandConvention::Sum);
    CHECK(with_sigma.sigma_hz
          == doctest::Approx(0.05 * with_sigma.g0_hz).epsilon(1e-9));

    CHECK_THROWS_AS(
        extract_g0(0.0, 0.0, device, detector, 1.0, SidebandConvention::Sum),
        DomainError);
}

TEST_CASE("doublet fit recovers the generating parameters noiselessly")
{
    const double center = 196.78e12;
    const double splitting = 4.8e9;
    const double kappa_tot = 2065e6;
    const double depth = 0.71366;
    std::vector<double> x, y;
    for (int i = 0; i <= 2400; ++i) {
        const double f = center - 12e9 + i * 1e7;
        x.push_back(f);
        y.push_back(1.0 - depth * lorentz(f - (center - 0.5 * splitting), kappa_tot)
                    - depth * lorentz(f - (center + 0.5 * splitting), kappa_tot));
    }
    const auto fit = fit_lorentzian_doublet(x, y);
    CHECK(fit.converged);
    CHECK_FALSE(fit.fallback_single);
    CHECK(fit.value("center_hz") == doctest::Approx(center).epsilon(1e-9));
    CHECK(fit.value("splitting_hz") == doctest::Approx(splitting).epsilon(1e-6));
    CHECK(fit.value("kappa_total_hz") == doctest::Approx(kappa_tot).epsilon(1e-6));
    CHECK(fit.value("depth_low") == doctest::Approx(depth).epsilon(1e-6));
    CHECK(fit.value("kappa_external_hz") == doctest::Approx(480e6).epsilon(1e-3));
    CHECK(fit.value("kappa_intrinsic_hz") == doctest::Approx(1585e6).epsilon(1e-3));
    CHECK(fit.value("loaded_q") == doctest::Approx(95293.0).epsilon(1e-3));
}

TEST_CASE("merged doublet falls back to a single-dip model, flagged")
{
    const double center = 196.78e12;
    const double kappa_tot = 2065e6;
    std::vector<double> x, y;
    for (int i = 0; i <= 1200; ++i) {
        const double f = center - 12e9 + i * 2e7;
        x.push_back(f);
        y.push_back(1.0 - 0.7 * lorentz(f - center, kappa_tot));
    }
    const auto fit = fit_lorentzian_doublet(x, y);
    CHECK(fit.converged);
    CHECK(fit.fallback_single);
    CHECK(fit.value("splitting_hz") == 0.0);
    CHECK(fit.value("center_hz") == doctest::Approx(center).epsilon(1e-9));
    CHECK(fit.value("kappa_total_hz") == doctest::Approx(kappa_tot).epsilon(1e-4));
}

TEST_CASE("doublet fit survives realistic noise")
{
    const double center = 196.78e12;
    const double splitting = 4.8e9;
    const double kappa_tot = 2065e6;
    const double depth = 0.71366;
    SplitRng rng(14, 0);
    std::vector<double> x, y;
    for (int i = 0; i <= 2400; ++i) {
        const double f = center - 12e9 + i * 1e7;
        const double clean =
            1.0 - depth * lorentz(f - (center - 0.5 * splitting), kappa_tot)
            - depth * lorentz(f - (center + 0.5 * splitting), kappa_tot);
        x.push_back(f);
        y.push_back(clean + 0.002 * rng.normal());
    }
    const auto fit = fit_lorentzian_doublet(x, y);
    CHECK(fit.converged);
    CHECK(fit.value("splitting_hz") == doctest::Approx(splitting).epsilon(1e-3));
    CHECK(fit.value("kappa_total_hz") == doctest::Approx(kappa_tot).epsilon(0.01));
    CHECK(fit.sigma("kappa_total_hz") > 0.0);
    // The quoted uncertainty should be in the right ballpark: the deviation
    // from truth stays within a few sigma.
    CHECK(std::abs(fit.value("kappa_total_hz") - kappa_tot)
          < 5.0 * fit.sigma("kappa_total_hz"));
}

TEST_CASE("mechanical fit recovers the quality factor")
{
    std::vector<double> x, y;
    for (int i = 0; i <= 1200; ++i) {
        const double f = 1.085e9 - 30e6 + i * 5e4;
        x.push_back(f);
        y.push_back(1.0 + 10.0 * lorentz(f - 1.085e9, 6e6));
    }
    const auto fit = fit_mechanical_spectrum(x, y);
    CHECK(fit.converged);
    CHECK(fit.value("center_hz") == doctest::Approx(1.085e9).epsilon(1e-9));
    CHECK(fit.value("fwhm_hz") == doctest::Approx(6e6).epsilon(1e-6));
    CHECK(fit.value("quality_factor") == doctest::Approx(180.833).epsilon(1e-4));
    CHECK(fit.value("background") == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("mechanical fit with noise stays within its quoted uncertainty")
{
    SplitRng rng(15, 0);
    std::vector<double> x, y;
    for (int i = 0; i <= 1200; ++i) {
        const double f = 1.085e9 - 30e6 + i * 5e4;
        x.push_back(f);
        y.push_back(1.0 + 10.0 * lorentz(f - 1.085e9, 6e6) + 0.05 * rng.normal());
    }
    const auto fit = fit_mechanical_spectrum(x, y);
    CHECK(fit.converged);
    CHECK(std::abs(fit.value("fwhm_hz") - 6e6) < 5.0 * fit.sigma("fwhm_hz"));
    CHECK(fit.value("quality_factor") == doctest::Approx(180.833).epsilon(0.02));
}

TEST_CASE("mechanical fit refuses featureless data")
{
    SplitRng rng(77, 0);
    std::vector<double> x, y;
    for (int i = 0; i <= 400; ++i) {
        x.push_back(1.085e9 - 30e6 + i * 1.5e5);
        y.push_back(1.0 + 0.05 * rng.normal());
    }
    CHECK_THROWS_AS(fit_mechanical_spectrum(x, y), FitError);
}

TEST_CASE("Levenberg-Marquardt round trips perturbed starts")
{
    CurveModel model;
    model.value = [](const std::vector<double>& p, double f) {
        return p[3] + p[2] * lorentz(f - p[0], p[1]);
    };
    model.gradient = [](const std::vector<double>& p, double f) {
        const double h = 0.5 * p[1];
        const double xx = f - p[0];
        const double den = xx * xx + h * h;
        const double l = h * h / den;
        return std::vector<double>{
            p[2] * 2.0 * xx * h * h / (den * den),
            p[2] * h * xx * xx / (den * den),
            l, 1.0};
    };
    const std::vector<double> truth{1.085e9, 6e6, 10.0, 1.0};
    std::vector<double> x, y;
    for (int i = 0; i <= 600; ++i) {
        x.push_back(1.085e9 - 30e6 + i * 1e5);
        y.push_back(model.value(truth, x.back()));
    }
    const std::vector<double> start{1.086e9, 9e6, 7.0, 0.5};
    const auto result = levenberg_marquardt(model, x, y, {}, start);
    REQUIRE(result.converged);
    for (std::size_t i = 0; i < truth.size(); ++i)
        CHECK(result.params[i] == doctest::Approx(truth[i]).epsilon(1e-6));
    CHECK(result.chi2 < 1e-10);

    // With per-point sigmas the chi-square is computed in weighted units.
    std::vector<double> sigma(x.size(), 0.1);
    const auto weighted = levenberg_marquardt(model, x, y, sigma, start);
    REQUIRE(weighted.converged);
    CHECK(weighted.chi2 < 1e-8);
    CHECK(weighted.params[1] == doctest::Approx(6e6).epsilon(1e-6));
}

TEST_CASE("analytic Jacobians agree with finite differences")
{
    CurveModel mech;
    mech.value = [](const std::vector<double>& p, double f) {
        return p[3] + p[2] * lorentz(f - p[0], p[1]);
    };
    mech.gradient = [](const std::vector<double>& p, double f) {
        const double h = 0.5 * p[1];
        const double xx = f - p[0];
        const double den = xx * xx + h * h;
        return std::vector<double>{
            p[2] * 2.0 * xx * h * h / (den * den),
            p[2] * h * xx * xx / (den * den),
            h * h / den, 1.0};
    };
    std::vector<double> x;
    for (int i = 0; i <= 50; ++i)
        x.push_back(1.085e9 - 25e6 + i * 1e6);
    const double deviation =
        jacobian_check(mech, {1.085e9, 6e6, 10.0, 1.0}, x);
    CHECK(deviation < 1e-6);

    // A deliberately wrong gradient is caught.
    CurveModel broken = mech;
    broken.gradient = [&mech](const std::vector<double>& p, double f) {
        auto g = mech.gradient(p, f);
        g[1] *= 1.01;
        return g;
    };
    CHECK(jacobian_check(broken, {1.085e9, 6e6, 10.0, 1.0}, x) > 1e-3);
}

TEST_CASE("quantile helpers match tabulated values")
{
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(normal_quantile(0.025) == doctest::Approx(-1.959964).epsilon(1e-6));
    CHECK(chi_squared_quantile_1dof(0.95) == doctest::Approx(3.841459).epsilon(1e-6));
    CHECK(chi_squared_quantile_1dof(0.68) == doctest::Approx(0.988946).epsilon(1e-4));
    CHECK(normal_cdf(1.959964) == doctest::Approx(0.975).epsilon(1e-6));
    for (double p : {0.01, 0.2, 0.5, 0.8, 0.99})
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-9));
}

TEST_CASE("spectrum reader handles two and three columns")
{
    const auto two = read_spectrum("# header\n1.0 2.0\n3.0 4.0\n\n5.0 6.0\n");
    CHECK(two.x.size() == 3);
    CHECK(two.sigma.empty());
    CHECK(two.y[1] == doctest::Approx(4.0));

    const auto three = read_spectrum("1 2 0.1\n3 4 0.2\n");
    CHECK(three.sigma.size() == 2);
    CHECK(three.sigma[1] == doctest::Approx(0.2));

    CHECK_THROWS_AS(read_spectrum("1.0\n"), ConfigError);
    CHECK_THROWS_AS(read_spectrum("1 2 0.1\n3 4\n"), ConfigError);
}
