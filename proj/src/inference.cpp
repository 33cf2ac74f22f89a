#include "sbt/inference.hpp"

#include "sbt/constants.hpp"
#include "sbt/errors.hpp"
#include "sbt/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sbt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Joint log-likelihood (up to count-factorial constants) of the
// two-Poisson model: blue ~ Pois((A(n+1)+d) Tb), red ~ Pois((A n + d) Tr).
double joint_loglik(double amplitude, double n_b, const CountsWithExposure& blue,
                    const CountsWithExposure& red, double dark)
{
    const double mu_b = (amplitude * (n_b + 1.0) + dark) * blue.exposure_s;
    const double mu_r = (amplitude * n_b + dark) * red.exposure_s;
    double ll = -mu_b - mu_r;
    if (blue.counts > 0.0)
        ll += mu_b > 0.0 ? blue.counts * std::log(mu_b) : -kInf;
    if (red.counts > 0.0)
        ll += mu_r > 0.0 ? red.counts * std::log(mu_r) : -kInf;
    return ll;
}

// Profile log-likelihood over the signal amplitude at fixed occupancy.
// The likelihood is concave in A; bisect on the derivative.
double profile_loglik(double n_b, const CountsWithExposure& blue,
                      const CountsWithExposure& red, double dark)
{
    auto derivative = [&](double a) {
        const double mu_b = a * (n_b + 1.0) + dark;
        const double mu_r = a * n_b + dark;
        double d = -(n_b + 1.0) * blue.exposure_s - n_b * red.exposure_s;
        if (blue.counts > 0.0)
            d += blue.counts * (n_b + 1.0) / std::max(mu_b, 1e-300);
        if (red.counts > 0.0 && n_b > 0.0)
            d += red.counts * n_b / std::max(mu_r, 1e-300);
        return d;
    };

    double hi = (blue.counts / std::max(blue.exposure_s, 1e-300) + dark + 1.0)
            / (n_b + 1.0) * 4.0
        + 1.0;
    while (derivative(hi) > 0.0 && hi < 1e18)
        hi *= 4.0;
    double lo = 0.0;
    if (derivative(lo + 1e-300) <= 0.0)
        return joint_loglik(0.0, n_b, blue, red, dark);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (derivative(mid) > 0.0 ? lo : hi) = mid;
    }
    return joint_loglik(0.5 * (lo + hi), n_b, blue, red, dark);
}

double eq3_point_estimate(const CountsWithExposure& blue,
                          const CountsWithExposure& red, double dark,
                          bool& boundary)
{
    const double rate_b = blue.counts / blue.exposure_s - dark;
    const double rate_r = red.counts / red.exposure_s - dark;
    if (rate_r <= 0.0) {
        boundary = true;
        return 0.0;
    }
    if (rate_b <= rate_r) {
        boundary = true;
        return kInf;
    }
    boundary = false;
    return 1.0 / (rate_b / rate_r - 1.0);
}

} // namespace

std::string OccupancyEstimate::to_json() const
{
    nlohmann::json j;
    j["n_b"] = n_b;
    j["ci_low"] = ci_low;
    j["ci_high"] = std::isfinite(ci_high) ? nlohmann::json(ci_high)
                                          : nlohmann::json("inf");
    j["confidence"] = confidence;
    j["method"] = method == IntervalMethod::ProfileLikelihood
        ? "profile-likelihood"
        : "bootstrap";
    j["boundary"] = boundary;
    return j.dump(2) + "\n";
}

OccupancyEstimate estimate_occupancy(const CountsWithExposure& blue,
                                     const CountsWithExposure& red,
                                     double dark_rate_hz, double confidence,
                                     IntervalMethod method, std::uint64_t seed)
{
    if (!(blue.exposure_s > 0.0) || !(red.exposure_s > 0.0))
        throw DomainError("estimate_occupancy: exposures must be > 0");
    if (dark_rate_hz < 0.0)
        throw DomainError("estimate_occupancy: dark rate must be >= 0");
    if (!(confidence > 0.0) || !(confidence < 1.0))
        throw DomainError("estimate_occupancy: confidence must be in (0, 1)");
    if (blue.counts < 0.0 || red.counts < 0.0)
        throw DomainError("estimate_occupancy: counts must be >= 0");

    OccupancyEstimate estimate;
    estimate.confidence = confidence;
    estimate.method = method;
    estimate.n_b = eq3_point_estimate(blue, red, dark_rate_hz, estimate.boundary);

    if (method == IntervalMethod::Bootstrap) {
        // Parametric bootstrap with the observed counts as Poisson means.
        SplitRng rng(seed, 0xB007);
        const int resamples = 2000;
        std::vector<double> draws;
        draws.reserve(resamples);
        for (int i = 0; i < resamples; ++i) {
            CountsWithExposure b{static_cast<double>(rng.poisson(blue.counts)),
                                 blue.exposure_s};
            CountsWithExposure r{static_cast<double>(rng.poisson(red.counts)),
                                 red.exposure_s};
            bool clipped = false;
            double value = eq3_point_estimate(b, r, dark_rate_hz, clipped);
            if (!std::isfinite(value))
                value = kInf;
            draws.push_back(value);
        }
        std::sort(draws.begin(), draws.end());
        const double alpha = 0.5 * (1.0 - confidence);
        const auto pick = [&](double q) {
            const double idx = q * (draws.size() - 1);
            const auto lo = static_cast<std::size_t>(idx);
            const auto hi = std::min(lo + 1, draws.size() - 1);
            const double w = idx - static_cast<double>(lo);
            return (1.0 - w) * draws[lo] + w * draws[hi];
        };
        estimate.ci_low = std::max(0.0, pick(alpha));
        estimate.ci_high = pick(1.0 - alpha);
        if (std::isfinite(estimate.n_b)) {
            estimate.ci_low = std::min(estimate.ci_low, estimate.n_b);
            estimate.ci_high = std::max(estimate.ci_high, estimate.n_b);
        }
        return estimate;
    }

    // Profile-likelihood interval. Locate the profile maximum first.
    auto profiled = [&](double n) {
        return profile_loglik(n, blue, red, dark_rate_hz);
    };
    double n_ref = std::isfinite(estimate.n_b) ? estimate.n_b : 0.0;
    double hi = std::max(4.0 * n_ref + 10.0, 10.0);
    while (profiled(hi * 2.0) > profiled(hi) && hi < 1e9)
        hi *= 2.0;
    double lo = 0.0;
    // Golden-section maximization on [lo, hi].
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi * 2.0;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = profiled(x1), f2 = profiled(x2);
    for (int i = 0; i < 120; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = profiled(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = profiled(x1);
        }
    }
    double n_mle = 0.5 * (a + b);
    double ll_max = profiled(n_mle);
    const double ll_zero = profiled(0.0);
    if (ll_zero >= ll_max) {
        n_mle = 0.0;
        ll_max = ll_zero;
    }

    const double cutoff =
        ll_max - 0.5 * chi_squared_quantile_1dof(confidence);

    // Lower bound.
    if (profiled(0.0) >= cutoff) {
        estimate.ci_low = 0.0;
    } else {
        double left = 0.0, right = n_mle;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (left + right);
            (profiled(mid) < cutoff ? left : right) = mid;
        }
        estimate.ci_low = 0.5 * (left + right);
    }

    // Upper bound: expand until the profile falls below the cutoff.
    double upper = std::max(2.0 * n_mle + 1.0, 1.0);
    int expansions = 0;
    while (profiled(upper) >= cutoff && expansions++ < 80)
        upper *= 2.0;
    if (profiled(upper) >= cutoff) {
        estimate.ci_high = kInf;
    } else {
        double left = n_mle, right = upper;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (left + right);
            (profiled(mid) >= cutoff ? left : right) = mid;
        }
        estimate.ci_high = 0.5 * (left + right);
    }
    return estimate;
}

std::string PowerLawFit::to_json() const
{
    nlohmann::json j;
    j["amplitude"] = amplitude;
    j["exponent"] = exponent;
    j["amplitude_sigma"] = amplitude_sigma;
    j["exponent_sigma"] = exponent_sigma;
    j["log_amp_exp_covariance"] = log_amp_exp_covariance;
    return j.dump(2) + "\n";
}

PowerLawFit fit_power_law(const std::vector<double>& powers_w,
                          const std::vector<double>& rates_hz,
                          const std::vector<double>& rate_sigmas_hz)
{
    const std::size_t n = powers_w.size();
    if (n < 3 || rates_hz.size() != n)
        throw FitError("fit_power_law: need at least 3 matching points");
    if (!rate_sigmas_hz.empty() && rate_sigmas_hz.size() != n)
        throw FitError("fit_power_law: sigma size mismatch");

    std::vector<double> x(n), y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(powers_w[i] > 0.0) || !(rates_hz[i] > 0.0))
            throw DomainError("fit_power_law: powers and rates must be > 0");
        x[i] = std::log(powers_w[i]);
        y[i] = std::log(rates_hz[i]);
        if (rate_sigmas_hz.empty()) {
            w[i] = 1.0;
        } else {
            if (!(rate_sigmas_hz[i] > 0.0))
                throw FitError("fit_power_law: sigmas must be > 0");
            const double sy = rate_sigmas_hz[i] / rates_hz[i];
            w[i] = 1.0 / (sy * sy);
        }
    }

    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
        sxx += w[i] * x[i] * x[i];
        sxy += w[i] * x[i] * y[i];
    }
    const double det = sw * sxx - sx * sx;
    if (!(det > 1e-12 * sw * sxx))
        throw FitError("fit_power_law: degenerate design (powers not distinct)");

    const double slope = (sw * sxy - sx * sy) / det;
    const double intercept = (sxx * sy - sx * sxy) / det;
    double var_slope = sw / det;
    double var_intercept = sxx / det;
    double cov_ab = -sx / det;
    if (rate_sigmas_hz.empty() && n > 2) {
        double chi2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - intercept - slope * x[i];
            chi2 += r * r;
        }
        const double scale = chi2 / static_cast<double>(n - 2);
        var_slope *= scale;
        var_intercept *= scale;
        cov_ab *= scale;
    }

    PowerLawFit fit;
    fit.exponent = slope;
    fit.amplitude = std::exp(intercept);
    fit.exponent_sigma = std::sqrt(var_slope);
    fit.amplitude_sigma = fit.amplitude * std::sqrt(var_intercept);
    fit.log_amp_exp_covariance = cov_ab;
    return fit;
}

G0Estimate extract_g0(double slope_hz_per_photon, double slope_sigma,
                      const DeviceModel& device, const DetectorModel& detector,
                      double thermal_occupancy, SidebandConvention convention)
{
    if (!(slope_hz_per_photon > 0.0))
        throw DomainError("extract_g0: slope must be > 0");
    if (slope_sigma < 0.0 || thermal_occupancy < 0.0)
        throw DomainError("extract_g0: negative uncertainty or occupancy");
    device.validate();
    detector.validate();

    double occupancy_factor;
    switch (convention) {
    case SidebandConvention::Sum:
        occupancy_factor = 2.0 * thermal_occupancy + 1.0;
        break;
    case SidebandConvention::Mean:
        occupancy_factor = 0.5 * (2.0 * thermal_occupancy + 1.0);
        break;
    case SidebandConvention::SingleSideband:
        occupancy_factor = thermal_occupancy + 1.0;
        break;
    default:
        throw DomainError("extract_g0: unknown convention");
    }

    const double kappa_e = kTwoPi * device.optical.kappa_external_hz;
    const double kappa_tot = kTwoPi * device.optical.kappa_total_hz();
    const double prefactor = detector.efficiency_total * 4.0 * kappa_e
        / (kappa_tot * kappa_tot) * occupancy_factor;
    const double g0_angular = std::sqrt(slope_hz_per_photon / prefactor);

    G0Estimate estimate;
    estimate.g0_hz = g0_angular / kTwoPi;
    estimate.sigma_hz =
        estimate.g0_hz * 0.5 * slope_sigma / slope_hz_per_photon;
    return estimate;
}

double SpectralFit::value(const std::string& name) const
{
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name)
            return values[i];
    throw FitError("spectral fit: unknown parameter '" + name + "'");
}

double SpectralFit::sigma(const std::string& name) const
{
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name)
            return sigmas[i];
    throw FitError("spectral fit: unknown parameter '" + name + "'");
}

std::string SpectralFit::to_json() const
{
    nlohmann::json j;
    for (std::size_t i = 0; i < names.size(); ++i)
        j["parameters"][names[i]] = {{"value", values[i]}, {"sigma", sigmas[i]}};
    std::vector<std::vector<double>> cov;
    for (Eigen::Index r = 0; r < covariance.rows(); ++r) {
        std::vector<double> row;
        for (Eigen::Index c = 0; c < covariance.cols(); ++c)
            row.push_back(covariance(r, c));
        cov.push_back(std::move(row));
    }
    j["covariance"] = cov;
    j["chi2"] = chi2;
    j["iterations"] = iterations;
    j["converged"] = converged;
    j["fallback_single"] = fallback_single;
    return j.dump(2) + "\n";
}

namespace {

double lorentz(double x, double fwhm)
{
    const double h = 0.5 * fwhm;
    return h * h / (x * x + h * h);
}

double dlorentz_dx(double x, double fwhm)
{
    const double h = 0.5 * fwhm;
    const double den = x * x + h * h;
    return -2.0 * x * h * h / (den * den);
}

double dlorentz_dfwhm(double x, double fwhm)
{
    const double h = 0.5 * fwhm;
    const double den = x * x + h * h;
    return h * x * x / (den * den);
}

std::vector<double> smoothed(const std::vector<double>& y, std::size_t window)
{
    if (window < 2)
        return y;
    std::vector<double> out(y.size());
    const auto n = y.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= window ? i - window : 0;
        const std::size_t hi = std::min(i + window, n - 1);
        double sum = 0.0;
        for (std::size_t k = lo; k <= hi; ++k)
            sum += y[k];
        out[i] = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

void check_spectrum_input(const std::vector<double>& x,
                          const std::vector<double>& y, std::size_t min_points)
{
    if (x.size() != y.size())
        throw FitError("spectrum fit: frequency/value size mismatch");
    if (x.size() < min_points)
        throw FitError("spectrum fit: too few data points");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1]))
            throw FitError("spectrum fit: frequency axis must be increasing");
}

// Width of a dip/peak at half its extremum via linear interpolation.
double half_width(const std::vector<double>& x, const std::vector<double>& y,
                  std::size_t peak, double baseline, double fallback)
{
    const double half_level = 0.5 * (y[peak] + baseline);
    double left = x[peak], right = x[peak];
    const bool dip = y[peak] < baseline;
    for (std::size_t i = peak; i-- > 0;) {
        const bool crossed = dip ? y[i] > half_level : y[i] < half_level;
        if (crossed) {
            const double t = (half_level - y[i]) / (y[i + 1] - y[i]);
            left = x[i] + t * (x[i + 1] - x[i]);
            break;
        }
    }
    for (std::size_t i = peak + 1; i < x.size(); ++i) {
        const bool crossed = dip ? y[i] > half_level : y[i] < half_level;
        if (crossed) {
            const double t = (half_level - y[i - 1]) / (y[i] - y[i - 1]);
            right = x[i - 1] + t * (x[i] - x[i - 1]);
            break;
        }
    }
    const double width = right - left;
    return width > 0.0 ? width : fallback;
}

} // namespace

SpectralFit fit_lorentzian_doublet(const std::vector<double>& frequency_hz,
                                   const std::vector<double>& reflection)
{
    check_spectrum_input(frequency_hz, reflection, 10);
    const auto n = frequency_hz.size();
    const auto smooth = smoothed(reflection, std::max<std::size_t>(2, n / 200));

    // Baseline from the upper envelope, dips from local minima.
    const double baseline = *std::max_element(smooth.begin(), smooth.end());
    const auto dip1 = static_cast<std::size_t>(
        std::min_element(smooth.begin(), smooth.end()) - smooth.begin());
    const double depth_est = baseline - smooth[dip1];
    if (!(depth_est > 0.0))
        throw FitError("doublet fit: no dip found");

    const double span = frequency_hz.back() - frequency_hz.front();
    const double width1 =
        half_width(frequency_hz, smooth, dip1, baseline, 0.05 * span);

    // Second minimum outside an exclusion zone around the first.
    std::size_t dip2 = dip1;
    double best = baseline;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(frequency_hz[i] - frequency_hz[dip1]) < 1.5 * width1)
            continue;
        if (smooth[i] < best) {
            best = smooth[i];
            dip2 = i;
        }
    }
    const bool merged = dip2 == dip1
        || (baseline - smooth[dip2]) < 0.25 * depth_est;

    SpectralFit fit;
    if (merged) {
        // Degenerate doublet: single-dip fallback.
        CurveModel model;
        model.value = [](const std::vector<double>& p, double f) {
            return 1.0 - p[3] * lorentz(f - p[0], p[2]);
        };
        model.gradient = [](const std::vector<double>& p, double f) {
            const double x = f - p[0];
            return std::vector<double>{p[3] * dlorentz_dx(x, p[2]), 0.0,
                                       -p[3] * dlorentz_dfwhm(x, p[2]),
                                       -lorentz(x, p[2])};
        };
        std::vector<double> initial{frequency_hz[dip1], 0.0, width1, depth_est};
        // Splitting frozen at zero: mask it out by fitting the remaining
        // three parameters through a reduced model.
        CurveModel reduced;
        reduced.value = [&model](const std::vector<double>& p, double f) {
            return model.value({p[0], 0.0, p[1], p[2]}, f);
        };
        reduced.gradient = [&model](const std::vector<double>& p, double f) {
            const auto g = model.gradient({p[0], 0.0, p[1], p[2]}, f);
            return std::vector<double>{g[0], g[2], g[3]};
        };
        auto result = levenberg_marquardt(reduced, frequency_hz, reflection, {},
                                          {initial[0], initial[2], initial[3]});
        if (!result.converged)
            throw FitError("doublet fit (single fallback): " + result.message);
        fit.names = {"center_hz", "splitting_hz", "kappa_total_hz", "depth_low",
                     "depth_high"};
        fit.values = {result.params[0], 0.0, result.params[1], result.params[2],
                      result.params[2]};
        fit.sigmas = {result.sigma[0], 0.0, result.sigma[1], result.sigma[2],
                      result.sigma[2]};
        fit.fitted_count = 5;
        fit.covariance = Eigen::MatrixXd::Zero(5, 5);
        fit.covariance(0, 0) = result.covariance(0, 0);
        fit.covariance(2, 2) = result.covariance(1, 1);
        fit.covariance(3, 3) = result.covariance(2, 2);
        fit.covariance(4, 4) = result.covariance(2, 2);
        fit.chi2 = result.chi2;
        fit.iterations = result.iterations;
        fit.converged = result.converged;
        fit.fallback_single = true;
    } else {
        CurveModel model;
        model.value = [](const std::vector<double>& p, double f) {
            const double x1 = f - (p[0] - 0.5 * p[1]);
            const double x2 = f - (p[0] + 0.5 * p[1]);
            return 1.0 - p[3] * lorentz(x1, p[2]) - p[4] * lorentz(x2, p[2]);
        };
        model.gradient = [](const std::vector<double>& p, double f) {
            const double x1 = f - (p[0] - 0.5 * p[1]);
            const double x2 = f - (p[0] + 0.5 * p[1]);
            const double d1 = dlorentz_dx(x1, p[2]);
            const double d2 = dlorentz_dx(x2, p[2]);
            return std::vector<double>{
                p[3] * d1 + p[4] * d2,
                -0.5 * p[3] * d1 + 0.5 * p[4] * d2,
                -p[3] * dlorentz_dfwhm(x1, p[2]) - p[4] * dlorentz_dfwhm(x2, p[2]),
                -lorentz(x1, p[2]), -lorentz(x2, p[2])};
        };
        const double width2 =
            half_width(frequency_hz, smooth, dip2, baseline, width1);
        const double lower = std::min(frequency_hz[dip1], frequency_hz[dip2]);
        const double upper = std::max(frequency_hz[dip1], frequency_hz[dip2]);
        std::vector<double> initial{0.5 * (lower + upper), upper - lower,
                                    0.5 * (width1 + width2),
                                    baseline - smooth[dip1 < dip2 ? dip1 : dip2],
                                    baseline - smooth[dip1 < dip2 ? dip2 : dip1]};
        auto result =
            levenberg_marquardt(model, frequency_hz, reflection, {}, initial);
        if (!result.converged)
            throw FitError("doublet fit: " + result.message);
        fit.names = {"center_hz", "splitting_hz", "kappa_total_hz", "depth_low",
                     "depth_high"};
        fit.values = result.params;
        fit.sigmas = result.sigma;
        fit.fitted_count = 5;
        fit.covariance = result.covariance;
        fit.chi2 = result.chi2;
        fit.iterations = result.iterations;
        fit.converged = result.converged;
    }

    // Split the total linewidth into intrinsic and external parts through
    // the dip contrast D = 4 ki ke / ktot^2, taking the undercoupled branch.
    const double kappa_tot = fit.value("kappa_total_hz");
    const double depth =
        0.5 * (fit.value("depth_low") + fit.value("depth_high"));
    const double clipped = std::clamp(depth, 0.0, 1.0);
    const double root = std::sqrt(1.0 - clipped);
    const double kappa_e = 0.5 * kappa_tot * (1.0 - root);
    const double kappa_i = kappa_tot - kappa_e;

    // Delta-method sigmas from (kappa_tot, depth) variances.
    const double sigma_ktot = fit.sigma("kappa_total_hz");
    const double sigma_depth = 0.5
        * std::sqrt(fit.sigma("depth_low") * fit.sigma("depth_low")
                    + fit.sigma("depth_high") * fit.sigma("depth_high"));
    const double dke_ddepth =
        root > 1e-12 ? 0.25 * kappa_tot / root : 0.0;
    const double dke_dktot = 0.5 * (1.0 - root);
    const double sigma_ke = std::sqrt(
        dke_dktot * dke_dktot * sigma_ktot * sigma_ktot
        + dke_ddepth * dke_ddepth * sigma_depth * sigma_depth);
    const double dki_dktot = 1.0 - dke_dktot;
    const double sigma_ki = std::sqrt(
        dki_dktot * dki_dktot * sigma_ktot * sigma_ktot
        + dke_ddepth * dke_ddepth * sigma_depth * sigma_depth);

    const double center = fit.value("center_hz");
    const double q_loaded = center / kappa_tot;
    const double sigma_q = q_loaded
        * std::sqrt(std::pow(fit.sigma("center_hz") / center, 2)
                    + std::pow(sigma_ktot / kappa_tot, 2));

    fit.names.insert(fit.names.end(),
                     {"kappa_intrinsic_hz", "kappa_external_hz", "loaded_q"});
    fit.values.insert(fit.values.end(), {kappa_i, kappa_e, q_loaded});
    fit.sigmas.insert(fit.sigmas.end(), {sigma_ki, sigma_ke, sigma_q});
    return fit;
}

SpectralFit fit_mechanical_spectrum(const std::vector<double>& frequency_hz,
                                    const std::vector<double>& psd)
{
    check_spectrum_input(frequency_hz, psd, 8);
    const auto n = frequency_hz.size();
    const auto smooth = smoothed(psd, std::max<std::size_t>(2, n / 200));

    auto sorted = smooth;
    std::sort(sorted.begin(), sorted.end());
    const double background = sorted[sorted.size() / 4];
    const auto peak = static_cast<std::size_t>(
        std::max_element(smooth.begin(), smooth.end()) - smooth.begin());
    const double amplitude = smooth[peak] - background;
    const double spread = sorted[sorted.size() * 3 / 4] - sorted[sorted.size() / 4];
    if (!(amplitude > 5.0 * std::max(spread, 1e-300)) || !(amplitude > 0.0))
        throw FitError("mechanical fit: no line found above background");

    const double span = frequency_hz.back() - frequency_hz.front();
    const double width =
        half_width(frequency_hz, smooth, peak, background, 0.05 * span);

    CurveModel model;
    model.value = [](const std::vector<double>& p, double f) {
        return p[3] + p[2] * lorentz(f - p[0], p[1]);
    };
    model.gradient = [](const std::vector<double>& p, double f) {
        const double x = f - p[0];
        return std::vector<double>{-p[2] * dlorentz_dx(x, p[1]),
                                   p[2] * dlorentz_dfwhm(x, p[1]),
                                   lorentz(x, p[1]), 1.0};
    };
    auto result = levenberg_marquardt(
        model, frequency_hz, psd, {},
        {frequency_hz[peak], width, amplitude, background});
    if (!result.converged)
        throw FitError("mechanical fit: " + result.message);

    SpectralFit fit;
    fit.names = {"center_hz", "fwhm_hz", "amplitude", "background"};
    fit.values = result.params;
    fit.sigmas = result.sigma;
    fit.fitted_count = 4;
    fit.covariance = result.covariance;
    fit.chi2 = result.chi2;
    fit.iterations = result.iterations;
    fit.converged = result.converged;

    const double center = fit.value("center_hz");
    const double fwhm = fit.value("fwhm_hz");
    const double q = center / fwhm;
    // Propagate with the center-width covariance included.
    const double var_q = q * q
        * (std::pow(fit.sigma("center_hz") / center, 2)
           + std::pow(fit.sigma("fwhm_hz") / fwhm, 2)
           - 2.0 * result.covariance(0, 1) / (center * fwhm));
    fit.names.push_back("quality_factor");
    fit.values.push_back(q);
    fit.sigmas.push_back(std::sqrt(std::max(var_q, 0.0)));
    return fit;
}

SpectrumData read_spectrum(const std::string& text)
{
    SpectrumData data;
    std::istringstream in(text);
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto comment = line.find('#');
        if (comment != std::string::npos)
            line = line.substr(0, comment);
        std::istringstream row(line);
        double x, y;
        if (!(row >> x))
            continue; // blank or comment-only line
        if (!(row >> y))
            throw ConfigError("spectrum: expected at least two columns",
                              line_number);
        data.x.push_back(x);
        data.y.push_back(y);
        double s;
        if (row >> s)
            data.sigma.push_back(s);
    }
    if (!data.sigma.empty() && data.sigma.size() != data.x.size())
        throw ConfigError("spectrum: uncertainty column must be complete");
    return data;
}

} // namespace sbt
