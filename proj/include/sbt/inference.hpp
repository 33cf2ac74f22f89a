#ifndef SBT_INFERENCE_HPP
#define SBT_INFERENCE_HPP

#include "sbt/device.hpp"
#include "sbt/fit.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sbt {

struct CountsWithExposure {
    double counts = 0.0;
    double exposure_s = 0.0;
};

enum class IntervalMethod { ProfileLikelihood, Bootstrap };

struct OccupancyEstimate {
    double n_b = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double confidence = 0.95;
    IntervalMethod method = IntervalMethod::ProfileLikelihood;
    bool boundary = false; // estimate clipped at a physical boundary

    std::string to_json() const;
};

// Phonon occupancy from blue/red count totals. The point estimate inverts
// the rate-asymmetry relation on dark-subtracted rates; the interval comes
// from the profile likelihood of the joint two-Poisson model with the dark
// rate as a known constant (parametric bootstrap as the alternative).
OccupancyEstimate estimate_occupancy(const CountsWithExposure& blue,
                                     const CountsWithExposure& red,
                                     double dark_rate_hz, double confidence,
                                     IntervalMethod method =
                                         IntervalMethod::ProfileLikelihood,
                                     std::uint64_t seed = 0);

struct PowerLawFit {
    double amplitude = 0.0;
    double exponent = 0.0;
    double amplitude_sigma = 0.0;
    double exponent_sigma = 0.0;
    double log_amp_exp_covariance = 0.0;

    std::string to_json() const;
};

// Weighted least squares of rate = amplitude * power^exponent in log-log
// space; sigmas are absolute rate uncertainties (empty = unweighted).
PowerLawFit fit_power_law(const std::vector<double>& powers_w,
                          const std::vector<double>& rates_hz,
                          const std::vector<double>& rate_sigmas_hz = {});

enum class SidebandConvention { Sum, Mean, SingleSideband };

struct G0Estimate {
    double g0_hz = 0.0;
    double sigma_hz = 0.0;
};

// Inverts the sideband-rate formula for g0 given the fitted slope of
// detected rate versus intracavity photon number at a known thermal
// occupancy. Convention selects which combination of sidebands the slope
// refers to: Sum (2 n_b + 1), Mean ((2 n_b + 1)/2) or the blue sideband
// alone (n_b + 1).
G0Estimate extract_g0(double slope_hz_per_photon, double slope_sigma,
                      const DeviceModel& device, const DetectorModel& detector,
                      double thermal_occupancy,
                      SidebandConvention convention = SidebandConvention::Sum);

struct SpectralFit {
    std::vector<std::string> names;  // fitted parameters, then derived ones
    std::vector<double> values;
    std::vector<double> sigmas;
    std::size_t fitted_count = 0;    // leading entries covered by `covariance`
    Eigen::MatrixXd covariance;
    double chi2 = 0.0;
    int iterations = 0;
    bool converged = false;
    bool fallback_single = false;    // doublet collapsed to a single dip

    double value(const std::string& name) const;
    double sigma(const std::string& name) const;
    std::string to_json() const;
};

// Two-Lorentzian-dip reflection fit. Fitted parameters: center_hz,
// splitting_hz, kappa_total_hz, depth_low, depth_high; derived:
// kappa_intrinsic_hz, kappa_external_hz (undercoupled branch), loaded_q.
SpectralFit fit_lorentzian_doublet(const std::vector<double>& frequency_hz,
                                   const std::vector<double>& reflection);

// Lorentzian-plus-flat-background PSD fit. Fitted parameters: center_hz,
// fwhm_hz, amplitude, background; derived: quality_factor.
SpectralFit fit_mechanical_spectrum(const std::vector<double>& frequency_hz,
                                    const std::vector<double>& psd);

struct SpectrumData {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> sigma; // empty when absent
};

// Two- or three-column plain text: frequency, value[, uncertainty].
SpectrumData read_spectrum(const std::string& text);

} // namespace sbt

#endif
