#include "sbt/device.hpp"

#include "sbt/constants.hpp"
#include "sbt/errors.hpp"

#include <cmath>

namespace sbt {

void OpticalMode::validate() const
{
    if (!(resonance_frequency_hz > 0.0))
        throw ValidationError("optical mode: resonance frequency must be > 0");
    if (!(kappa_intrinsic_hz > 0.0) || !(kappa_external_hz > 0.0))
        throw ValidationError("optical mode: loss rates must be > 0");
    if (doublet_splitting_hz < 0.0)
        throw ValidationError("optical mode: doublet splitting must be >= 0");
}

void MechanicalMode::validate() const
{
    if (!(frequency_hz > 0.0))
        throw ValidationError("mechanical mode: frequency must be > 0");
    if (!(damping_hz > 0.0))
        throw ValidationError("mechanical mode: damping must be > 0");
}

void DeviceModel::validate() const
{
    optical.validate();
    mechanical.validate();
    if (!(g0_hz > 0.0))
        throw ValidationError("device: g0 must be > 0");
}

void DetectorModel::validate() const
{
    if (!(efficiency_total > 0.0) || efficiency_total > 1.0)
        throw ValidationError("detector: efficiency must be in (0, 1]");
    if (dark_rate_hz < 0.0 || pump_leak_rate_hz < 0.0)
        throw ValidationError("detector: rates must be >= 0");
}

double bose_einstein_occupancy(double frequency_hz, double temperature_k)
{
    if (!std::isfinite(frequency_hz) || !std::isfinite(temperature_k))
        throw DomainError("bose_einstein_occupancy: non-finite input");
    if (!(frequency_hz > 0.0))
        throw DomainError("bose_einstein_occupancy: frequency must be > 0");
    if (temperature_k < 0.0)
        throw DomainError("bose_einstein_occupancy: negative temperature");
    if (temperature_k == 0.0)
        return 0.0;
    const double x = kPlanck * frequency_hz / (kBoltzmann * temperature_k);
    return 1.0 / std::expm1(x);
}

double modal_temperature(double occupancy, double frequency_hz)
{
    if (!std::isfinite(occupancy) || !std::isfinite(frequency_hz))
        throw DomainError("modal_temperature: non-finite input");
    if (!(occupancy > 0.0))
        throw DomainError("modal_temperature: occupancy must be > 0");
    if (!(frequency_hz > 0.0))
        throw DomainError("modal_temperature: frequency must be > 0");
    return kPlanck * frequency_hz / (kBoltzmann * std::log1p(1.0 / occupancy));
}

double intracavity_photon_number(double power_w, double detuning_hz,
                                 const OpticalMode& optical,
                                 double laser_frequency_hz)
{
    if (!std::isfinite(power_w) || !std::isfinite(detuning_hz)
        || !std::isfinite(laser_frequency_hz))
        throw DomainError("intracavity_photon_number: non-finite input");
    if (power_w < 0.0)
        throw DomainError("intracavity_photon_number: power must be >= 0");
    optical.validate();
    if (power_w == 0.0)
        return 0.0;
    const double kappa_e = kTwoPi * optical.kappa_external_hz;
    const double kappa_tot = kTwoPi * optical.kappa_total_hz();
    const double delta = kTwoPi * detuning_hz;
    const double photon_flux = power_w / (kHbar * kTwoPi * laser_frequency_hz);
    return kappa_e * photon_flux / (delta * delta + 0.25 * kappa_tot * kappa_tot);
}

SidebandRates sideband_rates(const DeviceModel& device, double photon_number,
                             double phonon_occupancy,
                             const DetectorModel& detector)
{
    if (photon_number < 0.0 || phonon_occupancy < 0.0)
        throw DomainError("sideband_rates: occupation numbers must be >= 0");
    const double kappa_e = kTwoPi * device.optical.kappa_external_hz;
    const double kappa_tot = kTwoPi * device.optical.kappa_total_hz();
    const double g0 = kTwoPi * device.g0_hz;
    const double prefactor = detector.efficiency_total * 4.0 * kappa_e
        / (kappa_tot * kappa_tot) * g0 * g0 * photon_number;
    return {prefactor * (phonon_occupancy + 1.0), prefactor * phonon_occupancy};
}

double occupancy_from_rates(double blue_hz, double red_hz)
{
    if (red_hz < 0.0 || !(blue_hz > 0.0))
        throw DomainError("occupancy_from_rates: rates must satisfy blue > 0, red >= 0");
    if (red_hz == 0.0)
        return 0.0;
    if (red_hz >= blue_hz)
        throw EstimationError("occupancy_from_rates: anti-Stokes rate >= Stokes rate");
    return 1.0 / (blue_hz / red_hz - 1.0);
}

double spd_rate(double sideband_hz, const DetectorModel& detector)
{
    if (sideband_hz < 0.0)
        throw DomainError("spd_rate: sideband rate must be >= 0");
    return sideband_hz + detector.dark_rate_hz + detector.pump_leak_rate_hz;
}

double thermal_ground_probability(double phonon_occupancy)
{
    if (phonon_occupancy < 0.0)
        throw DomainError("thermal_ground_probability: occupancy must be >= 0");
    return 1.0 / (1.0 + phonon_occupancy);
}

} // namespace sbt
