#ifndef SBT_DEVICE_HPP
#define SBT_DEVICE_HPP

namespace sbt {

// All stored rates are ordinary frequencies in Hz (the "/2pi" values);
// conversion to angular rates happens inside the formulas.

struct OpticalMode {
    double resonance_frequency_hz = 0.0;
    double kappa_intrinsic_hz = 0.0;
    double kappa_external_hz = 0.0;
    double doublet_splitting_hz = 0.0; // 0 for a single effective mode

    double kappa_total_hz() const { return kappa_intrinsic_hz + kappa_external_hz; }
    double loaded_q() const { return resonance_frequency_hz / kappa_total_hz(); }
    void validate() const;
};

struct MechanicalMode {
    double frequency_hz = 0.0; // Omega_m / 2pi
    double damping_hz = 0.0;   // gamma_m / 2pi

    double quality() const { return frequency_hz / damping_hz; }
    void validate() const;
};

struct DeviceModel {
    OpticalMode optical;
    MechanicalMode mechanical;
    double g0_hz = 0.0; // vacuum optomechanical coupling, g0 / 2pi

    // Omega_m / kappa_tot; > 1 means sideband-resolved.
    double sideband_resolution() const
    {
        return mechanical.frequency_hz / optical.kappa_total_hz();
    }
    void validate() const;
};

struct DetectorModel {
    double efficiency_total = 1.0; // excludes the filter chain transmission
    double dark_rate_hz = 0.0;
    double pump_leak_rate_hz = 0.0;

    void validate() const;
};

// Thermal (Bose-Einstein) occupancy of a mode of the given frequency;
// returns 0 in the zero-temperature limit.
double bose_einstein_occupancy(double frequency_hz, double temperature_k);

// Exact inverse of bose_einstein_occupancy.
double modal_temperature(double occupancy, double frequency_hz);

// Steady-state intracavity photon number of a single Lorentzian mode
// driven at `detuning_hz` from resonance with input power `power_w`.
double intracavity_photon_number(double power_w, double detuning_hz,
                                 const OpticalMode& optical,
                                 double laser_frequency_hz);

struct SidebandRates {
    double blue_hz = 0.0; // Stokes, proportional to n_b + 1
    double red_hz = 0.0;  // anti-Stokes, proportional to n_b
};

// Detected Stokes / anti-Stokes scattering rates for the given intracavity
// photon number and phonon occupancy.
SidebandRates sideband_rates(const DeviceModel& device, double photon_number,
                             double phonon_occupancy,
                             const DetectorModel& detector);

// Phonon occupancy from the Stokes / anti-Stokes rate asymmetry,
// 1 / (blue/red - 1). Exact zero when red_hz == 0.
double occupancy_from_rates(double blue_hz, double red_hz);

// Total detector rate: sideband signal plus dark counts plus pump leak.
double spd_rate(double sideband_hz, const DetectorModel& detector);

// Ground-state weight 1 / (1 + n_b) of a thermal phonon state.
double thermal_ground_probability(double phonon_occupancy);

} // namespace sbt

#endif
