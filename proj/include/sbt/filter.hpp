#ifndef SBT_FILTER_HPP
#define SBT_FILTER_HPP

#include "sbt/device.hpp"

#include <vector>

namespace sbt {

struct FabryPerotStage {
    double fwhm_hz = 0.0;            // gamma_f
    double fsr_hz = 0.0;             // free spectral range
    double peak_transmission = 1.0;  // on-resonance transmission

    double finesse() const { return fsr_hz / fwhm_hz; }
    void validate() const;
};

// Transmission is unity inside the stable window and drops by a fixed
// factor once the cavities have drifted out of alignment.
struct DriftLaw {
    double stable_window_s = 2.5;
    double post_window_factor = 0.85;

    void validate() const;
};

struct FilterChain {
    std::vector<FabryPerotStage> stages;
    DriftLaw drift;
    // Optional transmission floor accounting for the unexplained gap
    // between ideal Airy extinction and the measured one; 0 disables it.
    double extinction_floor = 0.0;

    double peak_transmission() const;
    void validate() const;
};

// Airy transmission of one stage at `offset_hz` from its resonance.
// Near resonance this reduces to a Lorentzian of FWHM gamma_f.
double stage_transmission(const FabryPerotStage& stage, double offset_hz);

// Product of stage transmissions times the drift factor at `elapsed_s`.
double chain_transmission(const FilterChain& chain, double offset_hz,
                          double elapsed_s);

// Relative detected rate when the probe sits at `probe_detuning_hz` from the
// optical resonance and the chain is centered on the resonance: the overlap
// of the chain transmission with the mechanical Lorentzian emitted one
// mechanical frequency away from the probe. Normalized to 1 at the matched
// detuning (+-Omega_m).
double sweep_response(const FilterChain& chain, const MechanicalMode& mech,
                      double probe_detuning_hz);

} // namespace sbt

#endif
