#ifndef SBT_THERMAL_HPP
#define SBT_THERMAL_HPP

#include "sbt/device.hpp"
#include "sbt/sequence.hpp"

namespace sbt {

struct CryostatEnvironment {
    double base_temperature_k = 0.011;

    void validate() const;
};

// Two-channel phenomenological heating: a fast intracavity term driven by
// the instantaneous pulse-on power and a slow extracavity term driven by
// the period-averaged power. Both are additive power laws on top of the
// bath occupancy. The timescales act as step thresholds only: the fast
// channel is fully on during any pulse longer than fast_timescale and
// fully relaxed across any longer gap; the slow channel never relaxes
// within a period.
struct HeatingModel {
    double fast_amplitude = 0.0; // occupancy per W^fast_exponent
    double fast_exponent = 1.0;
    double fast_timescale_s = 100e-9; // upper bound
    double slow_amplitude = 0.0;      // occupancy per W^slow_exponent
    double slow_exponent = 1.0;
    double slow_timescale_s = 20e-6; // lower bound

    void validate() const;
};

// Core combination rule: bath + fast(P_pulse) + slow(P_avg).
double occupancy_during_pulse(double pulse_power_w, double average_power_w,
                              const CryostatEnvironment& env,
                              const HeatingModel& model,
                              const MechanicalMode& mech);

// Occupancy during the measurement pulses of a periodic sequence (the
// probe pulse when present, otherwise the first red/blue pulse).
double effective_occupancy(const PulseSequence& seq,
                           const CryostatEnvironment& env,
                           const HeatingModel& model,
                           const MechanicalMode& mech);

// Occupancy during the probe pulse of a pump-probe period of length
// period_s. The pump's fast contribution survives only for delays shorter
// than the fast timescale; the slow term follows the period-averaged power
// and is therefore delay-independent.
double pump_probe_occupancy(const Pulse& pump, const Pulse& probe,
                            double delay_s, double period_s,
                            const CryostatEnvironment& env,
                            const HeatingModel& model,
                            const MechanicalMode& mech);

} // namespace sbt

#endif
