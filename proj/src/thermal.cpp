#include "sbt/thermal.hpp"

#include "sbt/errors.hpp"

#include <cmath>

namespace sbt {

void CryostatEnvironment::validate() const
{
    if (!(base_temperature_k > 0.0))
        throw ValidationError("environment: base temperature must be > 0");
}

void HeatingModel::validate() const
{
    if (fast_amplitude < 0.0 || slow_amplitude < 0.0)
        throw ValidationError("heating: amplitudes must be >= 0");
    if (!(fast_exponent > 0.0) || !(slow_exponent > 0.0))
        throw ValidationError("heating: exponents must be > 0");
    if (!(fast_timescale_s < slow_timescale_s))
        throw ValidationError("heating: fast timescale must be below the slow one");
}

double occupancy_during_pulse(double pulse_power_w, double average_power_w,
                              const CryostatEnvironment& env,
                              const HeatingModel& model,
                              const MechanicalMode& mech)
{
    if (pulse_power_w < 0.0 || average_power_w < 0.0)
        throw DomainError("occupancy_during_pulse: powers must be >= 0");
    env.validate();
    model.validate();
    const double bath =
        bose_einstein_occupancy(mech.frequency_hz, env.base_temperature_k);
    const double fast = pulse_power_w > 0.0
        ? model.fast_amplitude * std::pow(pulse_power_w, model.fast_exponent)
        : 0.0;
    const double slow = average_power_w > 0.0
        ? model.slow_amplitude * std::pow(average_power_w, model.slow_exponent)
        : 0.0;
    return bath + fast + slow;
}

double effective_occupancy(const PulseSequence& seq,
                           const CryostatEnvironment& env,
                           const HeatingModel& model, const MechanicalMode& mech)
{
    seq.validate();
    const Pulse* measurement = nullptr;
    for (const auto& element : seq.period_elements) {
        const auto* pulse = std::get_if<Pulse>(&element);
        if (!pulse)
            continue;
        if (pulse->label == PulseLabel::Probe) {
            measurement = pulse;
            break;
        }
        if (!measurement && pulse->label != PulseLabel::Pump)
            measurement = pulse;
    }
    if (!measurement)
        throw ValidationError("effective_occupancy: no measurement pulse in period");
    return occupancy_during_pulse(measurement->power_w, average_power(seq), env,
                                  model, mech);
}

double pump_probe_occupancy(const Pulse& pump, const Pulse& probe,
                            double delay_s, double period_s,
                            const CryostatEnvironment& env,
                            const HeatingModel& model, const MechanicalMode& mech)
{
    if (!(delay_s > 0.0))
        throw DomainError("pump_probe_occupancy: delay must be > 0");
    if (!(period_s >= pump.duration_s + delay_s + probe.duration_s))
        throw ValidationError("pump_probe_occupancy: period too short");
    pump.validate();
    probe.validate();
    const double p_avg =
        (pump.power_w * pump.duration_s + probe.power_w * probe.duration_s)
        / period_s;
    double occupancy =
        occupancy_during_pulse(probe.power_w, p_avg, env, model, mech);
    if (delay_s < model.fast_timescale_s && pump.power_w > 0.0)
        occupancy += model.fast_amplitude
            * std::pow(pump.power_w, model.fast_exponent);
    return occupancy;
}

} // namespace sbt
