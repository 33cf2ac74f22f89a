#include "sbt/schema.hpp"

#include "sbt/constants.hpp"
#include "sbt/errors.hpp"

#include <cmath>
#include <string>

namespace sbt {

DeviceModel load_device(const Config& config)
{
    DeviceModel device;
    device.optical.resonance_frequency_hz =
        config.get_double("device", "optical_frequency_hz");
    device.optical.kappa_intrinsic_hz =
        config.get_double("device", "kappa_intrinsic_hz");
    device.optical.kappa_external_hz =
        config.get_double("device", "kappa_external_hz");
    device.optical.doublet_splitting_hz =
        config.get_double("device", "doublet_splitting_hz", 0.0);
    device.mechanical.frequency_hz =
        config.get_double("device", "mechanical_frequency_hz");
    device.mechanical.damping_hz =
        config.get_double("device", "mechanical_damping_hz");
    device.g0_hz = config.get_double("device", "g0_hz");
    config.ensure_consumed("device");
    device.validate();
    return device;
}

DetectorModel load_detector(const Config& config)
{
    DetectorModel detector;
    detector.efficiency_total =
        config.get_double("detector", "efficiency_total", 1.0);
    detector.dark_rate_hz = config.get_double("detector", "dark_rate_hz", 0.0);
    detector.pump_leak_rate_hz =
        config.get_double("detector", "pump_leak_rate_hz", 0.0);
    config.ensure_consumed("detector");
    detector.validate();
    return detector;
}

FilterChain load_filter_chain(const Config& config)
{
    FilterChain chain;
    for (int i = 1;; ++i) {
        const std::string prefix = "stage" + std::to_string(i) + "_";
        if (!config.has("filters", prefix + "fwhm_hz"))
            break;
        FabryPerotStage stage;
        stage.fwhm_hz = config.get_double("filters", prefix + "fwhm_hz");
        stage.fsr_hz = config.get_double("filters", prefix + "fsr_hz");
        stage.peak_transmission =
            config.get_double("filters", prefix + "peak_transmission", 1.0);
        chain.stages.push_back(stage);
    }
    chain.drift.stable_window_s =
        config.get_double("filters", "stable_window_s", 2.5);
    chain.drift.post_window_factor =
        config.get_double("filters", "post_window_factor", 0.85);
    chain.extinction_floor =
        config.get_double("filters", "extinction_floor", 0.0);
    config.ensure_consumed("filters");
    chain.validate();
    return chain;
}

CryostatEnvironment load_environment(const Config& config)
{
    CryostatEnvironment env;
    env.base_temperature_k =
        config.get_double("environment", "base_temperature_k");
    config.ensure_consumed("environment");
    env.validate();
    return env;
}

HeatingModel load_heating(const Config& config)
{
    HeatingModel model;
    if (!config.has_section("heating"))
        return model;
    model.fast_amplitude = config.get_double("heating", "fast_amplitude", 0.0);
    model.fast_exponent = config.get_double("heating", "fast_exponent", 1.0);
    model.fast_timescale_s =
        config.get_double("heating", "fast_timescale_s", 100e-9);
    model.slow_amplitude = config.get_double("heating", "slow_amplitude", 0.0);
    model.slow_exponent = config.get_double("heating", "slow_exponent", 1.0);
    model.slow_timescale_s =
        config.get_double("heating", "slow_timescale_s", 20e-6);
    config.ensure_consumed("heating");
    model.validate();
    return model;
}

namespace {

double resolve_detuning(const std::string& text, const DeviceModel& device,
                        int line)
{
    if (text == "+mech")
        return device.mechanical.frequency_hz;
    if (text == "-mech")
        return -device.mechanical.frequency_hz;
    try {
        std::size_t pos = 0;
        const double value = std::stod(text, &pos);
        if (pos != text.size())
            throw std::invalid_argument("trailing characters");
        return value;
    } catch (const std::exception&) {
        throw ConfigError("detuning must be a number in Hz, '+mech' or '-mech'",
                          line);
    }
}

} // namespace

PulseSequence parse_sequence_config(const Config& config,
                                    const DeviceModel& device)
{
    PulseSequence seq;
    for (int i = 1;; ++i) {
        const std::string pulse_prefix = "pulse" + std::to_string(i) + "_";
        const bool has_pulse = config.has("sequence", pulse_prefix + "label");
        if (has_pulse) {
            Pulse pulse;
            pulse.label = pulse_label_from_string(
                config.get_string("sequence", pulse_prefix + "label"));
            pulse.detuning_hz = resolve_detuning(
                config.get_string("sequence", pulse_prefix + "detuning"), device,
                0);
            pulse.power_w =
                config.get_double("sequence", pulse_prefix + "power_w");
            pulse.duration_s =
                config.get_double("sequence", pulse_prefix + "duration_s");
            if (!(pulse.duration_s > 0.0))
                throw ConfigError("sequence: " + pulse_prefix
                                  + "duration_s must be > 0");
            if (pulse.power_w < 0.0)
                throw ConfigError("sequence: " + pulse_prefix
                                  + "power_w must be >= 0");
            seq.period_elements.emplace_back(pulse);
        }
        const std::string gap_key = "gap" + std::to_string(i) + "_s";
        if (config.has("sequence", gap_key)) {
            const double gap = config.get_double("sequence", gap_key);
            if (gap < 0.0)
                throw ConfigError("sequence: " + gap_key + " must be >= 0");
            seq.period_elements.emplace_back(gap);
        } else if (!has_pulse) {
            break;
        }
    }
    seq.total_duration_s = config.get_double("sequence", "total_duration_s");
    config.ensure_consumed("sequence");
    seq.validate();
    return seq;
}

SimulationPlan load_plan(const Config& config)
{
    SimulationPlan plan;
    plan.device = load_device(config);
    plan.detector = load_detector(config);
    plan.chain = load_filter_chain(config);
    plan.environment = load_environment(config);
    plan.heating = load_heating(config);
    plan.sequence = parse_sequence_config(config, plan.device);
    plan.laser_frequency_hz = config.get_double(
        "campaign", "laser_frequency_hz",
        plan.device.optical.resonance_frequency_hz);
    plan.repetitions =
        static_cast<int>(config.get_int("campaign", "repetitions", 1));
    plan.seed = static_cast<std::uint64_t>(config.get_int("campaign", "seed", 0));
    if (config.has("campaign", "dead_time_s"))
        plan.dead_time_s = config.get_double("campaign", "dead_time_s");
    plan.config_digest = fnv1a_digest(config.canonical_text());
    plan.validate();
    return plan;
}

} // namespace sbt
