#include "sbt/sequence.hpp"

#include "sbt/errors.hpp"

#include <cmath>

namespace sbt {

std::string to_string(PulseLabel label)
{
    switch (label) {
    case PulseLabel::Red: return "red";
    case PulseLabel::Blue: return "blue";
    case PulseLabel::Pump: return "pump";
    case PulseLabel::Probe: return "probe";
    }
    return "?";
}

PulseLabel pulse_label_from_string(const std::string& text)
{
    if (text == "red") return PulseLabel::Red;
    if (text == "blue") return PulseLabel::Blue;
    if (text == "pump") return PulseLabel::Pump;
    if (text == "probe") return PulseLabel::Probe;
    throw ValidationError("unknown pulse label '" + text + "'");
}

void Pulse::validate() const
{
    if (!(duration_s > 0.0))
        throw ValidationError("pulse: duration must be > 0");
    if (!(power_w >= 0.0) || !std::isfinite(power_w))
        throw ValidationError("pulse: power must be finite and >= 0");
    if (!std::isfinite(detuning_hz))
        throw ValidationError("pulse: detuning must be finite");
}

double PulseSequence::period_s() const
{
    double total = 0.0;
    for (const auto& element : period_elements) {
        if (const auto* pulse = std::get_if<Pulse>(&element))
            total += pulse->duration_s;
        else
            total += std::get<double>(element);
    }
    return total;
}

double PulseSequence::on_time_per_period_s() const
{
    double on = 0.0;
    for (const auto& element : period_elements)
        if (const auto* pulse = std::get_if<Pulse>(&element))
            on += pulse->duration_s;
    return on;
}

void PulseSequence::validate() const
{
    bool has_pulse = false;
    for (const auto& element : period_elements) {
        if (const auto* pulse = std::get_if<Pulse>(&element)) {
            pulse->validate();
            has_pulse = true;
        } else if (std::get<double>(element) < 0.0) {
            throw ValidationError("sequence: gaps must be >= 0");
        }
    }
    if (!has_pulse)
        throw ValidationError("sequence: at least one pulse per period required");
    if (!(total_duration_s >= period_s()))
        throw ValidationError("sequence: total duration must cover one period");
}

double duty_cycle(const PulseSequence& seq)
{
    const double period = seq.period_s();
    if (!(period > 0.0))
        throw DomainError("duty_cycle: zero-length period");
    return seq.on_time_per_period_s() / period;
}

double average_power(const PulseSequence& seq)
{
    const double period = seq.period_s();
    if (!(period > 0.0))
        throw DomainError("average_power: zero-length period");
    double energy = 0.0;
    for (const auto& element : seq.period_elements)
        if (const auto* pulse = std::get_if<Pulse>(&element))
            energy += pulse->power_w * pulse->duration_s;
    return energy / period;
}

std::vector<TimelineInterval> expand_timeline(const PulseSequence& seq)
{
    seq.validate();
    const double period = seq.period_s();
    const auto periods =
        static_cast<std::size_t>(std::floor(seq.total_duration_s / period + 1e-9));
    std::vector<TimelineInterval> timeline;
    timeline.reserve(periods * seq.period_elements.size());
    for (std::size_t i = 0; i < periods; ++i) {
        double cursor = static_cast<double>(i) * period;
        for (const auto& element : seq.period_elements) {
            if (const auto* pulse = std::get_if<Pulse>(&element)) {
                timeline.push_back({cursor, cursor + pulse->duration_s, *pulse});
                cursor += pulse->duration_s;
            } else {
                cursor += std::get<double>(element);
            }
        }
    }
    return timeline;
}

} // namespace sbt
