#ifndef SBT_SEQUENCE_HPP
#define SBT_SEQUENCE_HPP

#include <string>
#include <variant>
#include <vector>

namespace sbt {

enum class PulseLabel { Red, Blue, Pump, Probe };

std::string to_string(PulseLabel label);
PulseLabel pulse_label_from_string(const std::string& text);

struct Pulse {
    PulseLabel label = PulseLabel::Red;
    double detuning_hz = 0.0; // signed, relative to the optical resonance
    double power_w = 0.0;     // instantaneous pulse-on power
    double duration_s = 0.0;

    void validate() const;
};

// One period is an ordered list of pulses and gaps, repeated back-to-back
// for total_duration_s.
struct PulseSequence {
    using Element = std::variant<Pulse, double>; // double = gap in seconds
    std::vector<Element> period_elements;
    double total_duration_s = 0.0;

    double period_s() const;
    double on_time_per_period_s() const;
    void validate() const;
};

// Pulse-on fraction of one period; tau_p / (tau + tau_p) for the canonical
// two-pulse sequence.
double duty_cycle(const PulseSequence& seq);

// Power-weighted duty cycle, P * DC for a constant-power sequence.
double average_power(const PulseSequence& seq);

struct TimelineInterval {
    double start_s = 0.0;
    double end_s = 0.0;
    Pulse pulse;
};

// Expands the periodic definition into concrete, time-ordered pulse
// intervals covering total_duration_s.
std::vector<TimelineInterval> expand_timeline(const PulseSequence& seq);

} // namespace sbt

#endif
