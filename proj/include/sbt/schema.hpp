#ifndef SBT_SCHEMA_HPP
#define SBT_SCHEMA_HPP

#include "sbt/config.hpp"
#include "sbt/counting.hpp"

namespace sbt {

// Shared configuration schema. Sections: device, detector, filters,
// sequence, environment, heating, campaign. Physical quantities carry
// explicit unit suffixes (_hz, _w, _s, _k).

DeviceModel load_device(const Config& config);
DetectorModel load_detector(const Config& config);
FilterChain load_filter_chain(const Config& config);
CryostatEnvironment load_environment(const Config& config);
HeatingModel load_heating(const Config& config);

// [sequence]: numbered pulse entries (pulseN_label, pulseN_detuning with a
// value in Hz or "+mech"/"-mech", pulseN_power_w, pulseN_duration_s),
// interleaved gapN_s entries, and total_duration_s. Detuning keywords
// resolve against the device's mechanical frequency. Unknown keys are
// rejected.
PulseSequence parse_sequence_config(const Config& config,
                                    const DeviceModel& device);

// Full simulation plan; seed may be overridden by the caller afterwards.
SimulationPlan load_plan(const Config& config);

} // namespace sbt

#endif
