#ifndef SBT_COUNTING_HPP
#define SBT_COUNTING_HPP

#include "sbt/device.hpp"
#include "sbt/filter.hpp"
#include "sbt/sequence.hpp"
#include "sbt/thermal.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sbt {

struct CountEpoch {
    int index = 0;
    std::string label; // red / blue / pump / probe / dark-only
    double start_s = 0.0;
    double exposure_s = 0.0;
    std::uint64_t counts = 0;
};

struct CountRecord {
    std::vector<CountEpoch> epochs;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::string config_digest;

    const CountEpoch* epoch(const std::string& label) const;

    std::string to_csv() const;
    std::string to_json() const;
    static CountRecord from_csv(const std::string& text);
    static CountRecord from_json(const std::string& text);
};

struct SimulationPlan {
    DeviceModel device;
    DetectorModel detector;
    FilterChain chain;
    PulseSequence sequence;
    CryostatEnvironment environment;
    HeatingModel heating;
    double laser_frequency_hz = 0.0;   // carrier used for photon-flux conversion
    int repetitions = 1;               // back-to-back repeats of the sequence
    std::uint64_t seed = 0;
    std::optional<double> dead_time_s; // optional deterministic thinning
    std::string config_digest;

    void validate() const;
};

// Stationary detected rate during one pulse of the plan's sequence:
// device rates at the pulse detuning, occupancy from the thermal model,
// filter transmission (with drift at `elapsed_s`) and detector terms.
double epoch_rate(const SimulationPlan& plan, const Pulse& pulse,
                  double elapsed_s);

// Draws Poisson counts for every timeline interval and aggregates them per
// label; gaps accumulate into a dark-only epoch. Deterministic in
// (plan, seed, stream).
CountRecord simulate_counts(const SimulationPlan& plan,
                            std::uint64_t stream = 0);

// Independent records on decorrelated RNG streams derived from the base
// seed; record i is reproducible in isolation.
std::vector<CountRecord> ensemble_counts(const SimulationPlan& plan,
                                         int n_ensembles);

// Residual probe leakage through the chain one sideband offset away from
// the filter center; `rejection` models the backward-detection geometry.
double pump_leak_rate(const FilterChain& chain, double probe_flux_hz,
                      double sideband_offset_hz, double rejection = 1.0);

} // namespace sbt

#endif
