#include "sbt/counting.hpp"

#include "sbt/errors.hpp"
#include "sbt/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

namespace sbt {

namespace {

std::string format_double(double value)
{
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

} // namespace

const CountEpoch* CountRecord::epoch(const std::string& label) const
{
    for (const auto& e : epochs)
        if (e.label == label)
            return &e;
    return nullptr;
}

std::string CountRecord::to_csv() const
{
    std::ostringstream out;
    out << "epoch_index,label,start_s,exposure_s,counts\n";
    for (const auto& e : epochs)
        out << e.index << ',' << e.label << ',' << format_double(e.start_s) << ','
            << format_double(e.exposure_s) << ',' << e.counts << '\n';
    return out.str();
}

CountRecord CountRecord::from_csv(const std::string& text)
{
    CountRecord record;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("epoch_index,", 0) != 0)
        throw ValidationError("count record CSV: missing header");
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        CountEpoch e;
        std::istringstream row(line);
        std::string field;
        std::getline(row, field, ',');
        e.index = std::stoi(field);
        std::getline(row, e.label, ',');
        std::getline(row, field, ',');
        e.start_s = std::stod(field);
        std::getline(row, field, ',');
        e.exposure_s = std::stod(field);
        std::getline(row, field, ',');
        e.counts = std::stoull(field);
        record.epochs.push_back(std::move(e));
    }
    return record;
}

std::string CountRecord::to_json() const
{
    nlohmann::json j;
    j["seed"] = seed;
    j["stream"] = stream;
    j["config_digest"] = config_digest;
    j["epochs"] = nlohmann::json::array();
    for (const auto& e : epochs)
        j["epochs"].push_back({{"epoch_index", e.index},
                               {"label", e.label},
                               {"start_s", e.start_s},
                               {"exposure_s", e.exposure_s},
                               {"counts", e.counts}});
    return j.dump(2) + "\n";
}

CountRecord CountRecord::from_json(const std::string& text)
{
    const auto j = nlohmann::json::parse(text);
    CountRecord record;
    record.seed = j.value("seed", std::uint64_t{0});
    record.stream = j.value("stream", std::uint64_t{0});
    record.config_digest = j.value("config_digest", std::string{});
    for (const auto& e : j.at("epochs"))
        record.epochs.push_back({e.at("epoch_index").get<int>(),
                                 e.at("label").get<std::string>(),
                                 e.at("start_s").get<double>(),
                                 e.at("exposure_s").get<double>(),
                                 e.at("counts").get<std::uint64_t>()});
    return record;
}

void SimulationPlan::validate() const
{
    device.validate();
    detector.validate();
    chain.validate();
    sequence.validate();
    environment.validate();
    heating.validate();
    if (!(laser_frequency_hz > 0.0))
        throw ValidationError("plan: laser frequency must be > 0");
    if (repetitions < 1)
        throw ValidationError("plan: repetitions must be >= 1");
    if (dead_time_s && *dead_time_s < 0.0)
        throw ValidationError("plan: dead time must be >= 0");
}

double epoch_rate(const SimulationPlan& plan, const Pulse& pulse,
                  double elapsed_s)
{
    const double n_a = intracavity_photon_number(
        pulse.power_w, pulse.detuning_hz, plan.device.optical,
        plan.laser_frequency_hz);
    const double n_b = occupancy_during_pulse(
        pulse.power_w, average_power(plan.sequence), plan.environment,
        plan.heating, plan.device.mechanical);

    // Filter transmission folds into the detection efficiency; the chain is
    // centered on the optical resonance where the scattered photons land.
    DetectorModel effective = plan.detector;
    effective.efficiency_total *=
        chain_transmission(plan.chain, 0.0, elapsed_s);

    const auto rates = sideband_rates(plan.device, n_a, n_b, effective);
    const double sideband =
        pulse.detuning_hz >= 0.0 ? rates.blue_hz : rates.red_hz;
    double total = spd_rate(sideband, plan.detector);
    if (plan.dead_time_s && *plan.dead_time_s > 0.0)
        total /= 1.0 + total * *plan.dead_time_s; // non-paralyzable thinning
    return total;
}

CountRecord simulate_counts(const SimulationPlan& plan, std::uint64_t stream)
{
    plan.validate();
    const auto timeline = expand_timeline(plan.sequence);

    struct Accumulator {
        int order = 0;
        double start_s = 0.0;
        double exposure_s = 0.0;
        double mean = 0.0;
    };
    std::map<std::string, Accumulator> totals;
    int next_order = 0;

    // Rates are constant for a given pulse shape and drift regime; memoize.
    std::map<std::tuple<std::string, double, double, bool>, double> rate_cache;
    const double window = plan.chain.drift.stable_window_s;

    for (const auto& interval : timeline) {
        const bool drifted = interval.start_s > window;
        const auto key = std::make_tuple(to_string(interval.pulse.label),
                                         interval.pulse.detuning_hz,
                                         interval.pulse.power_w, drifted);
        auto it = rate_cache.find(key);
        if (it == rate_cache.end())
            it = rate_cache
                     .emplace(key,
                              epoch_rate(plan, interval.pulse, interval.start_s))
                     .first;
        auto& acc = totals[to_string(interval.pulse.label)];
        if (acc.exposure_s == 0.0) {
            acc.order = next_order++;
            acc.start_s = interval.start_s;
        }
        const double duration = interval.end_s - interval.start_s;
        acc.exposure_s += duration;
        acc.mean += it->second * duration;
    }

    // Gaps see dark counts only.
    double on_time = 0.0;
    for (const auto& interval : timeline)
        on_time += interval.end_s - interval.start_s;
    const double gap_per_sequence = plan.sequence.total_duration_s - on_time;
    if (gap_per_sequence > 1e-15) {
        auto& acc = totals["dark-only"];
        acc.order = next_order++;
        acc.start_s = 0.0;
        acc.exposure_s = gap_per_sequence;
        acc.mean = plan.detector.dark_rate_hz * gap_per_sequence;
    }

    CountRecord record;
    record.seed = plan.seed;
    record.stream = stream;
    record.config_digest = plan.config_digest;

    std::vector<std::pair<std::string, Accumulator>> ordered(totals.begin(),
                                                             totals.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        return a.second.order < b.second.order;
    });

    SplitRng rng(plan.seed, stream);
    const double reps = static_cast<double>(plan.repetitions);
    int index = 0;
    for (const auto& [label, acc] : ordered) {
        CountEpoch e;
        e.index = index++;
        e.label = label;
        e.start_s = acc.start_s;
        e.exposure_s = acc.exposure_s * reps;
        e.counts = rng.poisson(acc.mean * reps);
        record.epochs.push_back(std::move(e));
    }
    return record;
}

std::vector<CountRecord> ensemble_counts(const SimulationPlan& plan,
                                         int n_ensembles)
{
    if (n_ensembles < 1)
        throw ValidationError("ensemble_counts: need at least one ensemble");
    std::vector<CountRecord> records;
    records.reserve(static_cast<std::size_t>(n_ensembles));
    for (int i = 0; i < n_ensembles; ++i)
        records.push_back(simulate_counts(plan, static_cast<std::uint64_t>(i)));
    return records;
}

double pump_leak_rate(const FilterChain& chain, double probe_flux_hz,
                      double sideband_offset_hz, double rejection)
{
    if (probe_flux_hz < 0.0)
        throw DomainError("pump_leak_rate: flux must be >= 0");
    if (!(rejection >= 1.0))
        throw DomainError("pump_leak_rate: rejection factor must be >= 1");
    return probe_flux_hz * chain_transmission(chain, sideband_offset_hz, 0.0)
        / rejection;
}

} // namespace sbt
