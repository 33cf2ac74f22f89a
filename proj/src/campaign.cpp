#include "sbt/campaign.hpp"

#include "sbt/config.hpp"
#include "sbt/constants.hpp"
#include "sbt/counting.hpp"
#include "sbt/errors.hpp"
#include "sbt/inference.hpp"
#include "sbt/rng.hpp"
#include "sbt/schema.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace sbt {

namespace {

std::string format_double(double value)
{
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

struct Writer {
    std::filesystem::path dir;
    std::vector<std::pair<std::string, std::string>> written; // name, digest

    void emit(const std::string& name, const std::string& content)
    {
        std::filesystem::create_directories(dir);
        std::ofstream out(dir / name, std::ios::binary);
        if (!out)
            throw NumericalError("cannot write output file " + name);
        out << content;
        written.emplace_back(name, fnv1a_digest(content));
    }
};

std::vector<double> log_grid(double start, double stop, int points)
{
    if (!(start > 0.0) || !(stop > start) || points < 2)
        throw ConfigError("sweep grid: need 0 < start < stop and >= 2 points");
    std::vector<double> grid(static_cast<std::size_t>(points));
    const double step = std::log(stop / start) / (points - 1);
    for (int i = 0; i < points; ++i)
        grid[static_cast<std::size_t>(i)] = start * std::exp(step * i);
    return grid;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_sigma = 0.0;
    double intercept_sigma = 0.0;
};

LinearFit weighted_linear_fit(const std::vector<double>& x,
                              const std::vector<double>& y,
                              const std::vector<double>& sigma)
{
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = 1.0 / (sigma[i] * sigma[i]);
        sw += w;
        sx += w * x[i];
        sy += w * y[i];
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    const double det = sw * sxx - sx * sx;
    if (!(det > 0.0))
        throw FitError("weighted_linear_fit: degenerate design");
    LinearFit fit;
    fit.slope = (sw * sxy - sx * sy) / det;
    fit.intercept = (sxx * sy - sx * sxy) / det;
    fit.slope_sigma = std::sqrt(sw / det);
    fit.intercept_sigma = std::sqrt(sxx / det);
    return fit;
}

// Slope of y = s * x through the origin.
LinearFit origin_fit(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& sigma)
{
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = 1.0 / (sigma[i] * sigma[i]);
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    if (!(sxx > 0.0))
        throw FitError("origin_fit: degenerate design");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.slope_sigma = std::sqrt(1.0 / sxx);
    return fit;
}

// Detected sideband rate (before dark counts) for a pulse of the given
// power and detuning within the plan's sequence.
double detected_rate(const SimulationPlan& plan, double power_w,
                     double detuning_hz, double average_power_w)
{
    const double n_a = intracavity_photon_number(
        power_w, detuning_hz, plan.device.optical, plan.laser_frequency_hz);
    const double n_b =
        occupancy_during_pulse(power_w, average_power_w, plan.environment,
                               plan.heating, plan.device.mechanical);
    DetectorModel effective = plan.detector;
    effective.efficiency_total *= chain_transmission(plan.chain, 0.0, 0.0);
    const auto rates = sideband_rates(plan.device, n_a, n_b, effective);
    return detuning_hz >= 0.0 ? rates.blue_hz : rates.red_hz;
}

void set_all_pulse_powers(PulseSequence& seq, double power_w)
{
    for (auto& element : seq.period_elements)
        if (auto* pulse = std::get_if<Pulse>(&element))
            pulse->power_w = power_w;
}

void run_thermometry(const Config& config, SimulationPlan plan, Writer& out)
{
    const double confidence =
        config.get_double("campaign", "confidence", 0.95);
    const auto record = simulate_counts(plan);
    out.emit("counts.csv", record.to_csv());
    out.emit("counts.json", record.to_json());

    const auto* blue = record.epoch("blue");
    const auto* red = record.epoch("red");
    if (!blue || !red)
        throw EstimationError("thermometry: record lacks blue/red epochs");
    const auto estimate = estimate_occupancy(
        {static_cast<double>(blue->counts), blue->exposure_s},
        {static_cast<double>(red->counts), red->exposure_s},
        plan.detector.dark_rate_hz, confidence,
        IntervalMethod::ProfileLikelihood, plan.seed);

    nlohmann::json j = nlohmann::json::parse(estimate.to_json());
    if (estimate.n_b > 0.0 && std::isfinite(estimate.n_b))
        j["modal_temperature_k"] =
            modal_temperature(estimate.n_b, plan.device.mechanical.frequency_hz);
    out.emit("occupancy.json", j.dump(2) + "\n");
}

void run_detuning_sweep(const Config& config, SimulationPlan plan, Writer& out)
{
    const double halfspan = config.get_double("campaign", "sweep_halfspan_hz");
    const auto points =
        static_cast<int>(config.get_int("campaign", "sweep_points", 41));
    const double exposure =
        config.get_double("campaign", "exposure_per_point_s");
    if (points < 3)
        throw ConfigError("detuning_sweep: need at least 3 points");

    const double omega = plan.device.mechanical.frequency_hz;
    const double power = [&] {
        for (const auto& e : plan.sequence.period_elements)
            if (const auto* p = std::get_if<Pulse>(&e))
                return p->power_w;
        throw ConfigError("detuning_sweep: sequence has no pulses");
    }();
    const double p_avg = average_power(plan.sequence);

    SplitRng rng(plan.seed, 0);
    std::ostringstream csv;
    csv << "detuning_hz,label,exposure_s,counts,rate_hz,rate_sigma_hz\n";
    const double step = 2.0 * halfspan / (points - 1);
    for (int branch = 0; branch < 2; ++branch) {
        const char* label = branch == 0 ? "blue" : "red";
        for (int i = 0; i < points; ++i) {
            const double magnitude = omega - halfspan + step * i;
            const double detuning = branch == 0 ? magnitude : -magnitude;
            const double response =
                sweep_response(plan.chain, plan.device.mechanical, detuning);
            const double rate =
                detected_rate(plan, power, detuning, p_avg) * response;
            const double mean =
                (rate + plan.detector.dark_rate_hz) * exposure;
            const auto counts = rng.poisson(mean);
            const double measured =
                counts / exposure - plan.detector.dark_rate_hz;
            const double sigma = std::sqrt(std::max<double>(counts, 1)) / exposure;
            csv << format_double(detuning) << ',' << label << ','
                << format_double(exposure) << ',' << counts << ','
                << format_double(measured) << ',' << format_double(sigma)
                << '\n';
        }
    }
    out.emit("sweep.csv", csv.str());
}

void run_power_sweep(const Config& config, SimulationPlan plan, Writer& out)
{
    const auto powers = log_grid(
        config.get_double("campaign", "power_start_w"),
        config.get_double("campaign", "power_stop_w"),
        static_cast<int>(config.get_int("campaign", "power_points", 10)));
    const double exposure =
        config.get_double("campaign", "exposure_per_point_s");
    const bool do_power_law =
        config.get_int("campaign", "fit_power_law", 0) != 0;
    const bool do_g0 = config.get_int("campaign", "extract_g0", 0) != 0;
    const bool do_occupancy =
        config.get_int("campaign", "estimate_occupancy", 0) != 0;
    const double confidence =
        config.get_double("campaign", "confidence", 0.95);

    const double omega = plan.device.mechanical.frequency_hz;
    SplitRng rng(plan.seed, 0);

    std::ostringstream csv;
    csv << "power_w,n_a,label,exposure_s,counts,rate_hz,rate_sigma_hz\n";
    std::ostringstream occ_csv;
    occ_csv << "power_w,n_b_model,n_b_est,ci_low,ci_high,modal_temperature_k\n";

    std::vector<double> fit_powers, fit_rates, fit_sigmas;
    std::vector<double> photon_numbers, sum_rates, sum_sigmas;

    for (const double power : powers) {
        PulseSequence seq = plan.sequence;
        set_all_pulse_powers(seq, power);
        const double p_avg = average_power(seq);
        SimulationPlan point_plan = plan;
        point_plan.sequence = seq;

        const double n_a = intracavity_photon_number(
            power, omega, plan.device.optical, plan.laser_frequency_hz);
        const double rate_blue = detected_rate(point_plan, power, omega, p_avg);
        const double rate_red = detected_rate(point_plan, power, -omega, p_avg);

        double measured[2];
        double sigma[2];
        std::uint64_t counts[2];
        const double true_rate[2] = {rate_blue, rate_red};
        const char* labels[2] = {"blue", "red"};
        for (int k = 0; k < 2; ++k) {
            const double mean =
                (true_rate[k] + plan.detector.dark_rate_hz) * exposure;
            counts[k] = rng.poisson(mean);
            measured[k] = counts[k] / exposure - plan.detector.dark_rate_hz;
            sigma[k] = std::sqrt(std::max<double>(counts[k], 1)) / exposure;
            csv << format_double(power) << ',' << format_double(n_a) << ','
                << labels[k] << ',' << format_double(exposure) << ','
                << counts[k] << ',' << format_double(measured[k]) << ','
                << format_double(sigma[k]) << '\n';
        }

        if (measured[0] > 0.0) {
            fit_powers.push_back(power);
            fit_rates.push_back(measured[0]);
            fit_sigmas.push_back(sigma[0]);
        }
        photon_numbers.push_back(n_a);
        sum_rates.push_back(measured[0] + measured[1]);
        sum_sigmas.push_back(std::hypot(sigma[0], sigma[1]));

        if (do_occupancy) {
            const double n_b_model = occupancy_during_pulse(
                power, p_avg, plan.environment, plan.heating,
                plan.device.mechanical);
            const auto estimate = estimate_occupancy(
                {static_cast<double>(counts[0]), exposure},
                {static_cast<double>(counts[1]), exposure},
                plan.detector.dark_rate_hz, confidence,
                IntervalMethod::ProfileLikelihood, plan.seed);
            const double temperature =
                estimate.n_b > 0.0 && std::isfinite(estimate.n_b)
                ? modal_temperature(estimate.n_b, omega)
                : 0.0;
            occ_csv << format_double(power) << ',' << format_double(n_b_model)
                    << ',' << format_double(estimate.n_b) << ','
                    << format_double(estimate.ci_low) << ','
                    << format_double(estimate.ci_high) << ','
                    << format_double(temperature) << '\n';
        }
    }
    out.emit("rates.csv", csv.str());
    if (do_occupancy)
        out.emit("occupancy.csv", occ_csv.str());

    if (do_power_law) {
        // Unweighted in log-log space: every decade of the sweep carries the
        // same weight in the exponent, as in the usual power-law analysis.
        const auto fit = fit_power_law(fit_powers, fit_rates);
        out.emit("power_law.json", fit.to_json());
    }
    (void)fit_sigmas;
    if (do_g0) {
        const auto slope = origin_fit(photon_numbers, sum_rates, sum_sigmas);
        const double thermal = bose_einstein_occupancy(
            omega, plan.environment.base_temperature_k);
        DetectorModel effective = plan.detector;
        effective.efficiency_total *= chain_transmission(plan.chain, 0.0, 0.0);
        const auto g0 = extract_g0(slope.slope, slope.slope_sigma, plan.device,
                                   effective, thermal, SidebandConvention::Sum);
        nlohmann::json j;
        j["slope_hz_per_photon"] = slope.slope;
        j["slope_sigma"] = slope.slope_sigma;
        j["thermal_occupancy"] = thermal;
        j["convention"] = "sum";
        j["g0_hz"] = g0.g0_hz;
        j["g0_sigma_hz"] = g0.sigma_hz;
        out.emit("g0.json", j.dump(2) + "\n");
    }
}

void run_duty_cycle_sweep(const Config& config, SimulationPlan plan,
                          Writer& out)
{
    const auto taus = log_grid(
        config.get_double("campaign", "tau_start_s"),
        config.get_double("campaign", "tau_stop_s"),
        static_cast<int>(config.get_int("campaign", "tau_points", 10)));
    const double exposure =
        config.get_double("campaign", "exposure_per_point_s");
    const double confidence =
        config.get_double("campaign", "confidence", 0.95);

    const double omega = plan.device.mechanical.frequency_hz;
    SplitRng rng(plan.seed, 0);

    std::ostringstream csv;
    csv << "tau_s,duty_cycle,p_avg_w,n_b_model,blue_counts,red_counts,"
           "exposure_s,n_b_est,ci_low,ci_high\n";
    for (const double tau : taus) {
        PulseSequence seq = plan.sequence;
        // Replace every gap with the swept delay.
        for (auto& element : seq.period_elements)
            if (std::holds_alternative<double>(element))
                element = tau;
        seq.validate();
        const double dc = duty_cycle(seq);
        const double p_avg = average_power(seq);
        SimulationPlan point_plan = plan;
        point_plan.sequence = seq;

        const double power = [&] {
            for (const auto& e : seq.period_elements)
                if (const auto* p = std::get_if<Pulse>(&e))
                    return p->power_w;
            throw ConfigError("duty_cycle_sweep: no pulses");
        }();
        const double n_b_model = occupancy_during_pulse(
            power, p_avg, plan.environment, plan.heating,
            plan.device.mechanical);
        const double rate_blue = detected_rate(point_plan, power, omega, p_avg);
        const double rate_red = detected_rate(point_plan, power, -omega, p_avg);
        const auto blue_counts = rng.poisson(
            (rate_blue + plan.detector.dark_rate_hz) * exposure);
        const auto red_counts = rng.poisson(
            (rate_red + plan.detector.dark_rate_hz) * exposure);
        const auto estimate = estimate_occupancy(
            {static_cast<double>(blue_counts), exposure},
            {static_cast<double>(red_counts), exposure},
            plan.detector.dark_rate_hz, confidence,
            IntervalMethod::ProfileLikelihood, plan.seed);
        csv << format_double(tau) << ',' << format_double(dc) << ','
            << format_double(p_avg) << ',' << format_double(n_b_model) << ','
            << blue_counts << ',' << red_counts << ','
            << format_double(exposure) << ',' << format_double(estimate.n_b)
            << ',' << format_double(estimate.ci_low) << ','
            << format_double(estimate.ci_high) << '\n';
    }
    out.emit("duty.csv", csv.str());
}

void run_pump_probe(const Config& config, SimulationPlan plan, Writer& out)
{
    const auto delays = log_grid(
        config.get_double("campaign", "delay_start_s"),
        config.get_double("campaign", "delay_stop_s"),
        static_cast<int>(config.get_int("campaign", "delay_points", 10)));
    const double period = config.get_double("campaign", "period_s");
    const double exposure =
        config.get_double("campaign", "exposure_per_point_s");

    const Pulse* pump = nullptr;
    const Pulse* probe = nullptr;
    for (const auto& element : plan.sequence.period_elements) {
        if (const auto* pulse = std::get_if<Pulse>(&element)) {
            if (pulse->label == PulseLabel::Pump && !pump)
                pump = pulse;
            if (pulse->label == PulseLabel::Probe && !probe)
                probe = pulse;
        }
    }
    if (!pump || !probe)
        throw ConfigError("pump_probe: sequence must define pump and probe pulses");

    SplitRng rng(plan.seed, 0);
    std::ostringstream csv;
    csv << "delay_s,n_b_model,exposure_s,counts,rate_hz,rate_sigma_hz\n";
    std::vector<double> xs, ys, sigmas;
    for (const double delay : delays) {
        const double n_b = pump_probe_occupancy(
            *pump, *probe, delay, period, plan.environment, plan.heating,
            plan.device.mechanical);
        const double n_a = intracavity_photon_number(
            probe->power_w, probe->detuning_hz, plan.device.optical,
            plan.laser_frequency_hz);
        DetectorModel effective = plan.detector;
        effective.efficiency_total *= chain_transmission(plan.chain, 0.0, 0.0);
        const auto rates = sideband_rates(plan.device, n_a, n_b, effective);
        const double rate =
            probe->detuning_hz >= 0.0 ? rates.blue_hz : rates.red_hz;
        const auto counts =
            rng.poisson((rate + plan.detector.dark_rate_hz) * exposure);
        const double measured = counts / exposure - plan.detector.dark_rate_hz;
        const double sigma = std::sqrt(std::max<double>(counts, 1)) / exposure;
        csv << format_double(delay) << ',' << format_double(n_b) << ','
            << format_double(exposure) << ',' << counts << ','
            << format_double(measured) << ',' << format_double(sigma) << '\n';
        xs.push_back(delay);
        ys.push_back(measured);
        sigmas.push_back(sigma);
    }
    out.emit("pumpprobe.csv", csv.str());

    const auto flat = weighted_linear_fit(xs, ys, sigmas);
    nlohmann::json j;
    j["slope_hz_per_s"] = flat.slope;
    j["slope_sigma"] = flat.slope_sigma;
    j["intercept_hz"] = flat.intercept;
    j["intercept_sigma"] = flat.intercept_sigma;
    j["slope_significance"] =
        flat.slope_sigma > 0.0 ? flat.slope / flat.slope_sigma : 0.0;
    out.emit("flatness.json", j.dump(2) + "\n");
}

void run_doublet_fit(const Config& config, Writer& out)
{
    const auto device = load_device(config);
    const double span = config.get_double("campaign", "span_hz");
    const auto points =
        static_cast<int>(config.get_int("campaign", "points", 2001));
    const double noise = config.get_double("campaign", "noise_rms", 0.0);
    const auto seed =
        static_cast<std::uint64_t>(config.get_int("campaign", "seed", 0));

    const double center = device.optical.resonance_frequency_hz;
    const double splitting = device.optical.doublet_splitting_hz;
    const double kappa = device.optical.kappa_total_hz();
    const double depth = 4.0 * device.optical.kappa_intrinsic_hz
        * device.optical.kappa_external_hz / (kappa * kappa);

    SplitRng rng(seed, 0);
    std::vector<double> freq(static_cast<std::size_t>(points));
    std::vector<double> refl(static_cast<std::size_t>(points));
    std::ostringstream csv;
    csv << "frequency_hz,reflection\n";
    for (int i = 0; i < points; ++i) {
        const double f = center - 0.5 * span + span * i / (points - 1);
        const double x1 = f - (center - 0.5 * splitting);
        const double x2 = f - (center + 0.5 * splitting);
        const double h = 0.5 * kappa;
        double r = 1.0 - depth * h * h / (x1 * x1 + h * h)
            - depth * h * h / (x2 * x2 + h * h);
        if (noise > 0.0)
            r += noise * rng.normal();
        freq[static_cast<std::size_t>(i)] = f;
        refl[static_cast<std::size_t>(i)] = r;
        csv << format_double(f) << ',' << format_double(r) << '\n';
    }
    out.emit("spectrum.csv", csv.str());
    const auto fit = fit_lorentzian_doublet(freq, refl);
    out.emit("doublet_fit.json", fit.to_json());
}

void run_mechanical_fit(const Config& config, Writer& out)
{
    const auto device = load_device(config);
    const double span = config.get_double("campaign", "span_hz");
    const auto points =
        static_cast<int>(config.get_int("campaign", "points", 1201));
    const double amplitude = config.get_double("campaign", "amplitude", 1.0);
    const double background = config.get_double("campaign", "background", 0.0);
    const double noise = config.get_double("campaign", "noise_rms", 0.0);
    const auto seed =
        static_cast<std::uint64_t>(config.get_int("campaign", "seed", 0));

    const double center = device.mechanical.frequency_hz;
    const double fwhm = device.mechanical.damping_hz;

    SplitRng rng(seed, 0);
    std::vector<double> freq(static_cast<std::size_t>(points));
    std::vector<double> psd(static_cast<std::size_t>(points));
    std::ostringstream csv;
    csv << "frequency_hz,psd\n";
    for (int i = 0; i < points; ++i) {
        const double f = center - 0.5 * span + span * i / (points - 1);
        const double x = f - center;
        const double h = 0.5 * fwhm;
        double value = background + amplitude * h * h / (x * x + h * h);
        if (noise > 0.0)
            value += noise * rng.normal();
        freq[static_cast<std::size_t>(i)] = f;
        psd[static_cast<std::size_t>(i)] = value;
        csv << format_double(f) << ',' << format_double(value) << '\n';
    }
    out.emit("spectrum.csv", csv.str());
    const auto fit = fit_mechanical_spectrum(freq, psd);
    out.emit("mechanical_fit.json", fit.to_json());
}

} // namespace

CampaignOutcome run_campaign(const Config& config,
                             const CampaignOptions& options)
{
    const std::string type = config.get_string("campaign", "type");
    const std::string name = config.get_string("campaign", "name", type);

    Writer writer{options.output_dir, {}};
    CampaignOutcome outcome;

    auto guarded = [&](const char* stage, const std::function<void()>& step) {
        try {
            step();
        } catch (const std::exception& error) {
            outcome.errors.push_back(std::string(stage) + ": " + error.what());
        }
    };

    const bool needs_plan = type == "thermometry" || type == "detuning_sweep"
        || type == "power_sweep" || type == "duty_cycle_sweep"
        || type == "pump_probe";

    if (needs_plan) {
        SimulationPlan plan = load_plan(config);
        if (options.seed_override)
            plan.seed = *options.seed_override;
        if (type == "thermometry")
            guarded("thermometry", [&] { run_thermometry(config, plan, writer); });
        else if (type == "detuning_sweep")
            guarded("detuning_sweep",
                    [&] { run_detuning_sweep(config, plan, writer); });
        else if (type == "power_sweep")
            guarded("power_sweep",
                    [&] { run_power_sweep(config, plan, writer); });
        else if (type == "duty_cycle_sweep")
            guarded("duty_cycle_sweep",
                    [&] { run_duty_cycle_sweep(config, plan, writer); });
        else
            guarded("pump_probe", [&] { run_pump_probe(config, plan, writer); });
    } else if (type == "doublet_fit") {
        guarded("doublet_fit", [&] { run_doublet_fit(config, writer); });
    } else if (type == "mechanical_fit") {
        guarded("mechanical_fit", [&] { run_mechanical_fit(config, writer); });
    } else {
        throw ConfigError("unknown campaign type '" + type + "'");
    }

    // Manifest: every output with a content digest plus run provenance.
    nlohmann::json manifest;
    manifest["campaign"] = name;
    manifest["type"] = type;
    manifest["config_digest"] = fnv1a_digest(config.canonical_text());
    manifest["seed"] = options.seed_override
        ? *options.seed_override
        : static_cast<std::uint64_t>(config.get_int("campaign", "seed", 0));
    manifest["version"] = "1.0.0";
    manifest["outputs"] = nlohmann::json::array();
    for (const auto& [file, digest] : writer.written) {
        manifest["outputs"].push_back({{"path", file}, {"digest", digest}});
        outcome.outputs.push_back(file);
    }
    manifest["errors"] = outcome.errors;
    writer.emit("manifest.json", manifest.dump(2) + "\n");
    outcome.outputs.push_back("manifest.json");
    outcome.exit_status = outcome.errors.empty() ? 0 : 1;
    return outcome;
}

CampaignOutcome run_campaign_file(const std::string& config_path,
                                  const CampaignOptions& options)
{
    return run_campaign(Config::parse_file(config_path), options);
}

} // namespace sbt
