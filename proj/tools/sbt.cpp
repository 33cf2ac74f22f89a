// Campaign runner CLI: simulation, estimation and fitting front end.

#include "sbt/campaign.hpp"
#include "sbt/config.hpp"
#include "sbt/counting.hpp"
#include "sbt/errors.hpp"
#include "sbt/inference.hpp"
#include "sbt/schema.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw sbt::ConfigError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_or_print(const std::string& out_path, const std::string& content)
{
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out)
        throw sbt::ConfigError("cannot write '" + out_path + "'");
    out << content;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Pulsed sideband thermometry digital twin"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    std::uint64_t seed = 0;
    bool seed_set = false;
    app.add_option("--config", config_path, "configuration file")->envname("SBT_CONFIG");
    app.add_option("--out", out_path, "output file or directory");
    app.add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", seed, "RNG seed override")
        ->each([&](const std::string&) { seed_set = true; });

    auto* simulate = app.add_subcommand(
        "simulate", "simulate a count record from a configuration");

    auto* estimate = app.add_subcommand(
        "estimate", "phonon occupancy from a count record");
    std::string counts_path;
    double dark_rate = 0.0;
    double confidence = 0.95;
    std::string method = "profile";
    estimate->add_option("--counts", counts_path, "count record (csv or json)")
        ->required();
    estimate->add_option("--dark-rate", dark_rate, "dark count rate in Hz");
    estimate->add_option("--confidence", confidence, "confidence level");
    estimate->add_option("--method", method, "profile or bootstrap")
        ->check(CLI::IsMember({"profile", "bootstrap"}));

    auto* fit = app.add_subcommand("fit", "fit a spectrum or rate table");
    std::string model;
    std::string data_path;
    fit->add_option("--model", model, "doublet, mechanical or powerlaw")
        ->required()
        ->check(CLI::IsMember({"doublet", "mechanical", "powerlaw"}));
    fit->add_option("--data", data_path, "two/three-column data file")
        ->required();

    auto* sweep = app.add_subcommand(
        "sweep", "run a sweep-type campaign from a configuration");

    auto* preset = app.add_subcommand("preset", "shipped campaign presets");
    auto* preset_list = preset->add_subcommand("list", "catalog");
    std::string preset_name;
    auto* preset_show = preset->add_subcommand("show", "print a preset");
    preset_show->add_option("name", preset_name, "preset name")->required();
    auto* preset_run = preset->add_subcommand("run", "run a preset");
    preset_run->add_option("name", preset_name, "preset name")->required();
    std::string export_dir;
    auto* preset_export =
        preset->add_subcommand("export", "write preset files to a directory");
    preset_export->add_option("--dir", export_dir, "target directory")
        ->required();
    preset->require_subcommand(1);

    auto* report = app.add_subcommand("report", "summarize a run manifest");
    std::string report_dir = ".";
    report->add_option("--dir", report_dir, "campaign output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            if (config_path.empty())
                throw sbt::ConfigError("simulate requires --config");
            auto plan = sbt::load_plan(sbt::Config::parse_file(config_path));
            if (seed_set)
                plan.seed = seed;
            const auto record = sbt::simulate_counts(plan);
            write_or_print(out_path, format == "json" ? record.to_json()
                                                      : record.to_csv());
        } else if (estimate->parsed()) {
            const std::string text = slurp(counts_path);
            const auto record = text.find('{') != std::string::npos
                ? sbt::CountRecord::from_json(text)
                : sbt::CountRecord::from_csv(text);
            const auto* blue = record.epoch("blue");
            const auto* red = record.epoch("red");
            if (!blue || !red)
                throw sbt::EstimationError(
                    "count record lacks blue/red epochs");
            const auto result = sbt::estimate_occupancy(
                {static_cast<double>(blue->counts), blue->exposure_s},
                {static_cast<double>(red->counts), red->exposure_s}, dark_rate,
                confidence,
                method == "bootstrap" ? sbt::IntervalMethod::Bootstrap
                                      : sbt::IntervalMethod::ProfileLikelihood,
                seed);
            write_or_print(out_path, result.to_json());
        } else if (fit->parsed()) {
            const auto data = sbt::read_spectrum(slurp(data_path));
            std::string result;
            if (model == "doublet")
                result = sbt::fit_lorentzian_doublet(data.x, data.y).to_json();
            else if (model == "mechanical")
                result = sbt::fit_mechanical_spectrum(data.x, data.y).to_json();
            else
                result = sbt::fit_power_law(data.x, data.y, data.sigma).to_json();
            write_or_print(out_path, result);
        } else if (sweep->parsed()) {
            if (config_path.empty())
                throw sbt::ConfigError("sweep requires --config");
            sbt::CampaignOptions options;
            options.output_dir = out_path.empty() ? "." : out_path;
            options.format = format;
            if (seed_set)
                options.seed_override = seed;
            const auto outcome = sbt::run_campaign_file(config_path, options);
            for (const auto& error : outcome.errors)
                std::cerr << "analysis error: " << error << '\n';
            return outcome.exit_status;
        } else if (preset->parsed()) {
            if (preset_list->parsed()) {
                for (const auto& info : sbt::list_presets())
                    std::cout << info.name << "  " << info.description << '\n';
            } else if (preset_show->parsed()) {
                std::cout << sbt::preset_text(preset_name);
            } else if (preset_run->parsed()) {
                sbt::CampaignOptions options;
                options.output_dir = out_path.empty() ? preset_name : out_path;
                options.format = format;
                if (seed_set)
                    options.seed_override = seed;
                const auto config =
                    sbt::Config::parse_string(sbt::preset_text(preset_name));
                const auto outcome = sbt::run_campaign(config, options);
                for (const auto& error : outcome.errors)
                    std::cerr << "analysis error: " << error << '\n';
                for (const auto& file : outcome.outputs)
                    std::cout << options.output_dir << '/' << file << '\n';
                return outcome.exit_status;
            } else if (preset_export->parsed()) {
                std::filesystem::create_directories(export_dir);
                for (const auto& info : sbt::list_presets()) {
                    std::ofstream out(std::filesystem::path(export_dir)
                                      / (info.name + ".ini"));
                    out << sbt::preset_text(info.name);
                }
            }
        } else if (report->parsed()) {
            const auto manifest = nlohmann::json::parse(
                slurp((std::filesystem::path(report_dir) / "manifest.json")
                          .string()));
            std::cout << "campaign: " << manifest.value("campaign", "?") << '\n'
                      << "type:     " << manifest.value("type", "?") << '\n'
                      << "config:   " << manifest.value("config_digest", "?")
                      << '\n'
                      << "seed:     " << manifest.value("seed", 0ULL) << '\n';
            for (const auto& entry : manifest.value("outputs",
                                                    nlohmann::json::array()))
                std::cout << "  " << entry.value("path", "?") << "  "
                          << entry.value("digest", "?") << '\n';
            const auto errors =
                manifest.value("errors", nlohmann::json::array());
            if (!errors.empty()) {
                std::cout << "errors:\n";
                for (const auto& error : errors)
                    std::cout << "  " << error.get<std::string>() << '\n';
            }
        }
    } catch (const sbt::ConfigError& error) {
        std::cerr << "configuration error: " << error.what() << '\n';
        return 2;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << '\n';
        return 1;
    }
    return 0;
}
