#ifndef SBT_CAMPAIGN_HPP
#define SBT_CAMPAIGN_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sbt {

class Config;

struct CampaignOptions {
    std::string output_dir = ".";
    std::optional<std::uint64_t> seed_override;
    std::string format = "csv"; // csv | json (count records; fits are json)
};

struct CampaignOutcome {
    int exit_status = 0;
    std::vector<std::string> outputs; // paths relative to output_dir
    std::vector<std::string> errors;  // per-analysis failure notes
};

// Runs the campaign described by a parsed configuration: simulates, fits,
// and writes figure-data tables plus a manifest with content digests.
// Identical (config, seed) pairs produce byte-identical data files.
CampaignOutcome run_campaign(const Config& config,
                             const CampaignOptions& options);
CampaignOutcome run_campaign_file(const std::string& config_path,
                                  const CampaignOptions& options);

struct PresetInfo {
    std::string name;
    std::string description;
};

// Shipped campaign presets mirroring the reference measurements.
const std::vector<PresetInfo>& list_presets();
const std::string& preset_text(const std::string& name);

} // namespace sbt

#endif
