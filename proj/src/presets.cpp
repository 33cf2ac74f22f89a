#include "sbt/campaign.hpp"

#include "sbt/errors.hpp"

namespace sbt {

namespace {

struct PresetEntry {
    const char* name;
    const char* text;
};

const PresetEntry kPresetTexts[] = {
#include "presets_embedded.inc"
};

} // namespace

const std::vector<PresetInfo>& list_presets()
{
    static const std::vector<PresetInfo> catalog = {
        {"fig1d", "doublet optical reflection spectrum and two-dip fit"},
        {"fig1e", "room-temperature mechanical spectrum and Lorentzian fit"},
        {"fig3a", "4 K detuning sweep, both sideband branches"},
        {"fig3b", "4 K power sweep, linearity and g0 extraction"},
        {"fig4a", "millikelvin thermometry at low power, occupancy estimate"},
        {"fig4b", "millikelvin power sweep, superlinear count rates"},
        {"fig4c", "millikelvin power sweep, occupancy and modal temperature"},
        {"fig4d", "duty-cycle sweep at fixed pulse-on power"},
        {"supp-fig7", "pump-probe delay sweep at constant average power"},
        {"supp-fig8", "average-power sweep via pulse delay from 1 to 96 us"},
    };
    return catalog;
}

const std::string& preset_text(const std::string& name)
{
    static const auto table = [] {
        std::vector<std::pair<std::string, std::string>> t;
        for (const auto& entry : kPresetTexts)
            t.emplace_back(entry.name, entry.text);
        return t;
    }();
    for (const auto& entry : table)
        if (entry.first == name)
            return entry.second;
    throw ConfigError("unknown preset '" + name + "'");
}

} // namespace sbt
