#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sbt/config.hpp"
#include "sbt/errors.hpp"
#include "sbt/schema.hpp"

#include <string>

using namespace sbt;

namespace {

const std::string kFullConfig = R"(
# device under test
[device]
optical_frequency_hz = 196.78e12
kappa_intrinsic_hz = 1585e6
kappa_external_hz = 480e6
doublet_splitting_hz = 4.8e9
mechanical_frequency_hz = 1.085e9
mechanical_damping_hz = 6e6
g0_hz = 220e3

[detector]
efficiency_total = 0.26
dark_rate_hz = 11

[filters]
stage1_fwhm_hz = 10.07e6
stage1_fsr_hz = 5.06e9
stage1_peak_transmission = 0.707
stage2_fwhm_hz = 10e6
stage2_fsr_hz = 5.8e9
stage2_peak_transmission = 0.707
stable_window_s = 2.5
post_window_factor = 0.85

[environment]
base_temperature_k = 0.011

[heating]
fast_amplitude = 7009.56
fast_exponent = 0.5257
fast_timescale_s = 100e-9
slow_amplitude = 3504.78
slow_exponent = 0.5257
slow_timescale_s = 20e-6

[sequence]
pulse1_label = red
pulse1_detuning = -mech
pulse1_power_w = 10.625e-9
pulse1_duration_s = 4e-6
gap1_s = 1e-6
pulse2_label = blue
pulse2_detuning = +mech
pulse2_power_w = 10.625e-9
pulse2_duration_s = 4e-6
gap2_s = 1e-6
total_duration_s = 2.5

[campaign]
type = thermometry
repetitions = 2
seed = 41
)";

} // namespace

TEST_CASE("parsing sections, comments and values")
{
    const auto config = Config::parse_string(kFullConfig);
    CHECK(config.has_section("device"));
    CHECK(config.has_section("campaign"));
    CHECK_FALSE(config.has_section("nope"));
    CHECK(config.get_double("device", "g0_hz") == doctest::Approx(220e3));
    CHECK(config.get_string("campaign", "type") == "thermometry");
    CHECK(config.get_int("campaign", "repetitions", 1) == 2);
    CHECK(config.get_int("campaign", "absent", 7) == 7);
    CHECK(config.get_double("detector", "pump_leak_rate_hz", 0.0) == 0.0);
}

TEST_CASE("missing keys and sections raise ConfigError")
{
    const auto config = Config::parse_string(kFullConfig);
    CHECK_THROWS_AS(config.get_double("device", "nonexistent"), ConfigError);
    CHECK_THROWS_AS(config.section("nope"), ConfigError);
}

TEST_CASE("malformed lines report their line number")
{
    const std::string bad = "[device]\ng0_hz = 220e3\nthis is not a pair\n";
    try {
        Config::parse_string(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& error) {
        CHECK(std::string(error.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("duplicate keys are rejected")
{
    const std::string dup = "[device]\ng0_hz = 1\ng0_hz = 2\n";
    CHECK_THROWS_AS(Config::parse_string(dup), ConfigError);
}

TEST_CASE("values outside a section are rejected")
{
    CHECK_THROWS_AS(Config::parse_string("orphan = 1\n"), ConfigError);
}

TEST_CASE("non-numeric values raise on numeric access")
{
    const auto config = Config::parse_string("[a]\nx = banana\n");
    CHECK_THROWS_AS(config.get_double("a", "x"), ConfigError);
}

TEST_CASE("unknown keys are rejected after schema consumption")
{
    const std::string text = kFullConfig + "\n[device2]\n";
    auto with_typo = kFullConfig;
    with_typo.insert(with_typo.find("[detector]"),
                     "kappa_intrnsic_hz = 1\n");
    const auto config = Config::parse_string(with_typo);
    CHECK_THROWS_AS(
        [&] {
            load_device(config);
            config.ensure_consumed("device");
        }(),
        ConfigError);
}

TEST_CASE("full schema load yields consistent models")
{
    const auto config = Config::parse_string(kFullConfig);
    const auto device = load_device(config);
    CHECK(device.optical.kappa_total_hz() == doctest::Approx(2065e6));
    CHECK(device.optical.doublet_splitting_hz == doctest::Approx(4.8e9));
    const auto detector = load_detector(config);
    CHECK(detector.efficiency_total == doctest::Approx(0.26));
    const auto chain = load_filter_chain(config);
    REQUIRE(chain.stages.size() == 2);
    CHECK(chain.stages[1].fsr_hz == doctest::Approx(5.8e9));
    CHECK(chain.drift.post_window_factor == doctest::Approx(0.85));
    const auto heating = load_heating(config);
    CHECK(heating.slow_amplitude == doctest::Approx(3504.78));
    const auto env = load_environment(config);
    CHECK(env.base_temperature_k == doctest::Approx(0.011));
}

TEST_CASE("plan loading defaults the laser to the optical resonance")
{
    const auto config = Config::parse_string(kFullConfig);
    const auto plan = load_plan(config);
    CHECK(plan.laser_frequency_hz == doctest::Approx(196.78e12));
    CHECK(plan.repetitions == 2);
    CHECK(plan.seed == 41);
    CHECK_FALSE(plan.dead_time_s.has_value());
    CHECK(plan.config_digest.size() == 16);
    CHECK_NOTHROW(plan.validate());
}

TEST_CASE("canonical text and digest are stable under formatting noise")
{
    const auto a = Config::parse_string("[s]\nx = 1\ny = 2\n");
    const auto b = Config::parse_string("\n# hi\n[s]\n  x =   1\n\ny=2  ; tail\n");
    CHECK(a.canonical_text() == b.canonical_text());
    CHECK(fnv1a_digest(a.canonical_text()) == fnv1a_digest(b.canonical_text()));

    const auto c = Config::parse_string("[s]\nx = 1\ny = 3\n");
    CHECK(fnv1a_digest(a.canonical_text()) != fnv1a_digest(c.canonical_text()));

    CHECK(fnv1a_digest("").size() == 16);
    CHECK(fnv1a_digest("abc") == fnv1a_digest("abc"));
    CHECK(fnv1a_digest("abc") != fnv1a_digest("abd"));
}

TEST_CASE("parsing is total: random text either parses or throws ConfigError")
{
    const char* samples[] = {
        "", "[x]", "[]\n", "[x]\n=1\n", "[x]\nkey=\n", "[x]\nkey\n",
        "]bad[\n", "[x]\nkey = value = other\n", ";only a comment\n",
        "[x]\nkey = 1\n[y]\nkey = 1\n",
    };
    for (const auto* text : samples) {
        try {
            (void)Config::parse_string(text);
        } catch (const ConfigError&) {
            // acceptable outcome
        }
    }
    CHECK(true);
}
