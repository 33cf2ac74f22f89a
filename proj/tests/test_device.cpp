#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sbt/constants.hpp"
#include "sbt/device.hpp"
#include "sbt/errors.hpp"

#include <cmath>
#include <limits>

using namespace sbt;

namespace {

OpticalMode paper_optical()
{
    OpticalMode mode;
    mode.resonance_frequency_hz = 196.78e12;
    mode.kappa_intrinsic_hz = 1585e6;
    mode.kappa_external_hz = 480e6;
    return mode;
}

DeviceModel paper_device()
{
    DeviceModel device;
    device.optical = paper_optical();
    device.mechanical = {1.085e9, 6e6};
    device.g0_hz = 220e3;
    return device;
}

constexpr double kMechFrequency = 1.085e9;

} // namespace

TEST_CASE("bose_einstein_occupancy anchors")
{
    CHECK(bose_einstein_occupancy(kMechFrequency, 4.0)
          == doctest::Approx(76.318).epsilon(1e-3));
    CHECK(bose_einstein_occupancy(kMechFrequency, 0.011)
          == doctest::Approx(0.008871).epsilon(1e-3));
    CHECK(bose_einstein_occupancy(kMechFrequency, 0.0) == 0.0);
    CHECK(bose_einstein_occupancy(12.3e9, 0.0) == 0.0);
}

TEST_CASE("bose_einstein_occupancy domain errors")
{
    CHECK_THROWS_AS(bose_einstein_occupancy(kMechFrequency, -0.1), DomainError);
    CHECK_THROWS_AS(bose_einstein_occupancy(-1.0, 1.0), DomainError);
    CHECK_THROWS_AS(
        bose_einstein_occupancy(std::numeric_limits<double>::quiet_NaN(), 1.0),
        DomainError);
}

TEST_CASE("bose_einstein_occupancy monotonicity")
{
    double previous = 0.0;
    for (double t : {0.01, 0.05, 0.3, 1.0, 4.0, 30.0}) {
        const double n = bose_einstein_occupancy(kMechFrequency, t);
        CHECK(n > previous);
        previous = n;
    }
    previous = std::numeric_limits<double>::infinity();
    for (double f : {0.3e9, 1.085e9, 5e9, 20e9}) {
        const double n = bose_einstein_occupancy(f, 4.0);
        CHECK(n < previous);
        previous = n;
    }
}

TEST_CASE("modal_temperature inverts the occupancy")
{
    CHECK(modal_temperature(0.0089, kMechFrequency)
          == doctest::Approx(0.011).epsilon(1e-3));
    CHECK(modal_temperature(0.66, kMechFrequency)
          == doctest::Approx(0.0565).epsilon(1e-2));
    for (double t : {0.01, 0.1, 1.0, 4.0}) {
        const double n = bose_einstein_occupancy(kMechFrequency, t);
        CHECK(modal_temperature(n, kMechFrequency)
              == doctest::Approx(t).epsilon(1e-9));
    }
    CHECK_THROWS_AS(modal_temperature(0.0, kMechFrequency), DomainError);
    CHECK_THROWS_AS(modal_temperature(-1.0, kMechFrequency), DomainError);
}

TEST_CASE("intracavity photon number at paper parameters")
{
    const auto optical = paper_optical();
    const double laser = kSpeedOfLight / 1523.49e-9;
    CHECK(intracavity_photon_number(8.5e-9, 1.085e9, optical, laser)
          == doctest::Approx(2.220).epsilon(1e-3));
    CHECK(intracavity_photon_number(8.5e-9, -1.085e9, optical, laser)
          == doctest::Approx(2.220).epsilon(1e-3));
    CHECK(intracavity_photon_number(8.5e-9, 0.0, optical, laser)
          == doctest::Approx(4.672).epsilon(1e-3));
    CHECK(intracavity_photon_number(0.0, 1e9, optical, laser) == 0.0);
    CHECK_THROWS_AS(
        intracavity_photon_number(std::numeric_limits<double>::infinity(), 0.0,
                                  optical, laser),
        DomainError);
}

TEST_CASE("intracavity photon number is even in detuning and peaks at zero")
{
    const auto optical = paper_optical();
    const double laser = kSpeedOfLight / 1523.49e-9;
    double previous = intracavity_photon_number(1e-9, 0.0, optical, laser);
    for (double detuning : {0.2e9, 0.5e9, 1.085e9, 3e9}) {
        const double plus =
            intracavity_photon_number(1e-9, detuning, optical, laser);
        const double minus =
            intracavity_photon_number(1e-9, -detuning, optical, laser);
        CHECK(plus == doctest::Approx(minus).epsilon(1e-12));
        CHECK(plus < previous);
        previous = plus;
    }
}

TEST_CASE("sideband rates at paper parameters")
{
    const auto device = paper_device();
    DetectorModel detector;
    const auto rates = sideband_rates(device, 1.0, 0.0, detector);
    CHECK(rates.blue_hz == doctest::Approx(136.93).epsilon(1e-3));
    CHECK(rates.red_hz == 0.0);

    const auto doubled = sideband_rates(device, 2.0, 0.0, detector);
    CHECK(doubled.blue_hz == doctest::Approx(2.0 * rates.blue_hz));
}

TEST_CASE("sideband asymmetry is constant in occupancy")
{
    const auto device = paper_device();
    DetectorModel detector;
    detector.efficiency_total = 0.13;
    const double n_a = 3.7;
    const auto base = sideband_rates(device, n_a, 0.0, detector);
    for (double n_b : {0.0, 0.1, 0.66, 1.0, 5.0, 80.0}) {
        const auto rates = sideband_rates(device, n_a, n_b, detector);
        CHECK(rates.blue_hz > rates.red_hz);
        CHECK(rates.blue_hz - rates.red_hz
              == doctest::Approx(base.blue_hz).epsilon(1e-12));
    }
}

TEST_CASE("occupancy_from_rates inverts the asymmetry")
{
    CHECK(occupancy_from_rates(2.515, 1.0) == doctest::Approx(0.66).epsilon(1e-3));
    CHECK(occupancy_from_rates(42.0, 0.0) == 0.0);
    CHECK_THROWS_AS(occupancy_from_rates(1.0, 1.0), EstimationError);
    CHECK_THROWS_AS(occupancy_from_rates(1.0, 2.0), EstimationError);

    const auto device = paper_device();
    DetectorModel detector;
    detector.efficiency_total = 0.4;
    for (double n_b : {0.1, 1.0, 80.0}) {
        const auto rates = sideband_rates(device, 2.5, n_b, detector);
        CHECK(occupancy_from_rates(rates.blue_hz, rates.red_hz)
              == doctest::Approx(n_b).epsilon(1e-12));
    }
}

TEST_CASE("spd_rate sums signal, dark and leak contributions")
{
    DetectorModel detector;
    detector.dark_rate_hz = 11.0;
    CHECK(spd_rate(137.0, detector) == doctest::Approx(148.0));
    CHECK(spd_rate(0.0, detector) == doctest::Approx(11.0));
    detector.dark_rate_hz = 0.0;
    detector.pump_leak_rate_hz = 5.0;
    CHECK(spd_rate(100.0, detector) == doctest::Approx(105.0));
}

TEST_CASE("thermal ground-state probability")
{
    CHECK(thermal_ground_probability(0.66) == doctest::Approx(0.602).epsilon(2e-3));
    CHECK(thermal_ground_probability(0.0) == 1.0);
    CHECK(thermal_ground_probability(1.0) == 0.5);
    CHECK_THROWS_AS(thermal_ground_probability(-0.5), DomainError);
}

TEST_CASE("model validation catches bad parameters")
{
    auto device = paper_device();
    CHECK_NOTHROW(device.validate());
    CHECK(device.optical.loaded_q() == doctest::Approx(95293.0).epsilon(1e-3));
    CHECK(device.mechanical.quality() == doctest::Approx(180.83).epsilon(1e-3));
    CHECK(device.sideband_resolution() > 0.0);

    device.g0_hz = 0.0;
    CHECK_THROWS_AS(device.validate(), ValidationError);

    OpticalMode bad = paper_optical();
    bad.kappa_external_hz = -1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    DetectorModel detector;
    detector.efficiency_total = 1.5;
    CHECK_THROWS_AS(detector.validate(), ValidationError);
}
