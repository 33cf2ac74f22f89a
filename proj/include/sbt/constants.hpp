#ifndef SBT_CONSTANTS_HPP
#define SBT_CONSTANTS_HPP

#include <numbers>

namespace sbt {

// CODATA 2018 exact values (SI redefinition).
inline constexpr double kPlanck = 6.62607015e-34;        // J s
inline constexpr double kBoltzmann = 1.380649e-23;       // J/K
inline constexpr double kSpeedOfLight = 299792458.0;     // m/s
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHbar = kPlanck / kTwoPi;

} // namespace sbt

#endif
