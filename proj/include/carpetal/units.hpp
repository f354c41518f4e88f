#pragma once

#include <numbers>

namespace carpetal {

/// Reduced Planck constant (CODATA 2018, exact in SI since 2019).
inline constexpr double kHbar = 1.054571817e-34;
inline constexpr double kPlanck = 2.0 * std::numbers::pi * kHbar;

inline constexpr double kNanometre = 1e-9;
inline constexpr double kNeutronMass = 1.675e-27;

}  // namespace carpetal
