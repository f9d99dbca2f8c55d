#pragma once

#include <cmath>

#include "resodyn/bath_integrals.hpp"
#include "resodyn/model.hpp"

namespace resodyn::testing {

inline constexpr double kPi = 3.14159265358979323846;

// p = −1/2, a = 1, m = 1, ∫|g₁|² = 4π, β = 1: ⟨g,|k|⁻¹g⟩ = 2π, ξ(0) = 4π.
inline FormFactor ohmic() { return FormFactor::create(-0.5, 1.0, 1, 4.0 * kPi); }

inline const BathFunctions& ohmic_bath() {
    static const BathFunctions bf = BathFunctions::compute(ohmic(), BathParams::create(1.0));
    return bf;
}

inline double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

}  // namespace resodyn::testing
