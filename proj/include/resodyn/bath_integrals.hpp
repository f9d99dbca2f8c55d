#pragma once

#include "resodyn/linalg.hpp"
#include "resodyn/model.hpp"

namespace resodyn {

struct QuadratureConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
    /// Multiplies the automatically chosen radial cutoff.
    double r_max_factor = 1.0;

    static QuadratureConfig create(double rel_tol, double abs_tol, double r_max_factor);
};

/// Radius beyond which exp(−2aR^m)·R^{2p+2} < abs_tol·1e-3, scaled by r_max_factor.
double radial_cutoff(const FormFactor& ff, const QuadratureConfig& cfg);

/// ⟨g, |k|⁻¹ g⟩ = ∫ |g(k)|²/|k| d³k by adaptive quadrature.
double inner_1_over_k(const FormFactor& ff, const QuadratureConfig& cfg = {});

/// Same integral through Γ((2p+2)/m) / (m (2a)^{(2p+2)/m}).
double inner_1_over_k_closed_form(const FormFactor& ff);

/// Thermal spectral density at zero frequency, the ε ↓ 0 limit of
/// (1/π)∫ coth(β|k|/2)|g|² ε/(|k|²+ε²) d³k. Zero unless p = −1/2.
double xi_zero(const FormFactor& ff, double beta, const QuadratureConfig& cfg = {});

/// Smoothed integral at a fixed ε (the sequence xi_zero extrapolates).
double xi_zero_at(const FormFactor& ff, double beta, double eps, const QuadratureConfig& cfg = {});

/// Decoherence function Γ(t) = ∫|g|² coth(β|k|/2) sin²(|k|t/2)/|k|² d³k.
double gamma_fn(const FormFactor& ff, double beta, double t, const QuadratureConfig& cfg = {});

/// S(t) = ½∫|g|² (|k|t − sin|k|t)/|k|² d³k.
double s_fn(const FormFactor& ff, double t, const QuadratureConfig& cfg = {});

/// Cached bath scalars for one (form factor, β) pair. Immutable.
class BathFunctions {
public:
    static BathFunctions compute(const FormFactor& ff, const BathParams& bath,
                                 const QuadratureConfig& cfg = {});

    double inner_1_over_k() const { return inner_; }
    double xi0() const { return xi0_; }
    /// lim Γ(t)/t, equal to (π/2)ξ(0).
    double gamma_infinity() const { return gamma_inf_; }
    const FormFactor& form_factor() const { return ff_; }
    double beta() const { return beta_; }
    const QuadratureConfig& quadrature() const { return cfg_; }

    double gamma(double t) const { return gamma_fn(ff_, beta_, t, cfg_); }
    double s(double t) const { return s_fn(ff_, t, cfg_); }

private:
    BathFunctions() = default;

    double inner_ = 0.0;
    double xi0_ = 0.0;
    double gamma_inf_ = 0.0;
    FormFactor ff_;
    double beta_ = 1.0;
    QuadratureConfig cfg_;
};

/// δ_{a,b} = −½(g_a² − g_b²)⟨g,|k|⁻¹g⟩ + i(π/2)(g_a − g_b)² ξ(0).
CMatrix delta_table(const SystemSpec& spec, const BathFunctions& bf);

}  // namespace resodyn
