#pragma once

#include <vector>

#include "resodyn/bath_integrals.hpp"
#include "resodyn/linalg.hpp"
#include "resodyn/model.hpp"
#include "resodyn/resonances.hpp"

namespace resodyn {

/// Exact σ = 0 reduced dynamics: [ρ_t]_{a,b} = [ρ_0]_{a,b} exp(iλ²α_{a,b}(t)),
/// α_{a,b}(t) = (g_a² − g_b²)S(t) + i(g_a − g_b)²Γ(t).
class DephasingPropagator {
public:
    DephasingPropagator(SystemSpec spec, BathFunctions bath, double lambda);

    cplx alpha(int a, int b, double t) const;
    DensityMatrix evolve(const DensityMatrix& rho0, double t) const;

    const SystemSpec& spec() const { return spec_; }
    double lambda() const { return lambda_; }

private:
    SystemSpec spec_;
    BathFunctions bath_;
    double lambda_;
};

/// Elementwise dephasing map for given values of Γ(t) and S(t). Shared by the
/// continuum propagator and the discrete-bath oracle.
CMatrix apply_dephasing(const RVector& g_levels, double lambda, double gamma_value,
                        double s_value, const CMatrix& rho0);

/// Throws SigmaNotZero unless cp.sigma() == 0.
DensityMatrix dephasing_exact(const SystemSpec& spec, const BathFunctions& bf,
                              const CouplingParams& cp, const DensityMatrix& rho0, double t);

enum class DiagonalRates {
    /// ε_{c,c} = 2i(σ²/λ²)ξ_c
    Perturbative,
    /// labeled diagonal-sector eigenvalues of the effective operator
    Numeric,
};

/// Leading-order reduced dynamics for σ ≪ |λ|: off-diagonals rotate/decay
/// with ε_{b,a}, populations relax through the T-matrix channels.
class PerturbativePropagator {
public:
    PerturbativePropagator(const SystemSpec& spec, const BathFunctions& bf,
                           const CouplingParams& cp,
                           DiagonalRates rates = DiagonalRates::Perturbative);

    /// e^{itε_{b,a}}[ρ_0]_{a,b}, a ≠ b.
    cplx offdiag(const CMatrix& rho0, double t, int a, int b) const;

    /// 1/N + Σ_b D_{a,b}(t)[ρ_0]_{b,b}.
    double diag(const CMatrix& rho0, double t, int a) const;

    /// D(t) with D_{a,b} = Σ_{c≥2} e^{itε_{c,c}} conj([φ_c^T]_b)[φ_c^T]_a.
    CMatrix d_matrix(double t) const;

    CMatrix evolve(const CMatrix& rho0, double t) const;

    const ResonanceSpectrum& spectrum() const { return spectrum_; }
    const TMatrix& t_matrix() const { return t_; }
    /// ε_{c,c} as used by the population channels (0-based c).
    cplx diagonal_rate(int c) const { return diag_eps_(c); }

private:
    int n_;
    CouplingParams cp_;
    ResonanceSpectrum spectrum_;
    TMatrix t_;
    CVector diag_eps_;
};

cplx reduced_offdiag(const SystemSpec& spec, const BathFunctions& bf, const CouplingParams& cp,
                     const DensityMatrix& rho0, double t, int a, int b);

double reduced_diag(const SystemSpec& spec, const BathFunctions& bf, const CouplingParams& cp,
                    const DensityMatrix& rho0, double t, int a);

/// Trace-norm distance to the set of matrices diagonal in the G basis,
/// ‖ρ − diag(ρ)‖₁.
double manifold_distance(const CMatrix& rho);

struct ManifoldBoundRow {
    double t = 0.0;
    double distance = 0.0;
    double bound = 0.0;
};

struct ManifoldBoundReport {
    double constant = 0.0;  ///< C = N²
    double gamma_g = 0.0;   ///< min_{a≠b}(g_a − g_b)²
    double max_ratio = 0.0; ///< max distance/bound over rows with bound > 0
    bool holds = true;
    std::vector<ManifoldBoundRow> rows;
};

/// Checks dist(M, ρ_t) ≤ N² e^{−λ²γ_G Γ(t)} dist(M, ρ_0) on the σ = 0 exact
/// dynamics. Throws SigmaNotZero for σ ≠ 0.
ManifoldBoundReport manifold_bound_check(const SystemSpec& spec, const BathFunctions& bf,
                                         const CouplingParams& cp, const DensityMatrix& rho0,
                                         const std::vector<double>& t_grid);

/// 0 followed by points−1 geometrically spaced times ending at t_max; the
/// first positive time is t_max·1e-3.
std::vector<double> geometric_time_grid(double t_max, int points);

/// Geometric grid spanning [0, 20/min Im ε] over the non-zero resonances.
std::vector<double> default_time_grid(const ResonanceSpectrum& spectrum, int points);

}  // namespace resodyn
