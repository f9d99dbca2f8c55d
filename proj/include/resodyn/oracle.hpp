#pragma once

#include <optional>
#include <string>
#include <vector>

#include "resodyn/bath_integrals.hpp"
#include "resodyn/linalg.hpp"
#include "resodyn/model.hpp"

namespace resodyn::oracle {

/// Finite set of bosonic modes standing in for the continuum bath.
class DiscreteBath {
public:
    static DiscreteBath create(std::vector<double> omega, std::vector<double> coupling,
                               double beta);

    /// Log-spaced radial shells on [r_min, r_max]; c_j² is the weight of
    /// |g|² d³k over shell j (midpoint rule in log r).
    static DiscreteBath log_grid(const FormFactor& ff, double beta, int modes, double r_min,
                                 double r_max);

    int size() const { return static_cast<int>(omega_.size()); }
    const std::vector<double>& omega() const { return omega_; }
    const std::vector<double>& coupling() const { return coupling_; }
    double beta() const { return beta_; }

    /// Σ_j c_j² coth(βω_j/2) sin²(ω_j t/2)/ω_j²
    double gamma(double t) const;
    /// ½ Σ_j c_j² (ω_j t − sin ω_j t)/ω_j²
    double s(double t) const;

private:
    DiscreteBath(std::vector<double> w, std::vector<double> c, double beta)
        : omega_(std::move(w)), coupling_(std::move(c)), beta_(beta) {}

    std::vector<double> omega_;
    std::vector<double> coupling_;
    double beta_;
};

DensityMatrix discrete_dephasing(const DiscreteBath& bath, const SystemSpec& spec, double lambda,
                                 const DensityMatrix& rho0, double t);

/// System ⊗ up to three truncated oscillator modes:
/// H = σH_S⊗𝟙 + Σ_j ω_j a_j†a_j + λ G⊗Σ_j (c_j/√2)(a_j + a_j†).
struct TruncatedSystem {
    static constexpr int kMaxDimension = 4096;
    static constexpr int kMaxModes = 3;

    int n_levels = 0;
    int fock_cutoff = 0;
    std::vector<double> omega;
    std::vector<double> coupling;
    CMatrix hamiltonian;

    int modes() const { return static_cast<int>(omega.size()); }
    int bath_dim() const;
    int dimension() const { return n_levels * bath_dim(); }

    /// Throws DimensionCapExceeded past 4096 or 3 modes.
    static TruncatedSystem build(const SystemSpec& spec, double sigma, double lambda,
                                 const DiscreteBath& modes, int fock_cutoff);
};

struct EvolutionDiagnostics {
    double trace_error = 0.0;
    double hermiticity_error = 0.0;
    double energy_drift = 0.0;
    /// Weight the evolved state places on the top two Fock levels of any
    /// mode plus the Gibbs tail beyond the cutoff.
    double truncation_estimate = 0.0;
};

/// Diagonalizes H once; evolve(t) then costs two dense products.
class TruncatedEvolution {
public:
    TruncatedEvolution(const TruncatedSystem& ts, const CMatrix& rho0_system, double beta);

    CMatrix reduced(double t, EvolutionDiagnostics* diag = nullptr) const;

private:
    const TruncatedSystem* ts_;
    int sys_dim_;
    int bath_dim_;
    RVector energies_;
    CMatrix vectors_;
    CMatrix rho_eigen_;  ///< initial state in the eigenbasis of H
    double energy0_;
    double gibbs_tail_;
};

CMatrix truncated_evolve(const TruncatedSystem& ts, const CMatrix& rho0_system, double beta,
                         double t);

/// Truncated Gibbs state of one mode, diagonal in the Fock basis.
RVector truncated_gibbs_populations(double omega, double beta, int fock_cutoff);

struct SpectrumCheck {
    CVector primary;                  ///< Eigen ComplexEigenSolver
    CVector lapack;                   ///< zgeev
    std::optional<CVector> det_roots; ///< Aberth iteration on det(A − zI), n ≤ 8
    double max_deviation = 0.0;       ///< worst pairing distance between routes
    double tolerance = 0.0;
    bool agree = false;
};

/// Throws InvalidInput past n = 256 and NoConvergence if the determinant
/// route stalls.
SpectrumCheck eigen_crosscheck(const CMatrix& m);

struct CheckResult {
    std::string name;
    double max_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool all_passed() const;
};

struct ValidationInput {
    FormFactor form_factor;
    BathParams bath;
    QuadratureConfig quadrature;
    double lambda = 0.1;
    int discrete_modes = 2000;
    int fock_cutoff = 30;
};

/// Full cross-check suite behind `oracle-validate`.
ValidationReport run_validation(const ValidationInput& in);

}  // namespace resodyn::oracle
