#pragma once

#include <string>
#include <utility>
#include <vector>

#include "resodyn/linalg.hpp"

namespace resodyn {

class BathFunctions;

/// The N-level system. Everything is expressed in the eigenbasis of the
/// interaction operator G; `g_levels` are its eigenvalues and `hs` is the
/// system Hamiltonian in that basis.
class SystemSpec {
public:
    static SystemSpec create(CMatrix hs, RVector g_levels);

    int dim() const { return static_cast<int>(g_levels_.size()); }
    const CMatrix& hs() const { return hs_; }
    const RVector& g_levels() const { return g_levels_; }

private:
    SystemSpec(CMatrix hs, RVector g) : hs_(std::move(hs)), g_levels_(std::move(g)) {}

    CMatrix hs_;
    RVector g_levels_;
};

/// Radial/angular coupling profile g(r, θ) = r^p exp(−a r^m) g₁(θ).
/// Only ∫|g₁|² over the sphere enters any observable, so g₁ is carried as
/// that single number.
struct FormFactor {
    double p = -0.5;
    double decay_a = 1.0;
    int decay_m = 1;
    double angular_sq_integral = 4.0 * 3.14159265358979323846;

    static FormFactor create(double p, double decay_a, int decay_m, double angular_sq_integral);

    bool infrared_singular() const { return p == -0.5; }
};

struct BathParams {
    double beta = 1.0;

    static BathParams create(double beta);
};

/// Ultraviolet admissibility of the form factor at inverse temperature beta.
/// Throws InvalidInput when violated.
void validate_ultraviolet(const FormFactor& ff, const BathParams& bath);

class CouplingParams {
public:
    static CouplingParams create(double sigma, double lambda);

    double sigma() const { return sigma_; }
    double lambda() const { return lambda_; }
    /// σ/λ², the spin-boson regime parameter.
    double gamma() const { return sigma_ / (lambda_ * lambda_); }

    CouplingParams with_sigma(double sigma) const { return create(sigma, lambda_); }

private:
    CouplingParams(double s, double l) : sigma_(s), lambda_(l) {}

    double sigma_;
    double lambda_;
};

class DensityMatrix {
public:
    static constexpr double kHermitianTol = 1e-12;
    static constexpr double kTraceTol = 1e-12;
    static constexpr double kPositivityTol = 1e-10;

    static DensityMatrix create(CMatrix rho);

    int dim() const { return static_cast<int>(rho_.rows()); }
    const CMatrix& matrix() const { return rho_; }
    cplx operator()(int a, int b) const { return rho_(a, b); }

private:
    explicit DensityMatrix(CMatrix rho) : rho_(std::move(rho)) {}

    CMatrix rho_;
};

struct AssumptionReport {
    bool holds = true;
    /// Offending (a, b) pairs, 0-based.
    std::vector<std::pair<int, int>> pairs;
    std::string detail;
};

/// All non-zero δ_{a,b} pairwise distinct.
AssumptionReport check_a3(const SystemSpec& spec, const BathFunctions& bath);

/// Im δ_{a,b} > 0 and [H_S]_{a,b} ≠ 0 for every a ≠ b.
AssumptionReport check_a4(const SystemSpec& spec, const BathFunctions& bath);

}  // namespace resodyn
