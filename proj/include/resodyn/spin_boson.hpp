#pragma once

#include <array>
#include <string_view>

#include "resodyn/linalg.hpp"
#include "resodyn/model.hpp"

namespace resodyn {

enum class Regime { Overlapping, Critical, Isolated };

std::string_view to_string(Regime r);

/// γ* = πξ(0)/4.
double gamma_star(double xi0);

Regime classify_regime(double gamma, double xi0);

/// 4×4 leading Feshbach matrix of the spin-boson model in the energy basis
/// {φ₊₊, φ₊₋, φ₋₊, φ₋₋}.
CMatrix w_matrix(const CouplingParams& cp, double xi0);

/// Closed-form eigenvalues w_1..w_4 (index 0..3).
std::array<cplx, 4> w_eigenvalues(const CouplingParams& cp, double xi0);

/// r = (−4iγ − √(π²ξ(0)² − 16γ²)) / (πξ(0)), principal square root.
cplx r_parameter(double gamma, double xi0);

struct SpinBosonSolution {
    double xi0 = 0.0;
    double sigma = 0.0;
    double lambda = 0.0;
    double gamma = 0.0;
    double gamma_star = 0.0;
    std::array<cplx, 4> w{};
    cplx r;
    CMatrix chi;       ///< column j: right eigenvector χ_j
    CMatrix chi_star;  ///< column j: eigenvector χ*_j of W†
    Regime regime = Regime::Overlapping;
};

/// Throws ExceptionalPoint at γ = γ*.
SpinBosonSolution w_eigenpairs(const CouplingParams& cp, double xi0);

/// Leading-order reduced density matrix in the energy basis, O(λ²)
/// additive terms dropped. Not necessarily positive.
CMatrix rho_t_energy_basis(const SpinBosonSolution& sol, const CMatrix& rho0, double t);

/// Same approximant evaluated from the generic eigenvector sum
/// Σ_j e^{itw_j} Σ_{k,l} [ρ_0]_{l,k}⟨φ_{k,l},χ_j⟩⟨χ*_j,φ_{n,m}⟩.
CMatrix rho_t_eigen_sum(const SpinBosonSolution& sol, const CMatrix& rho0, double t);

/// Overlapping: Im w_4. Isolated: Im w_3. Throws ExceptionalPoint at γ*.
double decoherence_rate(const SpinBosonSolution& sol);

/// H_S = S^z and G = S^x written in the S^x eigenbasis (g = (½, −½)).
SystemSpec spin_boson_system();

/// Unitary taking the G (S^x) basis to the energy (S^z) basis on ℂ².
CMatrix sx_to_sz_basis();

}  // namespace resodyn
