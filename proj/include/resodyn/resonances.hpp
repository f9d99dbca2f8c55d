#pragma once

#include <utility>
#include <vector>

#include "resodyn/bath_integrals.hpp"
#include "resodyn/linalg.hpp"
#include "resodyn/model.hpp"

namespace resodyn {

/// Label of the product basis vector φ_a ⊗ φ_b (0-based). The doubled space
/// is ordered row-major: index = a·N + b.
struct PairLabel {
    int a = 0;
    int b = 0;

    bool diagonal() const { return a == b; }
    friend bool operator==(const PairLabel&, const PairLabel&) = default;
};

inline int pair_index(int n, int a, int b) { return a * n + b; }

/// L_S = H_S ⊗ 𝟙 − 𝟙 ⊗ conj(H_S) on ℂ^N ⊗ ℂ^N.
CMatrix liouvillian_ls(const SystemSpec& spec);

/// The λ-quadratic part of the effective operator assembled from its
/// operator form −λ²(αG²⊗𝟙 − αG⊗G + ᾱG⊗G − ᾱ𝟙⊗G²) with
/// α = ½⟨g,|k|⁻¹g⟩ − (i/2)πξ(0).
CMatrix quadratic_term(const SystemSpec& spec, const BathFunctions& bf, double lambda);

/// Finite-rank effective operator σL_S + (λ² term), acting on ℂ^{N²}.
struct EffectiveOperator {
    int n = 0;
    double sigma = 0.0;
    double lambda = 0.0;
    CMatrix liouvillian;  ///< L_S
    CMatrix quadratic;    ///< diagonal λ² block
    CMatrix matrix;       ///< σ·liouvillian + quadratic
    std::vector<PairLabel> basis_labels;
};

EffectiveOperator effective_operator(const SystemSpec& spec, const BathFunctions& bf,
                                     const CouplingParams& cp);

/// Resonances of an effective operator, stored in label order: entry
/// pair_index(n, a, b) is ε_{a,b}. Diagonal labels (c, c) enumerate the
/// diagonal sector by ascending imaginary part, matching ξ_1 ≤ … ≤ ξ_N.
struct ResonanceSpectrum {
    int n = 0;
    CVector eigenvalues;
    std::vector<PairLabel> labels;
    CMatrix right;  ///< columns χ_i
    CMatrix left;   ///< columns χ*_i with ⟨χ*_i, χ_j⟩ = δ_ij
    /// Label pairs whose σ = 0 parents coincide; their relative labeling is
    /// a deterministic convention, not a continuation result.
    std::vector<std::pair<PairLabel, PairLabel>> ambiguous;

    cplx value(int a, int b) const { return eigenvalues(pair_index(n, a, b)); }
    double biorthogonality_error() const;
};

/// Dense non-Hermitian eigendecomposition with labels assigned by continuation
/// in σ from the diagonal σ = 0 operator. Throws DegenerateAtRequestedPoint
/// when two eigenvalues coincide within 1e-12 at σ > 0.
ResonanceSpectrum resonances_numeric(const EffectiveOperator& op);

struct TMatrix {
    RMatrix matrix;
    RVector xi;            ///< ascending, xi(0) = 0
    RMatrix eigenvectors;  ///< column c is φ_c^T
};

TMatrix t_matrix(const SystemSpec& spec, const BathFunctions& bf);

/// Three-term expansion η_{a,b} (a ≠ b) of the off-diagonal resonances.
cplx eta_ab(const SystemSpec& spec, const BathFunctions& bf, const CouplingParams& cp, int a, int b);

/// Variant reusing a precomputed δ table.
cplx eta_ab(const SystemSpec& spec, const CMatrix& delta, const CouplingParams& cp, int a, int b);

/// 2i(σ²/λ²)ξ_a (0-based a).
cplx eps_a_approx(const TMatrix& t, const CouplingParams& cp, int a);

}  // namespace resodyn
