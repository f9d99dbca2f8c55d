#include "resodyn/model.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "resodyn/bath_integrals.hpp"
#include "resodyn/error.hpp"

namespace resodyn {

SystemSpec SystemSpec::create(CMatrix hs, RVector g_levels) {
    const auto n = g_levels.size();
    if (n < 2) throw Error(ErrorCode::InvalidInput, "system.dim must be >= 2");
    if (hs.rows() != n || hs.cols() != n)
        throw Error(ErrorCode::InvalidInput, "system.hs must be dim x dim");
    if (!g_levels.allFinite()) throw Error(ErrorCode::InvalidInput, "system.g_levels must be finite");
    if (!hs.allFinite()) throw Error(ErrorCode::InvalidInput, "system.hs must be finite");
    const double scale = std::max(1.0, max_abs(hs));
    if (hermiticity_error(hs) > 1e-12 * scale)
        throw Error(ErrorCode::InvalidInput, "system.hs is not Hermitian");
    return SystemSpec(std::move(hs), std::move(g_levels));
}

FormFactor FormFactor::create(double p, double decay_a, int decay_m, double angular_sq_integral) {
    if (!std::isfinite(p) || p < -0.5)
        throw Error(ErrorCode::InvalidInput, "bath.form_factor.p must be >= -1/2");
    if (!(decay_a > 0.0) || !std::isfinite(decay_a))
        throw Error(ErrorCode::InvalidInput, "bath.form_factor.decay_a must be positive");
    if (decay_m != 1 && decay_m != 2)
        throw Error(ErrorCode::InvalidInput, "bath.form_factor.decay_m must be 1 or 2");
    if (!(angular_sq_integral >= 0.0) || !std::isfinite(angular_sq_integral))
        throw Error(ErrorCode::InvalidInput, "bath.form_factor.angular_sq_integral must be >= 0");
    return FormFactor{p, decay_a, decay_m, angular_sq_integral};
}

BathParams BathParams::create(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw Error(ErrorCode::InvalidInput, "bath.beta must be positive");
    return BathParams{beta};
}

void validate_ultraviolet(const FormFactor& ff, const BathParams& bath) {
    // exp(a'|k|) g ∈ L² for some a' > β/2 needs decay_a > β/2 when m = 1.
    if (ff.decay_m == 1 && !(ff.decay_a > 0.5 * bath.beta)) {
        std::ostringstream os;
        os << "bath.form_factor.decay_a = " << ff.decay_a
           << " violates the ultraviolet condition decay_a > beta/2 = " << 0.5 * bath.beta;
        throw Error(ErrorCode::InvalidInput, os.str());
    }
}

CouplingParams CouplingParams::create(double sigma, double lambda) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw Error(ErrorCode::InvalidInput, "coupling.sigma must be >= 0");
    if (lambda == 0.0 || !std::isfinite(lambda))
        throw Error(ErrorCode::InvalidInput, "coupling.lambda must be non-zero");
    return CouplingParams(sigma, lambda);
}

DensityMatrix DensityMatrix::create(CMatrix rho) {
    if (rho.rows() != rho.cols() || rho.rows() < 1)
        throw Error(ErrorCode::InvalidInput, "density matrix must be square");
    if (!rho.allFinite()) throw Error(ErrorCode::InvalidInput, "density matrix must be finite");
    if (hermiticity_error(rho) > kHermitianTol)
        throw Error(ErrorCode::InvalidInput, "density matrix is not Hermitian");
    if (std::abs(rho.trace() - cplx(1.0)) > kTraceTol)
        throw Error(ErrorCode::InvalidInput, "density matrix trace differs from 1");
    const CMatrix h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPositivityTol)
        throw Error(ErrorCode::InvalidInput, "density matrix has a negative eigenvalue");
    return DensityMatrix(std::move(rho));
}

AssumptionReport check_a3(const SystemSpec& spec, const BathFunctions& bath) {
    const CMatrix d = delta_table(spec, bath);
    const int n = spec.dim();
    const double scale = max_abs(d);
    AssumptionReport rep;
    if (scale == 0.0) {
        rep.detail = "all delta values vanish";
        return rep;
    }
    const double tol = 1e-10 * scale;
    std::vector<std::pair<int, int>> nonzero;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (std::abs(d(a, b)) > tol) nonzero.emplace_back(a, b);
    std::vector<bool> flagged(nonzero.size(), false);
    for (std::size_t i = 0; i < nonzero.size(); ++i)
        for (std::size_t j = i + 1; j < nonzero.size(); ++j) {
            const auto [a1, b1] = nonzero[i];
            const auto [a2, b2] = nonzero[j];
            if (std::abs(d(a1, b1) - d(a2, b2)) <= tol) flagged[i] = flagged[j] = true;
        }
    for (std::size_t i = 0; i < nonzero.size(); ++i)
        if (flagged[i]) rep.pairs.push_back(nonzero[i]);
    rep.holds = rep.pairs.empty();
    if (!rep.holds) rep.detail = "non-zero delta values coincide";
    return rep;
}

AssumptionReport check_a4(const SystemSpec& spec, const BathFunctions& bath) {
    const CMatrix d = delta_table(spec, bath);
    const int n = spec.dim();
    AssumptionReport rep;
    std::ostringstream os;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            const bool im_ok = d(a, b).imag() > 1e-12;
            const bool hs_ok = std::abs(spec.hs()(a, b)) > 1e-12;
            if (!im_ok || !hs_ok) {
                rep.pairs.emplace_back(a, b);
                os << "(" << a << "," << b << "):" << (im_ok ? "" : " Im delta = 0")
                   << (hs_ok ? "" : " [H_S] = 0") << ";";
            }
        }
    rep.holds = rep.pairs.empty();
    rep.detail = os.str();
    return rep;
}

}  // namespace resodyn
