#include "resodyn/dynamics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "resodyn/error.hpp"

namespace resodyn {

namespace {

void require_sigma_zero(const CouplingParams& cp) {
    if (cp.sigma() != 0.0) {
        std::ostringstream os;
        os << "exact dephasing needs sigma = 0, got " << cp.sigma();
        throw Error(ErrorCode::SigmaNotZero, os.str());
    }
}

void require_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorCode::InvalidInput, "time must be finite and >= 0");
}

}  // namespace

CMatrix apply_dephasing(const RVector& g, double lambda, double gamma_value, double s_value,
                        const CMatrix& rho0) {
    const auto n = g.size();
    if (rho0.rows() != n || rho0.cols() != n)
        throw Error(ErrorCode::InvalidInput, "density matrix dimension does not match system.dim");
    const double lam2 = lambda * lambda;
    CMatrix out = rho0;
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = a + 1; b < n; ++b) {
            const double dg = g(a) - g(b);
            const cplx alpha(dg * (g(a) + g(b)) * s_value, dg * dg * gamma_value);
            out(a, b) = rho0(a, b) * std::exp(I * lam2 * alpha);
            out(b, a) = std::conj(out(a, b));
        }
    return out;
}

DephasingPropagator::DephasingPropagator(SystemSpec spec, BathFunctions bath, double lambda)
    : spec_(std::move(spec)), bath_(std::move(bath)), lambda_(lambda) {}

cplx DephasingPropagator::alpha(int a, int b, double t) const {
    require_time(t);
    const RVector& g = spec_.g_levels();
    const double dg = g(a) - g(b);
    return {dg * (g(a) + g(b)) * bath_.s(t), dg * dg * bath_.gamma(t)};
}

DensityMatrix DephasingPropagator::evolve(const DensityMatrix& rho0, double t) const {
    require_time(t);
    if (t == 0.0) return rho0;
    return DensityMatrix::create(
        apply_dephasing(spec_.g_levels(), lambda_, bath_.gamma(t), bath_.s(t), rho0.matrix()));
}

DensityMatrix dephasing_exact(const SystemSpec& spec, const BathFunctions& bf,
                              const CouplingParams& cp, const DensityMatrix& rho0, double t) {
    require_sigma_zero(cp);
    return DephasingPropagator(spec, bf, cp.lambda()).evolve(rho0, t);
}

PerturbativePropagator::PerturbativePropagator(const SystemSpec& spec, const BathFunctions& bf,
                                               const CouplingParams& cp, DiagonalRates rates)
    : n_(spec.dim()),
      cp_(cp),
      spectrum_(resonances_numeric(effective_operator(spec, bf, cp))),
      t_(resodyn::t_matrix(spec, bf)),
      diag_eps_(spec.dim()) {
    for (int c = 0; c < n_; ++c)
        diag_eps_(c) = rates == DiagonalRates::Perturbative ? eps_a_approx(t_, cp_, c)
                                                            : spectrum_.value(c, c);
}

cplx PerturbativePropagator::offdiag(const CMatrix& rho0, double t, int a, int b) const {
    require_time(t);
    return std::exp(I * t * spectrum_.value(b, a)) * rho0(a, b);
}

CMatrix PerturbativePropagator::d_matrix(double t) const {
    require_time(t);
    CMatrix d = CMatrix::Zero(n_, n_);
    for (int c = 1; c < n_; ++c) {
        const RVector phi = t_.eigenvectors.col(c);
        d += std::exp(I * t * diag_eps_(c)) * (phi * phi.transpose()).cast<cplx>();
    }
    return d;
}

double PerturbativePropagator::diag(const CMatrix& rho0, double t, int a) const {
    const CMatrix d = d_matrix(t);
    cplx sum = 1.0 / n_;
    for (int b = 0; b < n_; ++b) sum += d(a, b) * rho0(b, b);
    return sum.real();
}

CMatrix PerturbativePropagator::evolve(const CMatrix& rho0, double t) const {
    require_time(t);
    const CMatrix d = d_matrix(t);
    CMatrix out(n_, n_);
    for (int a = 0; a < n_; ++a) {
        cplx sum = 1.0 / n_;
        for (int b = 0; b < n_; ++b) sum += d(a, b) * rho0(b, b);
        out(a, a) = sum.real();
        for (int b = 0; b < n_; ++b)
            if (b != a) out(a, b) = offdiag(rho0, t, a, b);
    }
    return out;
}

cplx reduced_offdiag(const SystemSpec& spec, const BathFunctions& bf, const CouplingParams& cp,
                     const DensityMatrix& rho0, double t, int a, int b) {
    if (a == b) throw Error(ErrorCode::InvalidInput, "reduced_offdiag needs a != b");
    return PerturbativePropagator(spec, bf, cp).offdiag(rho0.matrix(), t, a, b);
}

double reduced_diag(const SystemSpec& spec, const BathFunctions& bf, const CouplingParams& cp,
                    const DensityMatrix& rho0, double t, int a) {
    return PerturbativePropagator(spec, bf, cp).diag(rho0.matrix(), t, a);
}

double manifold_distance(const CMatrix& rho) {
    CMatrix off = rho;
    off.diagonal().setZero();
    return trace_norm(off);
}

ManifoldBoundReport manifold_bound_check(const SystemSpec& spec, const BathFunctions& bf,
                                         const CouplingParams& cp, const DensityMatrix& rho0,
                                         const std::vector<double>& t_grid) {
    require_sigma_zero(cp);
    const int n = spec.dim();
    const RVector& g = spec.g_levels();
    ManifoldBoundReport rep;
    rep.constant = static_cast<double>(n) * n;
    rep.gamma_g = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (a != b) rep.gamma_g = std::min(rep.gamma_g, (g(a) - g(b)) * (g(a) - g(b)));

    const double lam2 = cp.lambda() * cp.lambda();
    const double d0 = manifold_distance(rho0.matrix());
    for (double t : t_grid) {
        require_time(t);
        const double gam = bf.gamma(t);
        const CMatrix rho_t = apply_dephasing(g, cp.lambda(), gam, bf.s(t), rho0.matrix());
        ManifoldBoundRow row{t, manifold_distance(rho_t),
                             rep.constant * std::exp(-lam2 * rep.gamma_g * gam) * d0};
        if (row.bound > 0.0) rep.max_ratio = std::max(rep.max_ratio, row.distance / row.bound);
        if (row.distance > row.bound * (1.0 + 1e-12) + 1e-15) rep.holds = false;
        rep.rows.push_back(row);
    }
    return rep;
}

std::vector<double> geometric_time_grid(double t_max, int points) {
    if (points < 2 || !(t_max > 0.0))
        throw Error(ErrorCode::InvalidInput, "time grid needs points >= 2 and t_max > 0");
    std::vector<double> grid{0.0};
    const double t_min = 1e-3 * t_max;
    for (int i = 0; i < points - 1; ++i) {
        const double frac = points == 2 ? 1.0 : static_cast<double>(i) / (points - 2);
        grid.push_back(t_min * std::pow(t_max / t_min, frac));
    }
    grid.back() = t_max;
    return grid;
}

std::vector<double> default_time_grid(const ResonanceSpectrum& spectrum, int points) {
    double slowest = std::numeric_limits<double>::infinity();
    const double scale = spectrum.eigenvalues.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < spectrum.eigenvalues.size(); ++i) {
        const double im = spectrum.eigenvalues(i).imag();
        if (im > 1e-12 * scale) slowest = std::min(slowest, im);
    }
    if (!std::isfinite(slowest))
        throw Error(ErrorCode::InvalidInput, "no decaying resonance to set the time scale");
    return geometric_time_grid(20.0 / slowest, points);
}

}  // namespace resodyn
