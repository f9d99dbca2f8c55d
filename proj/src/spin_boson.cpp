#include "resodyn/spin_boson.hpp"

#include <cmath>
#include <sstream>

#include "resodyn/error.hpp"

namespace resodyn {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kCriticalTol = 1e-12;

// Doubled-space index of φ_k ⊗ φ_l with + ↦ 0, − ↦ 1.
int idx(int k, int l) { return 2 * k + l; }

void require_xi0(double xi0) {
    if (!(xi0 > 0.0) || !std::isfinite(xi0))
        throw Error(ErrorCode::InvalidInput, "spin-boson analytics need xi0 > 0");
}

}  // namespace

std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::Overlapping: return "overlapping";
        case Regime::Critical: return "critical";
        case Regime::Isolated: return "isolated";
    }
    return "unknown";
}

double gamma_star(double xi0) { return 0.25 * kPi * xi0; }

Regime classify_regime(double gamma, double xi0) {
    const double gs = gamma_star(xi0);
    if (std::abs(gamma - gs) <= kCriticalTol * gs) return Regime::Critical;
    return gamma < gs ? Regime::Overlapping : Regime::Isolated;
}

CMatrix w_matrix(const CouplingParams& cp, double xi0) {
    require_xi0(xi0);
    const double kappa = 0.25 * cp.lambda() * cp.lambda() * kPi * xi0;
    const double s = cp.sigma();
    CMatrix w = CMatrix::Zero(4, 4);
    w(0, 0) = cplx(0.0, kappa);
    w(0, 3) = cplx(0.0, -kappa);
    w(1, 1) = cplx(s, kappa);
    w(1, 2) = cplx(0.0, -kappa);
    w(2, 1) = cplx(0.0, -kappa);
    w(2, 2) = cplx(-s, kappa);
    w(3, 0) = cplx(0.0, -kappa);
    w(3, 3) = cplx(0.0, kappa);
    return w;
}

std::array<cplx, 4> w_eigenvalues(const CouplingParams& cp, double xi0) {
    require_xi0(xi0);
    const double kappa = 0.25 * cp.lambda() * cp.lambda() * kPi * xi0;
    const double s = cp.sigma();
    const cplx root = std::sqrt(cplx(kappa * kappa - s * s, 0.0));
    std::array<cplx, 4> w;
    w[0] = 0.0;
    w[1] = cplx(0.0, 2.0 * kappa);
    w[2] = I * kappa + I * root;
    // w_3 w_4 = −σ²; use it where iκ − i√(κ² − σ²) cancels.
    w[3] = root.imag() == 0.0 && root.real() > 0.0 ? -s * s / w[2] : I * kappa - I * root;
    return w;
}

cplx r_parameter(double gamma, double xi0) {
    require_xi0(xi0);
    const double pxi = kPi * xi0;
    const cplx root = std::sqrt(cplx(pxi * pxi - 16.0 * gamma * gamma, 0.0));
    return (cplx(0.0, -4.0 * gamma) - root) / pxi;
}

SpinBosonSolution w_eigenpairs(const CouplingParams& cp, double xi0) {
    require_xi0(xi0);
    SpinBosonSolution sol;
    sol.xi0 = xi0;
    sol.sigma = cp.sigma();
    sol.lambda = cp.lambda();
    sol.gamma = cp.gamma();
    sol.gamma_star = gamma_star(xi0);
    sol.regime = classify_regime(sol.gamma, xi0);
    sol.w = w_eigenvalues(cp, xi0);
    sol.r = r_parameter(sol.gamma, xi0);
    const cplx norm = 1.0 + sol.r * sol.r;
    if (sol.regime == Regime::Critical || std::abs(norm) <= kCriticalTol) {
        std::ostringstream os;
        os << "gamma = " << sol.gamma << " sits at the exceptional point gamma* = " << sol.gamma_star;
        throw Error(ErrorCode::ExceptionalPoint, os.str());
    }
    const double h = 1.0 / std::sqrt(2.0);
    const cplx r = sol.r;
    sol.chi = CMatrix::Zero(4, 4);
    sol.chi.col(0) << h, 0.0, 0.0, h;
    sol.chi.col(1) << h, 0.0, 0.0, -h;
    sol.chi.col(2) << 0.0, 1.0 / norm, r / norm, 0.0;
    sol.chi.col(3) << 0.0, -r / norm, 1.0 / norm, 0.0;
    sol.chi_star = CMatrix::Zero(4, 4);
    sol.chi_star.col(0) << h, 0.0, 0.0, h;
    sol.chi_star.col(1) << h, 0.0, 0.0, -h;
    sol.chi_star.col(2) << 0.0, 1.0, std::conj(r), 0.0;
    sol.chi_star.col(3) << 0.0, -std::conj(r), 1.0, 0.0;
    return sol;
}

CMatrix rho_t_energy_basis(const SpinBosonSolution& sol, const CMatrix& rho0, double t) {
    if (rho0.rows() != 2 || rho0.cols() != 2)
        throw Error(ErrorCode::InvalidInput, "spin-boson density matrix must be 2x2");
    const cplx r = sol.r;
    const cplx norm = r * r + 1.0;
    const cplx e2 = std::exp(I * t * sol.w[1]);
    const cplx e3 = std::exp(I * t * sol.w[2]);
    const cplx e4 = std::exp(I * t * sol.w[3]);
    const cplx pm = rho0(0, 1), mp = rho0(1, 0);

    CMatrix out(2, 2);
    const double pp = 0.5 + 0.5 * (e2 * (rho0(0, 0) - rho0(1, 1))).real();
    out(0, 0) = pp;
    out(1, 1) = 1.0 - pp;
    out(0, 1) = r / norm * e3 * (r * pm + mp) + e4 / norm * (pm - r * mp);
    out(1, 0) = std::conj(out(0, 1));
    return out;
}

CMatrix rho_t_eigen_sum(const SpinBosonSolution& sol, const CMatrix& rho0, double t) {
    if (rho0.rows() != 2 || rho0.cols() != 2)
        throw Error(ErrorCode::InvalidInput, "spin-boson density matrix must be 2x2");
    CMatrix out = CMatrix::Zero(2, 2);
    for (int j = 0; j < 4; ++j) {
        const cplx phase = std::exp(I * t * sol.w[j]);
        cplx overlap = 0.0;
        for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l) overlap += rho0(l, k) * sol.chi(idx(k, l), j);
        for (int m = 0; m < 2; ++m)
            for (int n = 0; n < 2; ++n)
                out(m, n) += phase * overlap * std::conj(sol.chi_star(idx(n, m), j));
    }
    return out;
}

double decoherence_rate(const SpinBosonSolution& sol) {
    switch (sol.regime) {
        case Regime::Overlapping: return sol.w[3].imag();
        case Regime::Isolated: return sol.w[2].imag();
        case Regime::Critical: break;
    }
    throw Error(ErrorCode::ExceptionalPoint, "decoherence rate undefined at gamma = gamma*");
}

SystemSpec spin_boson_system() {
    CMatrix hs(2, 2);
    hs << 0.0, 0.5, 0.5, 0.0;
    RVector g(2);
    g << 0.5, -0.5;
    return SystemSpec::create(hs, g);
}

CMatrix sx_to_sz_basis() {
    const double h = 1.0 / std::sqrt(2.0);
    CMatrix u(2, 2);
    u << h, h, h, -h;
    return u;
}

}  // namespace resodyn
