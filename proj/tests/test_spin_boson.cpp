#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "resodyn/error.hpp"
#include "resodyn/random.hpp"
#include "resodyn/spin_boson.hpp"

using namespace resodyn;
using namespace resodyn::testing;

namespace {

CouplingParams at_gamma(double gamma, double lambda) {
    return CouplingParams::create(gamma * lambda * lambda, lambda);
}

CVector as_vector(const std::array<cplx, 4>& w) {
    CVector v(4);
    v << w[0], w[1], w[2], w[3];
    return v;
}

}  // namespace

TEST_CASE("w_matrix") {
    const double xi0 = 4.0 * kPi;
    const double lam = 0.2;
    SUBCASE("sigma = 0") {
        Eigen::ComplexEigenSolver<CMatrix> es(w_matrix(CouplingParams::create(0.0, lam), xi0), false);
        CVector expected(4);
        const double top = 0.5 * lam * lam * kPi * xi0;
        expected << 0.0, 0.0, cplx(0.0, top), cplx(0.0, top);
        CHECK(spectral_distance(es.eigenvalues(), expected) < 1e-14);
        const auto w = w_eigenvalues(CouplingParams::create(0.0, lam), xi0);
        CHECK(std::abs(w[2] - cplx(0.0, top)) < 1e-15);
        CHECK(w[3] == cplx(0.0));
    }
    SUBCASE("Hermitian part and trace") {
        const auto cp = CouplingParams::create(0.3, lam);
        const CMatrix w = w_matrix(cp, xi0);
        const CMatrix herm = 0.5 * (w + w.adjoint());
        CMatrix expected = CMatrix::Zero(4, 4);
        expected.diagonal() << 0.0, 0.3, -0.3, 0.0;
        CHECK((herm - expected).cwiseAbs().maxCoeff() == 0.0);
        CHECK(std::abs(w.trace() - cplx(0.0, lam * lam * kPi * xi0)) < 1e-15);
    }
    CHECK_THROWS_AS(w_matrix(CouplingParams::create(0.1, lam), 0.0), Error);
}

TEST_CASE("closed-form eigenvalues match a dense solver") {
    double worst = 0.0;
    for (double xi0 : {1.0, 4.0 * kPi, 10.0})
        for (double lam : {0.05, 0.1, 0.2})
            for (int i = 0; i < 10; ++i) {
                const double gamma = gamma_star(xi0) * std::pow(10.0, -2.0 + 4.0 * i / 9.0);
                const auto cp = at_gamma(gamma, lam);
                const CVector closed = as_vector(w_eigenvalues(cp, xi0));
                Eigen::ComplexEigenSolver<CMatrix> es(w_matrix(cp, xi0), false);
                worst = std::max(worst, spectral_distance(es.eigenvalues(), closed) / closed.cwiseAbs().maxCoeff());
            }
    CHECK(worst <= 1e-10);
}

TEST_CASE("exact eigenvalue identities") {
    const double xi0 = 3.7;
    const auto cp = at_gamma(0.4, 0.13);
    const auto w = w_eigenvalues(cp, xi0);
    CHECK(w[0] == cplx(0.0));
    CHECK(w[1] == cplx(0.0, 0.5 * 0.13 * 0.13 * kPi * xi0));
    CHECK(std::abs(w[2] * w[3] + cp.sigma() * cp.sigma()) < 1e-16);
}

TEST_CASE("regimes and the exceptional point") {
    const double xi0 = 4.0 * kPi;
    const double gs = gamma_star(xi0);
    CHECK(gs == doctest::Approx(kPi * kPi));
    CHECK(classify_regime(0.5 * gs, xi0) == Regime::Overlapping);
    CHECK(classify_regime(gs, xi0) == Regime::Critical);
    CHECK(classify_regime(gs * (1.0 + 1e-13), xi0) == Regime::Critical);
    CHECK(classify_regime(2.0 * gs, xi0) == Regime::Isolated);
    CHECK(to_string(Regime::Overlapping) == "overlapping");

    const double lam = 0.1;
    const auto w = w_eigenvalues(at_gamma(gs, lam), xi0);
    const double kappa = 0.25 * lam * lam * kPi * xi0;
    CHECK(std::abs(w[2] - cplx(0.0, kappa)) < 1e-9 * kappa);
    CHECK(std::abs(w[3] - cplx(0.0, kappa)) < 1e-9 * kappa);
    try {
        w_eigenpairs(at_gamma(gs, lam), xi0);
        FAIL("expected ExceptionalPoint");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ExceptionalPoint);
    }
}

TEST_CASE("r parameter limits") {
    const double xi0 = 4.0 * kPi;
    CHECK(std::abs(r_parameter(1e-6, xi0) - cplx(-1.0, 0.0)) < 1e-5);
    const cplx big = r_parameter(1e4, xi0);
    CHECK(std::abs(big.real()) < 1e-12);
    CHECK(big.imag() < -1e3);
    // principal branch above γ*: √(π²ξ² − 16γ²) = i√(16γ² − π²ξ²)
    const double g = 2.0 * gamma_star(xi0);
    const cplx r = r_parameter(g, xi0);
    const double expected = (-4.0 * g - std::sqrt(16.0 * g * g - kPi * kPi * xi0 * xi0)) / (kPi * xi0);
    CHECK(std::abs(r - cplx(0.0, expected)) < 1e-14 * std::abs(r));
}

TEST_CASE("eigenvectors and biorthogonality") {
    const double xi0 = 4.0 * kPi;
    for (double gfrac : {0.01, 0.5, 0.99, 1.01, 3.0, 100.0}) {
        const auto cp = at_gamma(gfrac * gamma_star(xi0), 0.1);
        const auto sol = w_eigenpairs(cp, xi0);
        const CMatrix w = w_matrix(cp, xi0);
        const double scale = std::abs(sol.w[1]);
        for (int j = 0; j < 4; ++j) {
            CHECK((w * sol.chi.col(j) - sol.w[j] * sol.chi.col(j)).norm() <= 1e-10 * scale);
            CHECK((w.adjoint() * sol.chi_star.col(j) - std::conj(sol.w[j]) * sol.chi_star.col(j)).norm() <=
                  1e-10 * scale * sol.chi_star.col(j).norm());
        }
        const CMatrix gram = sol.chi_star.adjoint() * sol.chi;
        CHECK((gram - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, std::abs(sol.r)));
    }
}

TEST_CASE("trajectories in the overlapping regime") {
    const double xi0 = 4.0 * kPi;
    const double lam = 0.1;
    double prev3 = std::numeric_limits<double>::infinity(), prev4 = -1.0;
    for (int i = 1; i < 50; ++i) {
        const double gamma = gamma_star(xi0) * i / 50.0;
        const auto w = w_eigenvalues(at_gamma(gamma, lam), xi0);
        CHECK(w[2].real() == 0.0);
        CHECK(w[3].real() == 0.0);
        CHECK(w[2].imag() < prev3);
        CHECK(w[3].imag() > prev4);
        prev3 = w[2].imag();
        prev4 = w[3].imag();
    }
    // beyond γ*: equal, constant imaginary parts and opposite real parts
    const double kappa = 0.25 * lam * lam * kPi * xi0;
    for (double gfrac : {1.5, 10.0, 100.0}) {
        const auto w = w_eigenvalues(at_gamma(gfrac * gamma_star(xi0), lam), xi0);
        CHECK(w[2].imag() == kappa);
        CHECK(w[3].imag() == kappa);
        CHECK(w[2].real() == -w[3].real());
    }
}

TEST_CASE("energy-basis reduced dynamics") {
    const double xi0 = 4.0 * kPi;
    const auto sol = w_eigenpairs(at_gamma(0.1 * gamma_star(xi0), 0.1), xi0);
    SUBCASE("maximally mixed state is fixed") {
        const CMatrix half = 0.5 * CMatrix::Identity(2, 2);
        for (double t : {0.0, 1.0, 100.0, 1e4}) CHECK((rho_t_energy_basis(sol, half, t) - half).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("closed form agrees with the eigenvector sum") {
        std::mt19937_64 rng(9);
        for (double gfrac : {0.1, 0.8, 1.2, 20.0}) {
            const auto s = w_eigenpairs(at_gamma(gfrac * gamma_star(xi0), 0.1), xi0);
            const CMatrix rho0 = random_density(rng, 2).matrix();
            for (double t : {0.0, 0.3, 7.0, 120.0}) {
                const CMatrix a = rho_t_energy_basis(s, rho0, t);
                const CMatrix b = rho_t_eigen_sum(s, rho0, t);
                CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
                CHECK(std::abs(a.trace() - cplx(1.0)) < 1e-15);
                CHECK(hermiticity_error(a) == 0.0);
            }
        }
    }
    SUBCASE("real coherence specialization") {
        CMatrix rho0(2, 2);
        rho0 << 0.7, 0.3, 0.3, 0.3;
        const cplx r = sol.r;
        for (double t : {0.5, 10.0, 300.0}) {
            const cplx expected = r / (r * r + 1.0) *
                                  ((1.0 + r) * std::exp(I * t * sol.w[2]) + (1.0 / r - 1.0) * std::exp(I * t * sol.w[3])) * 0.3;
            CHECK(std::abs(rho_t_energy_basis(sol, rho0, t)(0, 1) - expected) < 1e-14);
        }
    }
    SUBCASE("relaxes to the maximally mixed state") {
        CMatrix rho0(2, 2);
        rho0 << 0.9, 0.2, 0.2, 0.1;
        const double t = 60.0 / sol.w[3].imag();
        CHECK((rho_t_energy_basis(sol, rho0, t) - 0.5 * CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-20);
    }
    CHECK_THROWS_AS(rho_t_energy_basis(sol, CMatrix::Identity(3, 3) / 3.0, 1.0), Error);
}

TEST_CASE("decoherence rate asymptotics") {
    for (double xi0 : {1.0, 4.0 * kPi, 10.0})
        for (double lam : {0.05, 0.2}) {
            const auto slow = w_eigenpairs(at_gamma(0.01 * gamma_star(xi0), lam), xi0);
            const double ratio = slow.sigma * slow.sigma / (lam * lam);
            CHECK(rel(decoherence_rate(slow) / ratio, 2.0 / (kPi * xi0)) < 0.01);
            const auto fast = w_eigenpairs(at_gamma(100.0 * gamma_star(xi0), lam), xi0);
            CHECK(rel(decoherence_rate(fast), 0.25 * kPi * xi0 * lam * lam) < 0.01);
        }
}

TEST_CASE("basis helpers") {
    const CMatrix u = sx_to_sz_basis();
    CHECK((u * u.adjoint() - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
    // H_S = (1/2)σ_x in the G basis becomes diagonal in the energy basis
    const CMatrix h = u.adjoint() * spin_boson_system().hs() * u;
    CHECK(std::abs(h(0, 1)) < 1e-15);
    CHECK(std::abs(std::abs(h(0, 0)) - 0.5) < 1e-15);
    CHECK(std::abs(h(0, 0) + h(1, 1)) < 1e-15);
}
