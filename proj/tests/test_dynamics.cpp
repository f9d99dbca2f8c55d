#include <doctest.h>

#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "helpers.hpp"
#include "resodyn/dynamics.hpp"
#include "resodyn/error.hpp"
#include "resodyn/oracle.hpp"
#include "resodyn/random.hpp"
#include "resodyn/spin_boson.hpp"

using namespace resodyn;
using namespace resodyn::testing;

TEST_CASE("exact dephasing") {
    const auto& bf = ohmic_bath();
    std::mt19937_64 rng(21);
    const auto spec = random_system(rng, 3);
    const auto rho0 = random_density(rng, 3);
    const auto cp = CouplingParams::create(0.0, 0.3);
    const RVector& g = spec.g_levels();

    SUBCASE("t = 0 is the identity") {
        CHECK(dephasing_exact(spec, bf, cp, rho0, 0.0).matrix() == rho0.matrix());
    }
    SUBCASE("modulus law and frozen populations") {
        for (double t : {0.2, 3.0, 40.0}) {
            const CMatrix rho = dephasing_exact(spec, bf, cp, rho0, t).matrix();
            for (int a = 0; a < 3; ++a) {
                CHECK(rho(a, a) == rho0.matrix()(a, a));
                for (int b = 0; b < 3; ++b) {
                    if (a == b) continue;
                    const double dg = g(a) - g(b);
                    const double expected = std::abs(rho0.matrix()(a, b)) * std::exp(-0.09 * dg * dg * bf.gamma(t));
                    CHECK(rel(std::abs(rho(a, b)), expected) < 1e-12);
                }
            }
        }
    }
    SUBCASE("phase follows S(t)") {
        const DephasingPropagator prop(spec, bf, 0.3);
        const double t = 2.5;
        const cplx alpha = prop.alpha(0, 1, t);
        CHECK(rel(alpha.real(), (g(0) * g(0) - g(1) * g(1)) * bf.s(t)) < 1e-14);
        CHECK(rel(alpha.imag(), (g(0) - g(1)) * (g(0) - g(1)) * bf.gamma(t)) < 1e-14);
    }
    SUBCASE("sigma must vanish") {
        try {
            dephasing_exact(spec, bf, CouplingParams::create(1e-3, 0.3), rho0, 1.0);
            FAIL("expected SigmaNotZero");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::SigmaNotZero);
        }
    }
    CHECK_THROWS_AS(dephasing_exact(spec, bf, cp, rho0, -1.0), Error);
}

TEST_CASE("dephasing agrees with a discrete-bath oracle") {
    const auto& bf = ohmic_bath();
    const auto bath = oracle::DiscreteBath::log_grid(ohmic(), 1.0, 2000, 1e-4, radial_cutoff(ohmic(), QuadratureConfig{}));
    const auto spec = spin_boson_system();
    CMatrix m(2, 2);
    m << 0.6, cplx(0.3, 0.2), cplx(0.3, -0.2), 0.4;
    const auto rho0 = DensityMatrix::create(m);
    const auto cp = CouplingParams::create(0.0, 0.2);
    for (double t : {0.5, 2.0, 8.0}) {
        const CMatrix exact = dephasing_exact(spec, bf, cp, rho0, t).matrix();
        const CMatrix discrete = oracle::discrete_dephasing(bath, spec, 0.2, rho0, t).matrix();
        CHECK((exact - discrete).cwiseAbs().maxCoeff() < 1e-4);
    }
}

TEST_CASE("off-diagonal decay rates approach the Markovian limit") {
    const auto& bf = ohmic_bath();
    std::mt19937_64 rng(22);
    const auto spec = random_system(rng, 3);
    const double lam = 0.1;
    const auto cp = CouplingParams::create(1e-4 * lam * lam, lam);
    const PerturbativePropagator prop(spec, bf, cp);
    const RVector& g = spec.g_levels();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            if (a == b) continue;
            const double dg = g(a) - g(b);
            CHECK(rel(prop.spectrum().value(b, a).imag(), lam * lam * dg * dg * bf.gamma_infinity()) < 0.02);
        }

    // fitted log-slope of |ρ_ab(t)| at late times
    const auto rho0 = random_density(rng, 3);
    const double expected = lam * lam * (g(0) - g(1)) * (g(0) - g(1)) * bf.gamma_infinity();
    const double t1 = 1.0 / expected, t2 = 3.0 / expected;
    const double slope = -std::log(std::abs(reduced_offdiag(spec, bf, cp, rho0, t2, 0, 1)) /
                                   std::abs(reduced_offdiag(spec, bf, cp, rho0, t1, 0, 1))) /
                         (t2 - t1);
    CHECK(rel(slope, expected) < 0.05);
}

TEST_CASE("population channels") {
    const auto& bf = ohmic_bath();
    std::mt19937_64 rng(23);
    const auto spec = random_system(rng, 4);
    const auto rho0 = random_density(rng, 4);
    const RVector p0 = rho0.matrix().diagonal().real();

    SUBCASE("frozen at sigma = 0") {
        const PerturbativePropagator prop(spec, bf, CouplingParams::create(0.0, 0.1));
        for (double t : {0.0, 10.0, 1e6})
            for (int a = 0; a < 4; ++a) CHECK(std::abs(prop.diag(rho0.matrix(), t, a) - p0(a)) < 1e-14);
    }
    SUBCASE("matrix exponential of the T generator") {
        const double lam = 0.1, sigma = 2e-3;
        const auto cp = CouplingParams::create(sigma, lam);
        const PerturbativePropagator prop(spec, bf, cp);
        const RMatrix gen = -2.0 * sigma * sigma / (lam * lam) * prop.t_matrix().matrix;
        for (double t : {0.0, 100.0, 1e4, 1e6}) {
            const RVector expected = (gen * t).exp() * p0;
            for (int a = 0; a < 4; ++a) CHECK(std::abs(reduced_diag(spec, bf, cp, rho0, t, a) - expected(a)) < 1e-10);
        }
    }
    SUBCASE("relaxation to 1/N") {
        const auto cp = CouplingParams::create(2e-3, 0.1);
        const PerturbativePropagator prop(spec, bf, cp);
        const double slow = prop.diagonal_rate(1).imag();
        REQUIRE(slow > 0.0);
        const CMatrix rho = prop.evolve(rho0.matrix(), 50.0 / slow);
        for (int a = 0; a < 4; ++a) CHECK(std::abs(rho(a, a).real() - 0.25) < 1e-15);
        CHECK(std::abs(rho.trace() - cplx(1.0)) < 1e-14);
        CHECK(hermiticity_error(rho) < 1e-15);
    }
    SUBCASE("numeric diagonal rates track the perturbative ones") {
        const auto cp = CouplingParams::create(1e-4, 0.1);
        const PerturbativePropagator pert(spec, bf, cp);
        const PerturbativePropagator num(spec, bf, cp, DiagonalRates::Numeric);
        for (int c = 1; c < 4; ++c) CHECK(rel(num.diagonal_rate(c).imag(), pert.diagonal_rate(c).imag()) < 0.05);
    }
}

TEST_CASE("spin-boson: G-basis perturbative vs energy-basis dynamics") {
    const auto& bf = ohmic_bath();
    const double xi0 = bf.xi0();
    const CMatrix u = sx_to_sz_basis();
    CMatrix rho_e(2, 2);
    rho_e << 0.8, cplx(0.2, 0.1), cplx(0.2, -0.1), 0.2;
    const auto gap = [&](double gfrac, double lam) {
        const auto cp = CouplingParams::create(gfrac * gamma_star(xi0) * lam * lam, lam);
        const auto sol = w_eigenpairs(cp, xi0);
        const PerturbativePropagator prop(spin_boson_system(), bf, cp);
        double worst = 0.0;
        for (double t : {0.0, 0.3 / sol.w[1].imag(), 0.5 / sol.w[3].imag(), 2.0 / sol.w[3].imag()}) {
            const CMatrix g = prop.evolve(u.adjoint() * rho_e * u, t);
            worst = std::max(worst, (rho_t_energy_basis(sol, rho_e, t) - u * g * u.adjoint()).cwiseAbs().maxCoeff());
        }
        return worst;
    };
    const double coarse = gap(0.1, 0.1), fine = gap(0.01, 0.1);
    CHECK(coarse < 0.01);
    CHECK(fine < 1e-3);
    CHECK(coarse / fine == doctest::Approx(10.0).epsilon(0.1));
    // the remainder depends on γ, not on λ separately
    CHECK(gap(0.1, 0.05) == doctest::Approx(coarse).epsilon(1e-3));
}

TEST_CASE("manifold distance") {
    CHECK(manifold_distance(CMatrix::Identity(3, 3) / 3.0) == 0.0);
    CMatrix m(2, 2);
    m << 0.5, cplx(0.3, 0.4), cplx(0.3, -0.4), 0.5;
    CHECK(manifold_distance(m) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("manifold bound") {
    const auto& bf = ohmic_bath();
    std::mt19937_64 rng(24);
    const auto grid = geometric_time_grid(50.0, 20);
    for (int n : {2, 3, 5}) {
        const auto spec = random_system(rng, n);
        const auto rho0 = random_density(rng, n);
        const auto rep = manifold_bound_check(spec, bf, CouplingParams::create(0.0, 0.4), rho0, grid);
        CHECK(rep.holds);
        CHECK(rep.constant == n * n);
        CHECK(rep.rows.size() == grid.size());
        CHECK(rep.max_ratio <= 1.0);
        if (n == 2) CHECK(rep.max_ratio == doctest::Approx(0.25).epsilon(1e-10));
    }
    CHECK_THROWS_AS(manifold_bound_check(spin_boson_system(), bf, CouplingParams::create(0.1, 0.4),
                                         DensityMatrix::create(CMatrix::Identity(2, 2) / 2.0), grid),
                    Error);
}

TEST_CASE("time grids") {
    const auto g = geometric_time_grid(10.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == doctest::Approx(0.01));
    CHECK(g[2] == doctest::Approx(0.1));
    CHECK(g[4] == 10.0);
    CHECK(geometric_time_grid(3.0, 2) == std::vector<double>{0.0, 3.0});
    CHECK_THROWS_AS(geometric_time_grid(10.0, 1), Error);
    CHECK_THROWS_AS(geometric_time_grid(0.0, 5), Error);

    const auto cp = CouplingParams::create(1e-3, 0.1);
    const auto spectrum = resonances_numeric(effective_operator(spin_boson_system(), ohmic_bath(), cp));
    const auto d = default_time_grid(spectrum, 30);
    double slowest = 1e300;
    for (Eigen::Index i = 0; i < spectrum.eigenvalues.size(); ++i)
        if (spectrum.eigenvalues(i).imag() > 1e-12) slowest = std::min(slowest, spectrum.eigenvalues(i).imag());
    CHECK(d.back() == doctest::Approx(20.0 / slowest).epsilon(1e-14));
    CHECK(d.size() == 30);
}
