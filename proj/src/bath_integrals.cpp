#include "resodyn/bath_integrals.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "resodyn/error.hpp"

namespace resodyn {

namespace {

constexpr double kPi = 3.14159265358979323846;

// x·coth(x), regular at the origin.
double xcothx(double x) {
    if (std::abs(x) < 1e-6) return 1.0 + x * x / 3.0;
    return x / std::tanh(x);
}

double sinc(double x) {
    if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

// x − sin x without cancellation for small x.
double x_minus_sin(double x) {
    if (std::abs(x) < 1e-2) {
        const double x2 = x * x;
        return x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
    }
    return x - std::sin(x);
}

// r^{2p+1} exp(−2a r^m)
double radial_weight(const FormFactor& ff, double r) {
    return std::pow(r, 2.0 * ff.p + 1.0) * std::exp(-2.0 * ff.decay_a * std::pow(r, ff.decay_m));
}

struct PanelResult {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;
};

template <class F>
PanelResult integrate_panels(F&& f, const std::vector<double>& breaks, double rel_tol) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    PanelResult out;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        double err = 0.0, l1 = 0.0;
        out.value += GK::integrate(f, breaks[i], breaks[i + 1], 12, rel_tol, &err, &l1);
        out.error += err;
        out.l1 += l1;
    }
    return out;
}

void require_converged(const PanelResult& r, const QuadratureConfig& cfg, const char* what) {
    const double allowed = std::max(100.0 * cfg.rel_tol * r.l1, cfg.abs_tol);
    if (!(r.error <= allowed) || !std::isfinite(r.value)) {
        std::ostringstream os;
        os << what << ": quadrature error estimate " << r.error << " exceeds " << allowed;
        throw Error(ErrorCode::NoConvergence, os.str());
    }
}

void require_integrable(const FormFactor& ff) {
    if (2.0 * ff.p + 1.0 <= -1.0)
        throw Error(ErrorCode::DivergentIntegral, "|g|^2/|k| is not integrable at the origin (2p+1 <= -1)");
}

// Uniform panels on [0, R] no wider than `width`.
std::vector<double> uniform_breaks(double r_max, double width) {
    const auto count = static_cast<std::size_t>(std::ceil(r_max / width));
    std::vector<double> breaks(count + 1);
    for (std::size_t i = 0; i <= count; ++i) breaks[i] = r_max * static_cast<double>(i) / count;
    return breaks;
}

std::vector<double> oscillation_breaks(double r_max, double t) {
    double width = r_max / 16.0;
    if (t > 0.0) width = std::min(width, kPi / t);
    return uniform_breaks(r_max, width);
}

}  // namespace

QuadratureConfig QuadratureConfig::create(double rel_tol, double abs_tol, double r_max_factor) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
        throw Error(ErrorCode::InvalidInput, "quadrature.rel_tol must lie in (0, 1)");
    if (!(abs_tol > 0.0)) throw Error(ErrorCode::InvalidInput, "quadrature.abs_tol must be positive");
    if (!(r_max_factor >= 1.0))
        throw Error(ErrorCode::InvalidInput, "quadrature.r_max_factor must be >= 1");
    return QuadratureConfig{rel_tol, abs_tol, r_max_factor};
}

double radial_cutoff(const FormFactor& ff, const QuadratureConfig& cfg) {
    const double s = 2.0 * ff.p + 2.0;
    const double target = cfg.abs_tol * 1e-3;
    const auto tail = [&](double r) {
        return std::exp(-2.0 * ff.decay_a * std::pow(r, ff.decay_m)) * std::pow(r, s);
    };
    // Start past the maximum of r^s exp(−2a r^m).
    double lo = std::max(1e-3, std::pow(s / (2.0 * ff.decay_a * ff.decay_m), 1.0 / ff.decay_m));
    double hi = std::max(2.0 * lo, 1.0);
    while (tail(hi) >= target) {
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (tail(mid) >= target ? lo : hi) = mid;
    }
    return hi * cfg.r_max_factor;
}

double inner_1_over_k_closed_form(const FormFactor& ff) {
    require_integrable(ff);
    const double nu = (2.0 * ff.p + 2.0) / ff.decay_m;
    return ff.angular_sq_integral * boost::math::tgamma(nu) /
           (ff.decay_m * std::pow(2.0 * ff.decay_a, nu));
}

double inner_1_over_k(const FormFactor& ff, const QuadratureConfig& cfg) {
    require_integrable(ff);
    if (ff.angular_sq_integral == 0.0) return 0.0;
    const double r_max = radial_cutoff(ff, cfg);
    const auto f = [&](double r) { return radial_weight(ff, r); };
    // Geometric panels near the origin resolve non-integer powers of r.
    std::vector<double> breaks{0.0};
    for (double r = r_max * std::pow(2.0, -20); r < r_max; r *= 2.0) breaks.push_back(r);
    breaks.push_back(r_max);
    const auto res = integrate_panels(f, breaks, cfg.rel_tol);
    require_converged(res, cfg, "inner_1_over_k");
    const double value = ff.angular_sq_integral * res.value;
    const double closed = inner_1_over_k_closed_form(ff);
    if (std::abs(value - closed) > std::max(1e-8, 100.0 * cfg.rel_tol) * std::abs(closed)) {
        std::ostringstream os;
        os << "inner_1_over_k quadrature " << value << " disagrees with closed form " << closed;
        throw Error(ErrorCode::NoConvergence, os.str());
    }
    return value;
}

double xi_zero_at(const FormFactor& ff, double beta, double eps, const QuadratureConfig& cfg) {
    const double r_max = radial_cutoff(ff, cfg);
    // r^{2p+2} coth(βr/2) = r^{2p+1}·(2/β)·xcothx(βr/2)
    const auto f = [&](double r) {
        return radial_weight(ff, r) * (2.0 / beta) * xcothx(0.5 * beta * r) * eps / (r * r + eps * eps);
    };
    std::vector<double> breaks{0.0};
    for (double r = 0.25 * eps; r < r_max; r *= 2.0) breaks.push_back(r);
    breaks.push_back(r_max);
    const auto res = integrate_panels(f, breaks, cfg.rel_tol);
    require_converged(res, cfg, "xi_zero");
    return ff.angular_sq_integral / kPi * res.value;
}

double xi_zero(const FormFactor& ff, double beta, const QuadratureConfig& cfg) {
    if (!ff.infrared_singular()) return 0.0;
    if (ff.angular_sq_integral == 0.0) return 0.0;

    // I(ε) = ξ(0) + c₁ ε lnε + c₂ ε + c₃ ε² + …; fit the basis on the last
    // four members of ε_k = ε₀ 2^{−k} and watch the fit settle.
    constexpr int kHalvings = 12;
    constexpr int kFit = 4;
    const double eps0 = std::min({1.0, 1.0 / beta, std::pow(ff.decay_a, -1.0 / ff.decay_m)});
    std::vector<double> eps(kHalvings + 1), value(kHalvings + 1);
    for (int k = 0; k <= kHalvings; ++k) {
        eps[k] = eps0 * std::ldexp(1.0, -k);
        value[k] = xi_zero_at(ff, beta, eps[k], cfg);
    }
    const auto fit = [&](int last) {
        Eigen::Matrix4d basis;
        Eigen::Vector4d rhs;
        for (int i = 0; i < kFit; ++i) {
            const double e = eps[last - i];
            basis.row(i) << 1.0, e * std::log(e), e, e * e;
            rhs(i) = value[last - i];
        }
        return basis.fullPivLu().solve(rhs)(0);
    };
    const double best = fit(kHalvings);
    const double previous = fit(kHalvings - 1);
    const double tol = std::max(1e-6, 1e3 * cfg.rel_tol) * std::abs(best);
    if (std::abs(best - previous) > tol) {
        std::ostringstream os;
        os << "xi_zero extrapolation residual " << std::abs(best - previous) << " exceeds " << tol;
        throw Error(ErrorCode::NoConvergence, os.str());
    }
    return best;
}

double gamma_fn(const FormFactor& ff, double beta, double t, const QuadratureConfig& cfg) {
    if (!(t >= 0.0)) throw Error(ErrorCode::InvalidInput, "gamma_fn: t must be >= 0");
    if (t == 0.0 || ff.angular_sq_integral == 0.0) return 0.0;
    const double r_max = radial_cutoff(ff, cfg);
    // r^{2p} coth(βr/2) sin²(rt/2) = r^{2p+1} (t²/2β) xcothx(βr/2) sinc²(rt/2)
    const auto f = [&](double r) {
        const double sc = sinc(0.5 * r * t);
        return radial_weight(ff, r) * (t * t / (2.0 * beta)) * xcothx(0.5 * beta * r) * sc * sc;
    };
    const auto res = integrate_panels(f, oscillation_breaks(r_max, t), cfg.rel_tol);
    require_converged(res, cfg, "gamma_fn");
    return ff.angular_sq_integral * res.value;
}

double s_fn(const FormFactor& ff, double t, const QuadratureConfig& cfg) {
    if (!(t >= 0.0)) throw Error(ErrorCode::InvalidInput, "s_fn: t must be >= 0");
    if (t == 0.0 || ff.angular_sq_integral == 0.0) return 0.0;
    const double r_max = radial_cutoff(ff, cfg);
    const auto f = [&](double r) {
        if (r == 0.0) return 0.0;
        return radial_weight(ff, r) / r * x_minus_sin(r * t);
    };
    const auto res = integrate_panels(f, oscillation_breaks(r_max, t), cfg.rel_tol);
    require_converged(res, cfg, "s_fn");
    return 0.5 * ff.angular_sq_integral * res.value;
}

BathFunctions BathFunctions::compute(const FormFactor& ff, const BathParams& bath,
                                     const QuadratureConfig& cfg) {
    validate_ultraviolet(ff, bath);
    BathFunctions bf;
    bf.ff_ = ff;
    bf.beta_ = bath.beta;
    bf.cfg_ = cfg;
    bf.inner_ = resodyn::inner_1_over_k(ff, cfg);
    bf.xi0_ = xi_zero(ff, bath.beta, cfg);
    bf.gamma_inf_ = 0.5 * kPi * bf.xi0_;
    return bf;
}

CMatrix delta_table(const SystemSpec& spec, const BathFunctions& bf) {
    const int n = spec.dim();
    const RVector& g = spec.g_levels();
    CMatrix d(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double re = -0.5 * (g(a) * g(a) - g(b) * g(b)) * bf.inner_1_over_k();
            const double im = 0.5 * kPi * (g(a) - g(b)) * (g(a) - g(b)) * bf.xi0();
            d(a, b) = cplx(re, im);
        }
    return d;
}

}  // namespace resodyn
