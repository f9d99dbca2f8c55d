#include "resodyn/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "resodyn/error.hpp"

namespace resodyn {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw Error(ErrorCode::ConfigError, key + ": " + what);
}

const json* find(const json& j, const char* key) {
    if (!j.is_object()) return nullptr;
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

const json& need(const json& j, const char* key, const std::string& path) {
    const json* v = find(j, key);
    if (v == nullptr) fail(path, "missing");
    return *v;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

int integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
}

double number_or(const json& j, const char* key, const std::string& path, double fallback) {
    const json* v = find(j, key);
    return v == nullptr ? fallback : number(*v, path);
}

// Row-major list of [re, im] pairs.
CMatrix complex_matrix(const json& v, int n, const std::string& path) {
    if (!v.is_array() || v.size() != static_cast<std::size_t>(n) * n)
        fail(path, "expected " + std::to_string(n * n) + " [re, im] pairs");
    CMatrix m(n, n);
    for (int i = 0; i < n * n; ++i) {
        const json& e = v[i];
        const std::string at = path + "[" + std::to_string(i) + "]";
        if (!e.is_array() || e.size() != 2) fail(at, "expected [re, im]");
        m(i / n, i % n) = cplx(number(e[0], at), number(e[1], at));
    }
    return m;
}

// Domain constructors throw InvalidInput; re-tag those as config errors.
template <class F>
auto guarded(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InvalidInput) throw;
        fail(path, e.what());
    }
}

}  // namespace

std::vector<double> SweepSpec::values() const {
    std::vector<double> out(points);
    for (int i = 0; i < points; ++i) {
        const double f = static_cast<double>(i) / (points - 1);
        out[i] = scale == Scale::Log ? min * std::pow(max / min, f) : min + (max - min) * f;
    }
    out.back() = max;
    return out;
}

std::pair<double, double> parse_range(const std::string& text) {
    const auto dots = text.find("..");
    if (dots == std::string::npos) fail("sweep.range", "expected MIN..MAX, got '" + text + "'");
    try {
        std::size_t used = 0;
        const std::string lo_s = text.substr(0, dots), hi_s = text.substr(dots + 2);
        const double lo = std::stod(lo_s, &used);
        if (used != lo_s.size()) throw std::invalid_argument(lo_s);
        const double hi = std::stod(hi_s, &used);
        if (used != hi_s.size()) throw std::invalid_argument(hi_s);
        return {lo, hi};
    } catch (const std::logic_error&) {
        fail("sweep.range", "cannot parse '" + text + "'");
    }
}

Scale parse_scale(const std::string& text) {
    if (text == "linear") return Scale::Linear;
    if (text == "log") return Scale::Log;
    fail("sweep.scale", "expected 'linear' or 'log', got '" + text + "'");
}

RunConfig parse_config(const json& j) {
    if (!j.is_object()) fail("<root>", "expected a JSON object");
    RunConfig cfg;
    cfg.source = j;

    if (const json* sys = find(j, "system")) {
        const int n = integer(need(*sys, "dim", "system.dim"), "system.dim");
        if (n < 2) fail("system.dim", "must be >= 2");
        const CMatrix hs = complex_matrix(need(*sys, "hs", "system.hs"), n, "system.hs");
        const json& gj = need(*sys, "g_levels", "system.g_levels");
        if (!gj.is_array() || gj.size() != static_cast<std::size_t>(n))
            fail("system.g_levels", "expected " + std::to_string(n) + " numbers");
        RVector g(n);
        for (int a = 0; a < n; ++a) g(a) = number(gj[a], "system.g_levels[" + std::to_string(a) + "]");
        cfg.system = guarded("system", [&] { return SystemSpec::create(hs, g); });
    }

    if (const json* bath = find(j, "bath")) {
        const double beta = number(need(*bath, "beta", "bath.beta"), "bath.beta");
        cfg.bath = guarded("bath.beta", [&] { return BathParams::create(beta); });
        const json& f = need(*bath, "form_factor", "bath.form_factor");
        const double p = number(need(f, "p", "bath.form_factor.p"), "bath.form_factor.p");
        const double a = number(need(f, "decay_a", "bath.form_factor.decay_a"), "bath.form_factor.decay_a");
        const int m = integer(need(f, "decay_m", "bath.form_factor.decay_m"), "bath.form_factor.decay_m");
        const double ang = number(need(f, "angular_sq_integral", "bath.form_factor.angular_sq_integral"),
                                  "bath.form_factor.angular_sq_integral");
        cfg.form_factor = guarded("bath.form_factor", [&] { return FormFactor::create(p, a, m, ang); });
        guarded("bath.form_factor.decay_a", [&] {
            validate_ultraviolet(*cfg.form_factor, *cfg.bath);
            return 0;
        });
    }

    if (const json* c = find(j, "coupling")) {
        const double sigma = number(need(*c, "sigma", "coupling.sigma"), "coupling.sigma");
        const double lambda = number(need(*c, "lambda", "coupling.lambda"), "coupling.lambda");
        cfg.coupling = guarded("coupling", [&] { return CouplingParams::create(sigma, lambda); });
    }

    if (const json* q = find(j, "quadrature")) {
        const QuadratureConfig d;
        const double rel = number_or(*q, "rel_tol", "quadrature.rel_tol", d.rel_tol);
        const double abs = number_or(*q, "abs_tol", "quadrature.abs_tol", d.abs_tol);
        const double fac = number_or(*q, "r_max_factor", "quadrature.r_max_factor", d.r_max_factor);
        cfg.quadrature = guarded("quadrature", [&] { return QuadratureConfig::create(rel, abs, fac); });
    }

    if (const json* d = find(j, "dynamics")) {
        if (const json* pts = find(*d, "points")) {
            cfg.dynamics.points = integer(*pts, "dynamics.points");
            if (cfg.dynamics.points < 2) fail("dynamics.points", "must be >= 2");
        }
        if (const json* tm = find(*d, "t_max")) {
            cfg.dynamics.t_max = number(*tm, "dynamics.t_max");
            if (!(*cfg.dynamics.t_max > 0.0)) fail("dynamics.t_max", "must be positive");
        }
        if (const json* r = find(*d, "rho0")) {
            if (!cfg.system) fail("dynamics.rho0", "needs the system section");
            cfg.dynamics.rho0 = complex_matrix(*r, cfg.system->dim(), "dynamics.rho0");
            guarded("dynamics.rho0", [&] { return DensityMatrix::create(*cfg.dynamics.rho0); });
        }
    }

    if (const json* s = find(j, "sweep")) {
        SweepSpec sw;
        const json& p = need(*s, "parameter", "sweep.parameter");
        if (!p.is_string()) fail("sweep.parameter", "expected a string");
        sw.parameter = p.get<std::string>();
        if (sw.parameter != "sigma" && sw.parameter != "lambda" && sw.parameter != "gamma")
            fail("sweep.parameter", "expected sigma, lambda or gamma");
        sw.min = number(need(*s, "min", "sweep.min"), "sweep.min");
        sw.max = number(need(*s, "max", "sweep.max"), "sweep.max");
        sw.points = integer(need(*s, "points", "sweep.points"), "sweep.points");
        if (sw.points < 2) fail("sweep.points", "must be >= 2");
        if (const json* sc = find(*s, "scale")) {
            if (!sc->is_string()) fail("sweep.scale", "expected a string");
            sw.scale = parse_scale(sc->get<std::string>());
        }
        if (sw.scale == Scale::Log && !(sw.min > 0.0 && sw.max > 0.0))
            fail("sweep.min", "log sweeps need positive bounds");
        cfg.sweep = sw;
    }

    if (const json* sb = find(j, "spinboson")) {
        if (const json* x = find(*sb, "xi0")) {
            cfg.spinboson_xi0 = number(*x, "spinboson.xi0");
            if (!(*cfg.spinboson_xi0 > 0.0)) fail("spinboson.xi0", "must be positive");
        }
    }

    if (const json* o = find(j, "oracle")) {
        if (const json* m = find(*o, "discrete_modes")) {
            cfg.oracle_modes = integer(*m, "oracle.discrete_modes");
            if (cfg.oracle_modes < 10) fail("oracle.discrete_modes", "must be >= 10");
        }
        if (const json* f = find(*o, "fock_cutoff")) {
            cfg.oracle_fock_cutoff = integer(*f, "oracle.fock_cutoff");
            if (cfg.oracle_fock_cutoff < 1) fail("oracle.fock_cutoff", "must be >= 1");
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("--config", "cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        fail("--config", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

const SystemSpec& RunConfig::require_system() const {
    if (!system) fail("system", "missing");
    return *system;
}

const FormFactor& RunConfig::require_form_factor() const {
    if (!form_factor) fail("bath.form_factor", "missing");
    return *form_factor;
}

const BathParams& RunConfig::require_bath() const {
    if (!bath) fail("bath", "missing");
    return *bath;
}

const CouplingParams& RunConfig::require_coupling() const {
    if (!coupling) fail("coupling", "missing");
    return *coupling;
}

}  // namespace resodyn
