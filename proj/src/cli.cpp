#include "resodyn/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "resodyn/config.hpp"
#include "resodyn/dynamics.hpp"
#include "resodyn/error.hpp"
#include "resodyn/oracle.hpp"
#include "resodyn/resonances.hpp"
#include "resodyn/spin_boson.hpp"

namespace resodyn::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double x) { return fmt::format("{:.17g}", x == 0.0 ? 0.0 : x); }  // no "-0"

std::string join(const std::vector<std::string>& cols) {
    std::string s;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) s += ',';
        s += cols[i];
    }
    return s;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::string> rows;
    json meta = json::object();
};

struct Options {
    std::string config;
    std::string out;
    bool describe = false;
    int threads = 0;
};

std::string pair_name(int a, int b) { return std::to_string(a + 1) + "_" + std::to_string(b + 1); }

CMatrix default_rho0(int n) {
    return CMatrix::Constant(n, n, cplx(1.0 / n, 0.0));
}

json quadrature_json(const QuadratureConfig& q) {
    return {{"rel_tol", q.rel_tol}, {"abs_tol", q.abs_tol}, {"r_max_factor", q.r_max_factor}};
}

json report_json(const AssumptionReport& r) {
    json pairs = json::array();
    for (auto [a, b] : r.pairs) pairs.push_back({a + 1, b + 1});
    return {{"holds", r.holds}, {"pairs", pairs}, {"detail", r.detail}};
}

BathFunctions bath_functions(const RunConfig& cfg) {
    return BathFunctions::compute(cfg.require_form_factor(), cfg.require_bath(), cfg.quadrature);
}

// ---- resonances -------------------------------------------------------

Table cmd_resonances(const RunConfig& cfg) {
    const SystemSpec& spec = cfg.require_system();
    const CouplingParams& cp = cfg.require_coupling();
    const BathFunctions bf = bath_functions(cfg);
    const int n = spec.dim();
    const auto op = effective_operator(spec, bf, cp);
    const auto sp = resonances_numeric(op);
    const CMatrix delta = delta_table(spec, bf);

    std::optional<TMatrix> tm;
    std::string t_error;
    try {
        tm = t_matrix(spec, bf);
    } catch (const Error& e) {
        t_error = e.what();
    }

    Table t;
    t.columns = {"a", "b", "re_eps", "im_eps", "re_parent", "im_parent", "re_approx", "im_approx"};
    const double lam2 = cp.lambda() * cp.lambda();
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const cplx eps = sp.value(a, b);
            const cplx parent = lam2 * delta(a, b);
            cplx approx(kNaN, kNaN);
            if (a != b) {
                try {
                    approx = eta_ab(spec, delta, cp, a, b);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::DegenerateDenominator) throw;
                }
            } else if (tm) {
                approx = eps_a_approx(*tm, cp, a);
            }
            t.rows.push_back(join({std::to_string(a + 1), std::to_string(b + 1), num(eps.real()),
                                   num(eps.imag()), num(parent.real()), num(parent.imag()),
                                   num(approx.real()), num(approx.imag())}));
        }

    json amb = json::array();
    for (const auto& [x, y] : sp.ambiguous) amb.push_back({{x.a + 1, x.b + 1}, {y.a + 1, y.b + 1}});
    t.meta["a3"] = report_json(check_a3(spec, bf));
    t.meta["a4"] = report_json(check_a4(spec, bf));
    t.meta["ambiguous_labels"] = amb;
    t.meta["biorthogonality_error"] = sp.biorthogonality_error();
    t.meta["inner_1_over_k"] = bf.inner_1_over_k();
    t.meta["xi0"] = bf.xi0();
    if (tm) {
        t.meta["t_spectrum"] = std::vector<double>(tm->xi.data(), tm->xi.data() + tm->xi.size());
    } else {
        t.meta["t_matrix_error"] = t_error;
    }
    t.meta["notes"] = {
        "eps: eigenvalues of sigma*L_S + lambda^2*diag(delta); the O(lambda^2(sigma+|lambda|)) remainder is dropped",
        "approx: eta_ab for a != b, 2i(sigma^2/lambda^2)xi_a for a == b; NaN where a delta difference vanishes"};
    return t;
}

// ---- dynamics ---------------------------------------------------------

Table cmd_dynamics(const RunConfig& cfg, int threads) {
    const SystemSpec& spec = cfg.require_system();
    const CouplingParams& cp = cfg.require_coupling();
    const BathFunctions bf = bath_functions(cfg);
    const int n = spec.dim();
    const CMatrix rho0 = cfg.dynamics.rho0.value_or(default_rho0(n));
    const DensityMatrix rho0_dm = DensityMatrix::create(rho0);

    std::optional<PerturbativePropagator> prop;
    std::optional<DephasingPropagator> deph;
    std::vector<double> grid;
    if (cp.sigma() == 0.0) {
        deph.emplace(spec, bf, cp.lambda());
    } else {
        prop.emplace(spec, bf, cp);
    }
    if (cfg.dynamics.t_max) {
        grid = geometric_time_grid(*cfg.dynamics.t_max, cfg.dynamics.points);
    } else {
        const auto sp = prop ? prop->spectrum() : resonances_numeric(effective_operator(spec, bf, cp));
        grid = default_time_grid(sp, cfg.dynamics.points);
    }

    Table t;
    t.columns = {"t"};
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
            t.columns.push_back("re_rho_" + pair_name(a, b));
            t.columns.push_back("im_rho_" + pair_name(a, b));
        }
    t.columns.push_back("manifold_distance");

    t.rows = parallel_rows(static_cast<int>(grid.size()), threads, [&](int i) {
        const double time = grid[i];
        const CMatrix rho = deph ? deph->evolve(rho0_dm, time).matrix() : prop->evolve(rho0, time);
        std::vector<std::string> cols{num(time)};
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b) {
                cols.push_back(num(rho(a, b).real()));
                cols.push_back(num(rho(a, b).imag()));
            }
        cols.push_back(num(manifold_distance(rho)));
        return join(cols);
    });
    t.meta["propagator"] = deph ? "exact dephasing (sigma = 0)" : "leading-order perturbative";
    t.meta["notes"] = deph ? json::array({"exact for sigma = 0"})
                           : json::array({"off-diagonals: exp(i t eps_ba) rho0_ab; O_lambda(sigma) + O(lambda) dropped",
                                          "populations: 1/N + sum_b D_ab(t) rho0_bb with eps_cc = 2i(sigma^2/lambda^2)xi_c"});
    return t;
}

// ---- spinboson --------------------------------------------------------

double spinboson_xi0(const RunConfig& cfg) {
    if (cfg.spinboson_xi0) return *cfg.spinboson_xi0;
    return bath_functions(cfg).xi0();
}

Table cmd_spinboson_sweep(const RunConfig& cfg, const SweepSpec& sw, int threads) {
    if (sw.parameter != "gamma")
        throw Error(ErrorCode::ConfigError, "sweep.parameter: spinboson sweeps run over gamma");
    const double xi0 = spinboson_xi0(cfg);
    if (!(xi0 > 0.0))
        throw Error(ErrorCode::ConfigError, "bath.form_factor.p: spin-boson analytics need xi0 > 0 (p = -1/2)");
    const double lambda = cfg.require_coupling().lambda();
    const std::vector<double> gammas = sw.values();

    Table t;
    t.columns = {"gamma", "re_w3", "im_w3", "re_w4", "im_w4", "re_r", "im_r", "regime"};
    t.rows = parallel_rows(static_cast<int>(gammas.size()), threads, [&](int i) {
        const double g = gammas[i];
        const auto cp = CouplingParams::create(g * lambda * lambda, lambda);
        const auto w = w_eigenvalues(cp, xi0);
        const cplx r = r_parameter(g, xi0);
        return join({num(g), num(w[2].real()), num(w[2].imag()), num(w[3].real()), num(w[3].imag()),
                     num(r.real()), num(r.imag()), std::string(to_string(classify_regime(g, xi0)))});
    });
    t.meta["xi0"] = xi0;
    t.meta["lambda"] = lambda;
    t.meta["gamma_star"] = gamma_star(xi0);
    t.meta["notes"] = {"closed-form eigenvalues of the 4x4 W matrix; additive O(lambda^2) terms neglected"};
    return t;
}

Table cmd_spinboson_dynamics(const RunConfig& cfg, int threads) {
    const double xi0 = spinboson_xi0(cfg);
    if (!(xi0 > 0.0))
        throw Error(ErrorCode::ConfigError, "bath.form_factor.p: spin-boson analytics need xi0 > 0 (p = -1/2)");
    const auto sol = w_eigenpairs(cfg.require_coupling(), xi0);
    CMatrix rho0 = default_rho0(2);
    if (cfg.dynamics.rho0) {
        if (cfg.dynamics.rho0->rows() != 2)
            throw Error(ErrorCode::ConfigError, "dynamics.rho0: spinboson needs a 2x2 state");
        rho0 = *cfg.dynamics.rho0;
    }
    DensityMatrix::create(rho0);
    const double rate = decoherence_rate(sol);
    const auto grid = geometric_time_grid(cfg.dynamics.t_max.value_or(20.0 / rate), cfg.dynamics.points);

    Table t;
    t.columns = {"t", "rho_pp", "re_rho_pm", "im_rho_pm"};
    t.rows = parallel_rows(static_cast<int>(grid.size()), threads, [&](int i) {
        const CMatrix r = rho_t_energy_basis(sol, rho0, grid[i]);
        return join({num(grid[i]), num(r(0, 0).real()), num(r(0, 1).real()), num(r(0, 1).imag())});
    });
    t.meta["regime"] = std::string(to_string(sol.regime));
    t.meta["gamma"] = sol.gamma;
    t.meta["gamma_star"] = sol.gamma_star;
    t.meta["decoherence_rate"] = rate;
    t.meta["notes"] = {"energy basis {+, -}; additive O(lambda^2) terms neglected"};
    return t;
}

// ---- sweep ------------------------------------------------------------

Table cmd_sweep(const RunConfig& cfg, const SweepSpec& sw, int threads) {
    const SystemSpec& spec = cfg.require_system();
    const CouplingParams& base = cfg.require_coupling();
    const BathFunctions bf = bath_functions(cfg);
    const int n = spec.dim();
    const std::vector<double> values = sw.values();

    Table t;
    t.columns = {sw.parameter};
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            t.columns.push_back("re_eps_" + pair_name(a, b));
            t.columns.push_back("im_eps_" + pair_name(a, b));
        }
    std::vector<std::string> failures(values.size());
    t.rows = parallel_rows(static_cast<int>(values.size()), threads, [&](int i) {
        const double v = values[i];
        CouplingParams cp = base;
        if (sw.parameter == "sigma") cp = CouplingParams::create(v, base.lambda());
        else if (sw.parameter == "lambda") cp = CouplingParams::create(base.sigma(), v);
        else cp = CouplingParams::create(v * base.lambda() * base.lambda(), base.lambda());
        std::vector<std::string> cols{num(v)};
        try {
            const auto sp = resonances_numeric(effective_operator(spec, bf, cp));
            for (int k = 0; k < n * n; ++k) {
                cols.push_back(num(sp.eigenvalues(k).real()));
                cols.push_back(num(sp.eigenvalues(k).imag()));
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateAtRequestedPoint) throw;
            failures[i] = e.what();
            for (int k = 0; k < 2 * n * n; ++k) cols.push_back(num(kNaN));
        }
        return join(cols);
    });
    json collisions = json::array();
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!failures[i].empty()) collisions.push_back({{sw.parameter, values[i]}, {"detail", failures[i]}});
    t.meta["collisions"] = collisions;
    t.meta["notes"] = {"labels assigned by continuation from sigma = 0; rows at eigenvalue collisions are NaN"};
    return t;
}

// ---- oracle-validate --------------------------------------------------

json cmd_oracle(const RunConfig& cfg, bool& passed) {
    oracle::ValidationInput in{cfg.require_form_factor(), cfg.require_bath(), cfg.quadrature};
    if (cfg.coupling) in.lambda = cfg.coupling->lambda();
    in.discrete_modes = cfg.oracle_modes;
    in.fock_cutoff = cfg.oracle_fock_cutoff;
    const auto rep = oracle::run_validation(in);
    passed = rep.all_passed();
    json checks = json::array();
    for (const auto& c : rep.checks)
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"max_error", c.max_error},
                          {"tolerance", c.tolerance},
                          {"detail", c.detail}});
    return {{"all_passed", passed}, {"checks", checks}};
}

// ---- output -----------------------------------------------------------

void write_text(const Options& opt, const std::string& body, std::ostream& out) {
    if (opt.out.empty()) {
        out << body;
        return;
    }
    std::ofstream f(opt.out, std::ios::binary);
    if (!f) throw Error(ErrorCode::ConfigError, "--out: cannot write '" + opt.out + "'");
    f << body;
}

void write_meta(const Options& opt, const std::string& subcommand, const RunConfig& cfg,
                const std::vector<std::string>& columns, json meta, int threads) {
    if (opt.out.empty()) return;
    meta["software_version"] = kVersion;
    meta["subcommand"] = subcommand;
    meta["columns"] = columns;
    meta["quadrature"] = quadrature_json(cfg.quadrature);
    meta["threads"] = threads;
    meta["config"] = cfg.source;
    std::ofstream f(opt.out + ".meta.json");
    if (!f) throw Error(ErrorCode::ConfigError, "--out: cannot write sidecar for '" + opt.out + "'");
    f << meta.dump(2) << '\n';
}

void emit(const Options& opt, const std::string& subcommand, const RunConfig& cfg, const Table& t,
          int threads, std::ostream& out) {
    std::string body = join(t.columns) + '\n';
    for (const auto& r : t.rows) body += r + '\n';
    write_text(opt, body, out);
    write_meta(opt, subcommand, cfg, t.columns, t.meta, threads);
}

SweepSpec sweep_from_args(const std::vector<std::string>& a, const std::string& sub) {
    // PARAM MIN..MAX SCALE POINTS
    if (a.size() != 4)
        throw Error(ErrorCode::ConfigError, sub + ": expected PARAM MIN..MAX linear|log POINTS");
    SweepSpec sw;
    sw.parameter = a[0];
    if (sw.parameter != "sigma" && sw.parameter != "lambda" && sw.parameter != "gamma")
        throw Error(ErrorCode::ConfigError, "sweep.parameter: expected sigma, lambda or gamma");
    std::tie(sw.min, sw.max) = parse_range(a[1]);
    sw.scale = parse_scale(a[2]);
    try {
        std::size_t used = 0;
        sw.points = std::stoi(a[3], &used);
        if (used != a[3].size()) throw std::invalid_argument(a[3]);
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::ConfigError, "sweep.points: cannot parse '" + a[3] + "'");
    }
    if (sw.points < 2) throw Error(ErrorCode::ConfigError, "sweep.points: must be >= 2");
    if (sw.scale == Scale::Log && !(sw.min > 0.0 && sw.max > 0.0))
        throw Error(ErrorCode::ConfigError, "sweep.min: log sweeps need positive bounds");
    return sw;
}

RunConfig load(const Options& opt) {
    if (opt.config.empty()) return parse_config(json::object());
    return load_config(opt.config);
}

}  // namespace

int default_threads() {
    if (const char* env = std::getenv("RESODYN_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::string> parallel_rows(int count, int threads, const std::function<std::string(int)>& f) {
    std::vector<std::string> rows(count);
    const int workers = std::max(1, std::min(threads, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) rows[i] = f(i);
        return rows;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    rows[i] = f(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = count;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return rows;
}

std::string describe_output(const std::string& subcommand) {
    static const std::vector<std::pair<std::string, std::string>> docs = {
        {"resonances",
         "resonances (CSV, one row per label (a, b), 1-based, row-major):\n"
         "  a, b        resonance label\n"
         "  re_eps, im_eps        numeric eigenvalue of sigma*L_S + lambda^2*diag(delta) continued from (a, b)\n"
         "  re_parent, im_parent  sigma = 0 parent lambda^2 * delta_ab\n"
         "  re_approx, im_approx  eta_ab for a != b; 2i(sigma^2/lambda^2)xi_a for a == b; NaN if undefined\n"},
        {"dynamics",
         "dynamics (CSV, one row per time on a geometric grid starting at 0):\n"
         "  t                   time\n"
         "  re_rho_A_B, im_rho_A_B  reduced density matrix element (A <= B, 1-based, G eigenbasis)\n"
         "  manifold_distance   trace norm of the off-diagonal part\n"},
        {"spinboson",
         "spinboson sweep gamma MIN..MAX linear|log POINTS (CSV):\n"
         "  gamma         sigma / lambda^2\n"
         "  re_w3, im_w3  closed-form resonance w3\n"
         "  re_w4, im_w4  closed-form resonance w4\n"
         "  re_r, im_r    eigenvector parameter r\n"
         "  regime        overlapping | critical | isolated\n"
         "spinboson (CSV, energy-basis dynamics):\n"
         "  t             time\n"
         "  rho_pp        population of +\n"
         "  re_rho_pm, im_rho_pm  coherence [rho_t]_{+,-}\n"},
        {"sweep",
         "sweep PARAM MIN..MAX linear|log POINTS (CSV):\n"
         "  PARAM                  swept value (sigma, lambda or gamma = sigma/lambda^2)\n"
         "  re_eps_A_B, im_eps_A_B labeled resonance (1-based); NaN at eigenvalue collisions\n"},
        {"oracle-validate",
         "oracle-validate (JSON): {all_passed, checks: [{name, passed, max_error, tolerance, detail}]}\n"},
    };
    std::string s;
    for (const auto& [name, text] : docs)
        if (subcommand.empty() || subcommand == name) s += text;
    return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Resonances, reduced dynamics and decoherence of an N-level system in a bosonic bath",
                 "resodyn"};
    Options opt;
    app.add_option("--config", opt.config, "JSON run configuration");
    app.add_option("--out", opt.out, "output file (default: stdout); writes OUT.meta.json alongside");
    app.add_flag("--describe-output", opt.describe, "document the output columns and exit");
    app.add_option("--threads", opt.threads, "worker threads (default: RESODYN_THREADS or all cores)")
        ->check(CLI::Range(1, 1024));
    app.set_version_flag("--version", kVersion);

    std::vector<std::string> sb_args, sweep_args;
    auto* c_res = app.add_subcommand("resonances", "labeled resonance spectrum");
    auto* c_dyn = app.add_subcommand("dynamics", "reduced density-matrix trace");
    auto* c_sb = app.add_subcommand("spinboson", "spin-boson closed forms");
    c_sb->add_option("args", sb_args, "sweep gamma MIN..MAX linear|log POINTS");
    auto* c_sw = app.add_subcommand("sweep", "resonance spectrum over a parameter sweep");
    c_sw->add_option("args", sweep_args, "PARAM MIN..MAX linear|log POINTS (default: sweep section)");
    auto* c_or = app.add_subcommand("oracle-validate", "run the cross-check suite");
    for (auto* c : {c_res, c_dyn, c_sb, c_sw, c_or}) c->fallthrough();
    app.require_subcommand(0, 1);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    std::string sub;
    if (!app.get_subcommands().empty()) sub = app.get_subcommands().front()->get_name();
    if (opt.describe) {
        out << describe_output(sub);
        return kOk;
    }
    if (sub.empty()) {
        err << app.help();
        return kConfigError;
    }
    const int threads = opt.threads > 0 ? opt.threads : default_threads();

    try {
        const RunConfig cfg = load(opt);
        if (sub == "resonances") {
            emit(opt, sub, cfg, cmd_resonances(cfg), threads, out);
        } else if (sub == "dynamics") {
            emit(opt, sub, cfg, cmd_dynamics(cfg, threads), threads, out);
        } else if (sub == "spinboson") {
            if (sb_args.empty()) {
                emit(opt, sub, cfg, cmd_spinboson_dynamics(cfg, threads), threads, out);
            } else {
                if (sb_args.front() != "sweep")
                    throw Error(ErrorCode::ConfigError, "spinboson: unknown action '" + sb_args.front() + "'");
                const SweepSpec sw = sweep_from_args({sb_args.begin() + 1, sb_args.end()}, "spinboson sweep");
                emit(opt, sub, cfg, cmd_spinboson_sweep(cfg, sw, threads), threads, out);
            }
        } else if (sub == "sweep") {
            SweepSpec sw;
            if (!sweep_args.empty()) sw = sweep_from_args(sweep_args, "sweep");
            else if (cfg.sweep) sw = *cfg.sweep;
            else throw Error(ErrorCode::ConfigError, "sweep: missing (give PARAM MIN..MAX SCALE POINTS)");
            emit(opt, sub, cfg, cmd_sweep(cfg, sw, threads), threads, out);
        } else {
            bool passed = false;
            json report = cmd_oracle(cfg, passed);
            write_text(opt, report.dump(2) + '\n', out);
            json meta{{"all_passed", passed}};
            write_meta(opt, sub, cfg, {}, meta, threads);
            return passed ? kOk : kValidationFailed;
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::InvalidInput) {
            err << "error: " << e.what() << '\n';
            return kConfigError;
        }
        err << "error: " << to_string(ErrorCode::ComputeError) << " in " << sub << ": " << e.what() << '\n';
        return kComputeError;
    }
    return kOk;
}

}  // namespace resodyn::cli
