#include "resodyn/oracle.hpp"

#include <cfloat>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "resodyn/dynamics.hpp"
#include "resodyn/error.hpp"

namespace resodyn::oracle {

namespace {

constexpr double kPi = 3.14159265358979323846;

double coth(double x) { return 1.0 / std::tanh(x); }

CMatrix number_operator(int cutoff) {
    CMatrix n = CMatrix::Zero(cutoff + 1, cutoff + 1);
    for (int k = 0; k <= cutoff; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

CMatrix annihilation(int cutoff) {
    CMatrix a = CMatrix::Zero(cutoff + 1, cutoff + 1);
    for (int k = 1; k <= cutoff; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

// 𝟙 ⊗ … ⊗ op (slot j) ⊗ … ⊗ 𝟙 over `modes` oscillators.
CMatrix embed(const CMatrix& op, int slot, int modes) {
    const auto d = op.rows();
    CMatrix out = CMatrix::Identity(1, 1);
    for (int j = 0; j < modes; ++j)
        out = kron(out, j == slot ? op : CMatrix::Identity(d, d));
    return out;
}

CVector lapack_eigenvalues(const CMatrix& m) {
    const auto n = static_cast<lapack_int>(m.rows());
    CMatrix a = m;
    CVector w(n);
    std::complex<double> dummy{};
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, w.data(),
                                          &dummy, 1, &dummy, 1);
    if (info != 0) {
        std::ostringstream os;
        os << "zgeev failed with info = " << info;
        throw Error(ErrorCode::NoConvergence, os.str());
    }
    return w;
}

// Simultaneous Aberth iteration on f(z) = det(A − zI); the Newton quotient
// f/f' = −1 / tr((A − zI)⁻¹) comes from an LU factorization.
CVector determinant_roots(const CMatrix& m) {
    const auto n = static_cast<int>(m.rows());
    const cplx centre = m.trace() / static_cast<double>(n);
    const double radius = std::max(m.norm(), 1e-300);
    CVector z(n);
    for (int k = 0; k < n; ++k)
        z(k) = centre + radius * std::polar(1.0, 2.0 * kPi * (k + 0.25) / n + 0.4);

    const auto newton = [&](cplx zk) -> cplx {
        const CMatrix shifted = m - zk * CMatrix::Identity(n, n);
        Eigen::FullPivLU<CMatrix> lu(shifted);
        if (!lu.isInvertible()) return 0.0;
        const cplx tr = lu.inverse().trace();
        if (tr == cplx(0.0)) return 0.0;
        return -1.0 / tr;
    };

    const double scale = std::max(radius, 1.0);
    double last_step = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 500; ++iter) {
        last_step = 0.0;
        for (int k = 0; k < n; ++k) {
            const cplx ratio = newton(z(k));
            cplx repulsion = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != k) repulsion += 1.0 / (z(k) - z(j));
            const cplx step = ratio / (1.0 - ratio * repulsion);
            z(k) -= step;
            last_step = std::max(last_step, std::abs(step));
        }
        if (last_step <= 1e-15 * scale) break;
    }
    if (!(last_step <= 1e-8 * scale)) {
        std::ostringstream os;
        os << "determinant root iteration stalled with step " << last_step;
        throw Error(ErrorCode::NoConvergence, os.str());
    }
    return z;
}

}  // namespace

DiscreteBath DiscreteBath::create(std::vector<double> omega, std::vector<double> coupling,
                                  double beta) {
    if (omega.size() != coupling.size() || omega.empty())
        throw Error(ErrorCode::InvalidInput, "discrete bath needs matching non-empty mode lists");
    if (!(beta > 0.0)) throw Error(ErrorCode::InvalidInput, "discrete bath needs beta > 0");
    for (std::size_t j = 0; j < omega.size(); ++j) {
        if (!(omega[j] > 0.0) || !std::isfinite(omega[j]))
            throw Error(ErrorCode::InvalidInput, "mode frequencies must be positive");
        if (!std::isfinite(coupling[j])) throw Error(ErrorCode::InvalidInput, "couplings must be finite");
        for (std::size_t k = 0; k < j; ++k)
            if (omega[k] == omega[j]) throw Error(ErrorCode::InvalidInput, "mode frequencies must be distinct");
    }
    return DiscreteBath(std::move(omega), std::move(coupling), beta);
}

DiscreteBath DiscreteBath::log_grid(const FormFactor& ff, double beta, int modes, double r_min,
                                    double r_max) {
    if (modes < 1 || !(r_min > 0.0) || !(r_max > r_min))
        throw Error(ErrorCode::InvalidInput, "log grid needs modes >= 1 and 0 < r_min < r_max");
    const double du = std::log(r_max / r_min) / modes;
    std::vector<double> omega(modes), coupling(modes);
    for (int j = 0; j < modes; ++j) {
        const double r = r_min * std::exp((j + 0.5) * du);
        // |g|² r² dr with dr = r du
        const double weight = ff.angular_sq_integral * std::pow(r, 2.0 * ff.p + 3.0) *
                              std::exp(-2.0 * ff.decay_a * std::pow(r, ff.decay_m)) * du;
        omega[j] = r;
        coupling[j] = std::sqrt(weight);
    }
    return DiscreteBath(std::move(omega), std::move(coupling), beta);
}

double DiscreteBath::gamma(double t) const {
    double sum = 0.0;
    for (std::size_t j = 0; j < omega_.size(); ++j) {
        const double w = omega_[j];
        const double sn = std::sin(0.5 * w * t);
        sum += coupling_[j] * coupling_[j] * coth(0.5 * beta_ * w) * sn * sn / (w * w);
    }
    return sum;
}

double DiscreteBath::s(double t) const {
    double sum = 0.0;
    for (std::size_t j = 0; j < omega_.size(); ++j) {
        const double w = omega_[j];
        sum += coupling_[j] * coupling_[j] * (w * t - std::sin(w * t)) / (w * w);
    }
    return 0.5 * sum;
}

DensityMatrix discrete_dephasing(const DiscreteBath& bath, const SystemSpec& spec, double lambda,
                                 const DensityMatrix& rho0, double t) {
    if (t == 0.0) return rho0;
    return DensityMatrix::create(
        apply_dephasing(spec.g_levels(), lambda, bath.gamma(t), bath.s(t), rho0.matrix()));
}

int TruncatedSystem::bath_dim() const {
    int d = 1;
    for (int j = 0; j < modes(); ++j) d *= fock_cutoff + 1;
    return d;
}

TruncatedSystem TruncatedSystem::build(const SystemSpec& spec, double sigma, double lambda,
                                       const DiscreteBath& modes, int fock_cutoff) {
    if (fock_cutoff < 1) throw Error(ErrorCode::InvalidInput, "fock_cutoff must be >= 1");
    if (modes.size() > kMaxModes) {
        std::ostringstream os;
        os << modes.size() << " modes exceed the cap of " << kMaxModes;
        throw Error(ErrorCode::DimensionCapExceeded, os.str());
    }
    TruncatedSystem ts;
    ts.n_levels = spec.dim();
    ts.fock_cutoff = fock_cutoff;
    ts.omega = modes.omega();
    ts.coupling = modes.coupling();
    double dim = ts.n_levels;
    for (int j = 0; j < ts.modes(); ++j) dim *= fock_cutoff + 1;
    if (dim > kMaxDimension) {
        std::ostringstream os;
        os << "dimension " << dim << " exceeds the cap of " << kMaxDimension;
        throw Error(ErrorCode::DimensionCapExceeded, os.str());
    }

    const int m = ts.modes();
    const int bd = ts.bath_dim();
    const CMatrix a = annihilation(fock_cutoff);
    const CMatrix x = a + a.adjoint();
    const CMatrix num = number_operator(fock_cutoff);
    CMatrix free_bath = CMatrix::Zero(bd, bd);
    CMatrix field = CMatrix::Zero(bd, bd);
    for (int j = 0; j < m; ++j) {
        free_bath += ts.omega[j] * embed(num, j, m);
        field += (ts.coupling[j] / std::sqrt(2.0)) * embed(x, j, m);
    }
    const CMatrix g = spec.g_levels().cast<cplx>().asDiagonal();
    const int n = ts.n_levels;
    ts.hamiltonian = sigma * kron(spec.hs(), CMatrix::Identity(bd, bd)) +
                     kron(CMatrix::Identity(n, n), free_bath) + lambda * kron(g, field);
    return ts;
}

RVector truncated_gibbs_populations(double omega, double beta, int fock_cutoff) {
    RVector p(fock_cutoff + 1);
    for (int k = 0; k <= fock_cutoff; ++k) p(k) = std::exp(-beta * omega * k);
    return p / p.sum();
}

TruncatedEvolution::TruncatedEvolution(const TruncatedSystem& ts, const CMatrix& rho0_system,
                                       double beta)
    : ts_(&ts), sys_dim_(ts.n_levels), bath_dim_(ts.bath_dim()) {
    if (rho0_system.rows() != sys_dim_ || rho0_system.cols() != sys_dim_)
        throw Error(ErrorCode::InvalidInput, "initial system state has the wrong dimension");
    RVector bath_pop = RVector::Ones(1);
    gibbs_tail_ = 0.0;
    for (int j = 0; j < ts.modes(); ++j) {
        const RVector p = truncated_gibbs_populations(ts.omega[j], beta, ts.fock_cutoff);
        RVector next(bath_pop.size() * p.size());
        for (Eigen::Index u = 0; u < bath_pop.size(); ++u)
            next.segment(u * p.size(), p.size()) = bath_pop(u) * p;
        bath_pop = next;
        gibbs_tail_ += std::exp(-beta * ts.omega[j] * (ts.fock_cutoff + 1));
    }
    const CMatrix rho_bath = bath_pop.cast<cplx>().asDiagonal();
    const CMatrix rho_full = kron(rho0_system, rho_bath);

    Eigen::SelfAdjointEigenSolver<CMatrix> es(ts.hamiltonian);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "Hermitian eigensolver failed");
    energies_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
    rho_eigen_ = vectors_.adjoint() * rho_full * vectors_;
    energy0_ = (rho_full * ts.hamiltonian).trace().real();
}

CMatrix TruncatedEvolution::reduced(double t, EvolutionDiagnostics* diag) const {
    const auto dim = energies_.size();
    CVector phase(dim);
    for (Eigen::Index k = 0; k < dim; ++k) phase(k) = std::exp(-I * energies_(k) * t);
    const CMatrix evolved = phase.asDiagonal() * rho_eigen_ * phase.conjugate().asDiagonal();
    const CMatrix full = vectors_ * evolved * vectors_.adjoint();

    CMatrix out = CMatrix::Zero(sys_dim_, sys_dim_);
    for (int a = 0; a < sys_dim_; ++a)
        for (int b = 0; b < sys_dim_; ++b)
            for (int u = 0; u < bath_dim_; ++u) out(a, b) += full(a * bath_dim_ + u, b * bath_dim_ + u);

    if (diag != nullptr) {
        diag->trace_error = std::abs(full.trace() - cplx(1.0));
        diag->hermiticity_error = hermiticity_error(full);
        diag->energy_drift = std::abs((full * ts_->hamiltonian).trace().real() - energy0_);
        // Population on the two highest Fock levels of any mode.
        const int levels = ts_->fock_cutoff + 1;
        double edge = 0.0;
        for (int a = 0; a < sys_dim_; ++a)
            for (int u = 0; u < bath_dim_; ++u) {
                int rest = u;
                bool at_edge = false;
                for (int j = 0; j < ts_->modes(); ++j) {
                    at_edge = at_edge || rest % levels >= levels - 2;
                    rest /= levels;
                }
                if (at_edge) edge += full(a * bath_dim_ + u, a * bath_dim_ + u).real();
            }
        diag->truncation_estimate =
            edge + gibbs_tail_ + 10.0 * DBL_EPSILON * static_cast<double>(dim);
    }
    return out;
}

CMatrix truncated_evolve(const TruncatedSystem& ts, const CMatrix& rho0_system, double beta,
                         double t) {
    return TruncatedEvolution(ts, rho0_system, beta).reduced(t);
}

SpectrumCheck eigen_crosscheck(const CMatrix& m) {
    if (m.rows() != m.cols() || m.rows() < 1)
        throw Error(ErrorCode::InvalidInput, "eigen_crosscheck needs a square matrix");
    if (m.rows() > 256) throw Error(ErrorCode::InvalidInput, "eigen_crosscheck is limited to n <= 256");
    SpectrumCheck out;
    Eigen::ComplexEigenSolver<CMatrix> es(m, false);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "complex eigensolver failed");
    out.primary = es.eigenvalues();
    out.lapack = lapack_eigenvalues(m);
    out.max_deviation = spectral_distance(out.primary, out.lapack);
    if (m.rows() <= 8) {
        out.det_roots = determinant_roots(m);
        out.max_deviation = std::max(out.max_deviation, spectral_distance(out.primary, *out.det_roots));
    }
    out.tolerance = 1e-10 * std::max(1.0, out.primary.cwiseAbs().maxCoeff());
    out.agree = out.max_deviation <= out.tolerance;
    return out;
}

bool ValidationReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

}  // namespace resodyn::oracle
