#include "resodyn/resonances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "resodyn/error.hpp"

namespace resodyn {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kContinuationSteps = 64;
constexpr double kContinuationStart = 1e-6;  // first step at σ·1e-6
constexpr double kCollisionTol = 1e-12;

std::vector<PairLabel> product_labels(int n) {
    std::vector<PairLabel> labels;
    labels.reserve(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) labels.push_back({a, b});
    return labels;
}

CVector eigenvalues_of(const CMatrix& m) {
    Eigen::ComplexEigenSolver<CMatrix> es(m, false);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "complex eigensolver failed");
    return es.eigenvalues();
}

}  // namespace

CMatrix liouvillian_ls(const SystemSpec& spec) {
    const int n = spec.dim();
    const CMatrix id = CMatrix::Identity(n, n);
    return kron(spec.hs(), id) - kron(id, spec.hs().conjugate());
}

CMatrix quadratic_term(const SystemSpec& spec, const BathFunctions& bf, double lambda) {
    const int n = spec.dim();
    const CMatrix id = CMatrix::Identity(n, n);
    const CMatrix g = spec.g_levels().cast<cplx>().asDiagonal();
    const CMatrix g2 = g * g;
    const cplx alpha(0.5 * bf.inner_1_over_k(), -0.5 * kPi * bf.xi0());
    const cplx alpha_bar = std::conj(alpha);
    const CMatrix gg = kron(g, g);
    return -(lambda * lambda) *
           (alpha * kron(g2, id) - alpha * gg + alpha_bar * gg - alpha_bar * kron(id, g2));
}

EffectiveOperator effective_operator(const SystemSpec& spec, const BathFunctions& bf,
                                     const CouplingParams& cp) {
    EffectiveOperator op;
    op.n = spec.dim();
    op.sigma = cp.sigma();
    op.lambda = cp.lambda();
    op.liouvillian = liouvillian_ls(spec);
    op.quadratic = quadratic_term(spec, bf, cp.lambda());
    op.matrix = cp.sigma() * op.liouvillian + op.quadratic;
    op.basis_labels = product_labels(op.n);
    return op;
}

double ResonanceSpectrum::biorthogonality_error() const {
    const auto m = right.cols();
    return (left.adjoint() * right - CMatrix::Identity(m, m)).cwiseAbs().maxCoeff();
}

ResonanceSpectrum resonances_numeric(const EffectiveOperator& op) {
    const int n = op.n;
    const int n2 = n * n;
    ResonanceSpectrum out;
    out.n = n;
    out.labels = product_labels(n);

    const CVector parents = op.quadratic.diagonal();
    const double parent_scale = std::max(parents.cwiseAbs().maxCoeff(), 1e-300);
    for (int i = 0; i < n2; ++i)
        for (int j = i + 1; j < n2; ++j) {
            if (out.labels[i].diagonal() && out.labels[j].diagonal()) continue;
            if (std::abs(parents(i) - parents(j)) <= kCollisionTol * parent_scale)
                out.ambiguous.emplace_back(out.labels[i], out.labels[j]);
        }

    if (op.sigma == 0.0) {
        out.eigenvalues = parents;
        out.right = CMatrix::Identity(n2, n2);
        out.left = CMatrix::Identity(n2, n2);
        return out;
    }

    Eigen::ComplexEigenSolver<CMatrix> es(op.matrix, true);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "complex eigensolver failed");
    const CVector& final_values = es.eigenvalues();
    const double scale = std::max(final_values.cwiseAbs().maxCoeff(), 1e-300);
    // At an exceptional point the computed eigenvalues split by ~√ε_mach but
    // the eigenvectors stay parallel to working precision; test both.
    const CMatrix& vecs = es.eigenvectors();
    const auto parallel = [&](int i, int j) {
        const double c = std::abs(vecs.col(i).dot(vecs.col(j))) / (vecs.col(i).norm() * vecs.col(j).norm());
        return 1.0 - c <= kCollisionTol;
    };
    for (int i = 0; i < n2; ++i)
        for (int j = i + 1; j < n2; ++j)
            if (std::abs(final_values(i) - final_values(j)) <= kCollisionTol * scale || parallel(i, j)) {
                std::ostringstream os;
                os << "eigenvalues " << final_values(i) << " and " << final_values(j)
                   << " coincide at sigma = " << op.sigma << "; labeling suspended";
                throw Error(ErrorCode::DegenerateAtRequestedPoint, os.str());
            }

    // Continuation in s from s₀ = σ·1e-6 up to σ on a geometric ladder.
    // tracked(i) follows the eigenvalue whose σ = 0 parent is label i.
    const double ratio = std::pow(1.0 / kContinuationStart, 1.0 / (kContinuationSteps - 1));
    CVector tracked(n2), previous(n2);
    double s_prev = 0.0, s_curr = 0.0;
    std::vector<int> perm;
    for (int k = 0; k < kContinuationSteps; ++k) {
        const bool last = k == kContinuationSteps - 1;
        const double s = last ? op.sigma : op.sigma * kContinuationStart * std::pow(ratio, k);
        CVector predicted(n2);
        if (k == 0) {
            for (int i = 0; i < n2; ++i) predicted(i) = parents(i) + s * op.liouvillian(i, i);
        } else if (k == 1) {
            predicted = tracked;
        } else {
            predicted = tracked + (tracked - previous) * ((s - s_curr) / (s_curr - s_prev));
        }
        const CVector values = last ? final_values : eigenvalues_of(s * op.liouvillian + op.quadratic);
        perm = greedy_match(predicted, values);
        previous = tracked;
        for (int i = 0; i < n2; ++i) tracked(i) = values(perm[i]);
        s_prev = s_curr;
        s_curr = s;
    }

    // Inside the diagonal sector the labels (c, c) follow ascending Im ε.
    std::vector<int> diag_slots(n), diag_order(n);
    for (int c = 0; c < n; ++c) diag_slots[c] = pair_index(n, c, c);
    std::iota(diag_order.begin(), diag_order.end(), 0);
    std::stable_sort(diag_order.begin(), diag_order.end(), [&](int x, int y) {
        const cplx ex = tracked(diag_slots[x]), ey = tracked(diag_slots[y]);
        if (ex.imag() != ey.imag()) return ex.imag() < ey.imag();
        return ex.real() < ey.real();
    });
    std::vector<int> source(n2);
    for (int i = 0; i < n2; ++i) source[i] = perm[i];
    for (int c = 0; c < n; ++c) source[diag_slots[c]] = perm[diag_slots[diag_order[c]]];

    out.eigenvalues.resize(n2);
    out.right.resize(n2, n2);
    for (int i = 0; i < n2; ++i) {
        out.eigenvalues(i) = final_values(source[i]);
        out.right.col(i) = es.eigenvectors().col(source[i]);
    }
    out.left = out.right.inverse().adjoint();
    return out;
}

TMatrix t_matrix(const SystemSpec& spec, const BathFunctions& bf) {
    const int n = spec.dim();
    const CMatrix d = delta_table(spec, bf);
    const double dscale = std::max(max_abs(d), 1e-300);
    TMatrix out;
    out.matrix = RMatrix::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            const double h2 = std::norm(spec.hs()(a, b));
            if (h2 == 0.0) continue;
            if (std::abs(d(a, b)) <= 1e-14 * dscale) {
                std::ostringstream os;
                os << "delta(" << a << "," << b << ") vanishes while [H_S](" << a << "," << b
                   << ") != 0";
                throw Error(ErrorCode::DivisionByZero, os.str());
            }
            out.matrix(a, b) = -d(a, b).imag() / std::norm(d(a, b)) * h2;
        }
    for (int a = 0; a < n; ++a) out.matrix(a, a) = -out.matrix.row(a).sum();

    Eigen::SelfAdjointEigenSolver<RMatrix> es(out.matrix);
    out.xi = es.eigenvalues();
    out.eigenvectors = es.eigenvectors();
    const double tscale = std::max(out.matrix.cwiseAbs().maxCoeff(), 1e-300);
    const double tol = 1e-12 * tscale;
    if (std::abs(out.xi(0)) <= tol) out.xi(0) = 0.0;
    for (int c = 1; c < n; ++c)
        if (std::abs(out.xi(c) - out.xi(c - 1)) <= tol) out.xi(c) = out.xi(c - 1);
    // Fix eigenvector signs: largest-magnitude component positive.
    for (int c = 0; c < n; ++c) {
        Eigen::Index idx = 0;
        out.eigenvectors.col(c).cwiseAbs().maxCoeff(&idx);
        if (out.eigenvectors(idx, c) < 0.0) out.eigenvectors.col(c) *= -1.0;
    }
    return out;
}

cplx eta_ab(const SystemSpec& spec, const CMatrix& delta, const CouplingParams& cp, int a, int b) {
    const int n = spec.dim();
    if (a == b || a < 0 || b < 0 || a >= n || b >= n)
        throw Error(ErrorCode::InvalidInput, "eta_ab needs distinct in-range labels");
    const CMatrix& h = spec.hs();
    const double lam2 = cp.lambda() * cp.lambda();
    const double sigma = cp.sigma();
    cplx value = lam2 * delta(a, b) + sigma * (h(a, a) - h(b, b)).real();
    if (sigma == 0.0) return value;

    const double tol = 1e-12 * std::max(max_abs(delta), 1e-300);
    const auto term = [&](double numerator, cplx denominator, int c) {
        if (numerator == 0.0) return cplx(0.0);
        if (std::abs(denominator) <= tol) {
            std::ostringstream os;
            os << "eta(" << a << "," << b << "): delta difference through c = " << c << " vanishes";
            throw Error(ErrorCode::DegenerateDenominator, os.str());
        }
        return numerator / denominator;
    };
    cplx sum = 0.0;
    for (int c = 0; c < n; ++c) {
        if (c != a) sum += term(std::norm(h(a, c)), delta(c, b) - delta(a, b), c);
        if (c != b) sum += term(std::norm(h(b, c)), delta(a, c) - delta(a, b), c);
    }
    return value - sigma * sigma / lam2 * sum;
}

cplx eta_ab(const SystemSpec& spec, const BathFunctions& bf, const CouplingParams& cp, int a, int b) {
    return eta_ab(spec, delta_table(spec, bf), cp, a, b);
}

cplx eps_a_approx(const TMatrix& t, const CouplingParams& cp, int a) {
    if (a < 0 || a >= t.xi.size()) throw Error(ErrorCode::InvalidInput, "eps_a_approx: label out of range");
    const double ratio = cp.sigma() * cp.sigma() / (cp.lambda() * cp.lambda());
    return cplx(0.0, 2.0 * ratio * t.xi(a));
}

}  // namespace resodyn
