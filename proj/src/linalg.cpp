#include "resodyn/linalg.hpp"

#include <limits>

#include "resodyn/error.hpp"

namespace resodyn {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::DivergentIntegral: return "DivergentIntegral";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::DivisionByZero: return "DivisionByZero";
        case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorCode::DegenerateAtRequestedPoint: return "DegenerateAtRequestedPoint";
        case ErrorCode::ExceptionalPoint: return "ExceptionalPoint";
        case ErrorCode::SigmaNotZero: return "SigmaNotZero";
        case ErrorCode::DimensionCapExceeded: return "DimensionCapExceeded";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::ComputeError: return "ComputeError";
    }
    return "Unknown";
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

double hermiticity_error(const CMatrix& m) {
    return m.size() == 0 ? 0.0 : (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double trace_norm(const CMatrix& m) {
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues().sum();
}

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

std::vector<int> greedy_match(const CVector& a, const CVector& b) {
    const auto n = static_cast<int>(a.size());
    if (b.size() != a.size()) throw Error(ErrorCode::InvalidInput, "greedy_match: size mismatch");
    std::vector<int> perm(n, -1);
    std::vector<bool> used(n, false);
    for (int step = 0; step < n; ++step) {
        double best = std::numeric_limits<double>::infinity();
        int bi = -1, bj = -1;
        for (int i = 0; i < n; ++i) {
            if (perm[i] >= 0) continue;
            for (int j = 0; j < n; ++j) {
                if (used[j]) continue;
                const double d = std::abs(a(i) - b(j));
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        perm[bi] = bj;
        used[bj] = true;
    }
    return perm;
}

double spectral_distance(const CVector& a, const CVector& b) {
    const auto perm = greedy_match(a, b);
    double worst = 0.0;
    for (int i = 0; i < static_cast<int>(perm.size()); ++i)
        worst = std::max(worst, std::abs(a(i) - b(perm[i])));
    return worst;
}

}  // namespace resodyn
