#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace resodyn {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr cplx I{0.0, 1.0};

CMatrix kron(const CMatrix& a, const CMatrix& b);

/// max |m − m†|
double hermiticity_error(const CMatrix& m);

/// Sum of singular values.
double trace_norm(const CMatrix& m);

/// Entrywise max modulus; 0 for empty matrices.
double max_abs(const CMatrix& m);

/// Pairs each entry of `a` with a distinct entry of `b` by repeatedly taking
/// the globally closest remaining pair. Returns perm with a[i] ~ b[perm[i]].
std::vector<int> greedy_match(const CVector& a, const CVector& b);

/// max_i |a[i] − b[perm[i]]| for the greedy matching.
double spectral_distance(const CVector& a, const CVector& b);

}  // namespace resodyn
