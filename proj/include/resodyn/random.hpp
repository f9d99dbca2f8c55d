#pragma once

#include <random>

#include "resodyn/linalg.hpp"
#include "resodyn/model.hpp"

namespace resodyn {

/// Hermitian matrix with independent standard normal real/imaginary parts.
CMatrix random_hermitian(std::mt19937_64& rng, int n);

/// General complex matrix, standard normal entries.
CMatrix random_complex(std::mt19937_64& rng, int n);

/// Random system: Hermitian H_S and g levels drawn uniformly from [−1, 1],
/// resampled until every pair of levels is separated by at least min_gap.
SystemSpec random_system(std::mt19937_64& rng, int n, double min_gap = 0.1);

/// ρ = X X† / Tr(X X†) for a complex Gaussian X.
DensityMatrix random_density(std::mt19937_64& rng, int n);

}  // namespace resodyn
