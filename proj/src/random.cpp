#include "resodyn/random.hpp"

#include <algorithm>
#include <cmath>

namespace resodyn {

CMatrix random_complex(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> normal;
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = cplx(normal(rng), normal(rng));
    return m;
}

CMatrix random_hermitian(std::mt19937_64& rng, int n) {
    const CMatrix m = random_complex(rng, n);
    return 0.5 * (m + m.adjoint());
}

SystemSpec random_system(std::mt19937_64& rng, int n, double min_gap) {
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    RVector g(n);
    for (;;) {
        for (int a = 0; a < n; ++a) g(a) = uniform(rng);
        bool ok = true;
        for (int a = 0; a < n && ok; ++a)
            for (int b = a + 1; b < n && ok; ++b) ok = std::abs(g(a) - g(b)) >= min_gap;
        if (ok) break;
    }
    CMatrix hs = random_hermitian(rng, n);
    hs = 0.5 * (hs + hs.adjoint()).eval();
    return SystemSpec::create(hs, g);
}

DensityMatrix random_density(std::mt19937_64& rng, int n) {
    const CMatrix x = random_complex(rng, n);
    CMatrix rho = x * x.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix::create(rho);
}

}  // namespace resodyn
