#include "rpcsde/linalg.hpp"

#include <cmath>
#include <string>

#include "rpcsde/errors.hpp"

namespace rpcsde {

std::vector<double> cholesky_lower(const std::vector<double>& a, std::size_t n, double pivot_floor) {
    std::vector<double> g(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double pivot = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) pivot -= g[j * n + k] * g[j * n + k];
        if (!(pivot >= pivot_floor))
            throw singular_hankel_error(j, pivot,
                                        "Cholesky pivot " + std::to_string(pivot) + " at index " +
                                            std::to_string(j) + " below floor " +
                                            std::to_string(pivot_floor));
        const double diag = std::sqrt(pivot);
        g[j * n + j] = diag;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= g[i * n + k] * g[j * n + k];
            g[i * n + j] = s / diag;
        }
    }
    return g;
}

std::vector<double> invert_lower_triangular(const std::vector<double>& g, std::size_t n) {
    std::vector<double> inv(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        inv[j * n + j] = 1.0 / g[j * n + j];
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = 0.0;
            for (std::size_t k = j; k < i; ++k) s += g[i * n + k] * inv[k * n + j];
            inv[i * n + j] = -s / g[i * n + i];
        }
    }
    return inv;
}

std::pair<double, double> symmetric_eigen_bounds(std::vector<double> a, std::size_t n) {
    if (n == 0) return {0.0, 0.0};
    const auto eig = symmetric_eigenvalues(std::move(a), n);
    double lo = eig[0], hi = eig[0];
    for (double v : eig) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t n) {
    if (n == 0) return {};
    // Cyclic Jacobi sweeps; plenty for the matrix sizes here.
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off < 1e-26) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t k = 0; k < n; ++k) eig[k] = a[k * n + k];
    return eig;
}

}  // namespace rpcsde
