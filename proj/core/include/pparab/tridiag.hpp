#ifndef PPARAB_TRIDIAG_HPP
#define PPARAB_TRIDIAG_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace pparab {

/// Tridiagonal matrix in banded storage. lower[i] is the entry left of the
/// diagonal in row i (lower[0] unused), upper[i] right of it (upper[n-1]
/// unused).
struct Tridiagonal {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
    std::size_t size() const { return diag.size(); }
};

/// Thomas algorithm, in place on a scratch copy of the bands. Returns false
/// on a vanishing pivot (matrix numerically singular); rhs then holds
/// unspecified values.
inline bool solve_tridiagonal(const Tridiagonal& m, std::vector<double>& rhs,
                              std::vector<double>& scratch_c) {
    const std::size_t n = m.size();
    if (rhs.size() != n)
        return false;
    if (n == 0)
        return true;
    scratch_c.assign(n, 0.0);
    double piv = m.diag[0];
    if (piv == 0.0 || !std::isfinite(piv))
        return false;
    scratch_c[0] = m.upper[0] / piv;
    rhs[0] /= piv;
    for (std::size_t i = 1; i < n; ++i) {
        piv = m.diag[i] - m.lower[i] * scratch_c[i - 1];
        if (piv == 0.0 || !std::isfinite(piv))
            return false;
        scratch_c[i] = m.upper[i] / piv;
        rhs[i] = (rhs[i] - m.lower[i] * rhs[i - 1]) / piv;
    }
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] -= scratch_c[i] * rhs[i + 1];
    return true;
}

} // namespace pparab

#endif
