#ifndef PPARAB_PARAMS_HPP
#define PPARAB_PARAMS_HPP

#include <cmath>
#include <stdexcept>

namespace pparab {

/// Parameters of the degenerate p-parabolic equation u_t = div(|Du|^{p-2} Du).
/// The degenerate regime requires p > 2; n is the spatial dimension entering
/// the radial formulas (the solver itself is 1D).
struct PParams {
    double p;
    int n = 1;

    void validate() const {
        if (!(p > 2.0))
            throw std::invalid_argument("PParams: require p > 2 (degenerate regime)");
        if (n < 1)
            throw std::invalid_argument("PParams: require n >= 1");
    }
};

/// |x|^a with the support-edge convention 0^a = 0 for a > 0 and 0^0 = 1.
inline double pow_abs(double x, double a) {
    const double b = std::fabs(x);
    if (b == 0.0 && a > 0.0)
        return 0.0;
    return std::pow(b, a); // 0^0 = 1, 0^negative = inf per IEEE pow
}

/// sign(x)*|x|^a; odd extension of the power function used for gradient terms.
inline double pow_signed(double x, double a) {
    const double v = pow_abs(x, a);
    return x < 0.0 ? -v : v;
}

} // namespace pparab

#endif
