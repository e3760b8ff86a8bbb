#include "pparab/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pparab::analytic {

namespace {
constexpr double kIdentityTol = 1e-12; // closed-form cross-check tolerance
}

BarenblattConstants barenblatt_constants(const PParams& params, std::optional<double> C0) {
    params.validate();
    const double p = params.p;
    const double n = static_cast<double>(params.n);
    BarenblattConstants bc;
    bc.k = 1.0 / (p - 2.0 + p / n);
    bc.q = (p - 2.0) / p * std::pow(bc.k / n, 1.0 / (p - 1.0));
    bc.C0 = C0.value_or(bc.q);
    if (!(bc.C0 > 0.0))
        throw std::invalid_argument("barenblatt_constants: require C0 > 0");
    return bc;
}

double barenblatt_value(double x, double t, const BarenblattConstants& bc,
                        const PParams& params) {
    if (!(t > 0.0))
        throw std::invalid_argument("barenblatt_value: require t > 0");
    const double p = params.p;
    const double n = static_cast<double>(params.n);
    const double xi = std::fabs(x) / std::pow(t, bc.k / n);
    const double s = bc.C0 - bc.q * pow_abs(xi, p / (p - 1.0));
    if (s <= 0.0)
        return 0.0;
    return std::pow(t, -bc.k) * std::pow(s, (p - 1.0) / (p - 2.0));
}

double barenblatt_support_radius(double t, const BarenblattConstants& bc,
                                 const PParams& params) {
    if (!(t > 0.0))
        throw std::invalid_argument("barenblatt_support_radius: require t > 0");
    const double p = params.p;
    const double n = static_cast<double>(params.n);
    return std::pow(bc.C0 / bc.q, (p - 1.0) / p) * std::pow(t, bc.k / n);
}

SeparableConstants separable_constants(const PParams& params, double delta) {
    params.validate();
    const double p = params.p;
    const double n = static_cast<double>(params.n);
    if (!(delta >= p / (p - 2.0)))
        throw std::invalid_argument(
            "separable_constants: require delta >= p/(p-2), got delta=" +
            std::to_string(delta));
    SeparableConstants sc;
    sc.p = p;
    sc.delta = delta;
    sc.c_p = std::pow(p - 2.0, -1.0 / (p - 2.0));
    const double bracket =
        std::pow(delta, p - 1.0) * ((p - 1.0) * (delta - 1.0) + (n - 1.0));
    sc.c_o = std::pow(bracket, 1.0 / (2.0 - p)) * std::pow(2.0, p / (p - 2.0) - delta);
    sc.C = sc.c_p * sc.c_o;
    return sc;
}

double separable_supersolution_value(double x, double t, const SeparableConstants& sc,
                                     double T) {
    if (!(t < T))
        throw std::invalid_argument("separable_supersolution_value: require t < T");
    return sc.C * std::pow(T - t, -1.0 / (sc.p - 2.0)) * pow_abs(x, sc.delta);
}

double memory_horizon(const PParams& params, double delta, double M, double r) {
    if (!(M > 0.0))
        throw std::invalid_argument("memory_horizon: require M > 0");
    if (!(r > 0.0))
        throw std::invalid_argument("memory_horizon: require r > 0");
    const SeparableConstants sc = separable_constants(params, delta);
    return std::pow(sc.C / M, params.p - 2.0) * std::pow(r, params.p);
}

double critical_time_1d(const PParams& params) {
    params.validate();
    if (params.n != 1)
        throw std::invalid_argument("critical_time_1d: defined for n = 1");
    const double p = params.p;
    const double direct =
        std::pow(p - 2.0, p - 1.0) / (2.0 * std::pow(p, p - 1.0) * (p - 1.0));
    const BarenblattConstants bc = barenblatt_constants(params);
    const double via_q = std::pow(bc.q, p - 1.0);
    if (std::fabs(direct - via_q) > kIdentityTol * std::fabs(direct))
        throw std::logic_error("critical_time_1d: closed forms disagree");
    return via_q;
}

TangencyParameters tangency_parameters(const PParams& params, double delta) {
    params.validate();
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("tangency_parameters: require delta in (0,1)");
    const double p = params.p;
    const double n = static_cast<double>(params.n);
    const BarenblattConstants bc = barenblatt_constants(params);
    TangencyParameters tp;
    tp.delta = delta;
    const double om = 1.0 - delta;           // 1 - delta
    const double omp = std::pow(om, p);      // (1-delta)^p
    tp.epsilon = std::pow(1.0 - omp, 1.0 / (p - 2.0));
    tp.r_touch = omp / (std::pow(tp.epsilon, p - 2.0) + omp);
    tp.t1 = std::pow(om, n / bc.k);
    tp.lambda = std::pow(om, -n) * std::pow(bc.q, (p - 1.0) / (p - 2.0)) / tp.epsilon;
    tp.t2 = std::pow(bc.q, p - 1.0) * (1.0 - tp.t1) /
            (std::pow(om, n * (p - 2.0)) * (1.0 - omp));
    return tp;
}

double barrier_upper_time_limit(const PParams& params) {
    params.validate();
    const double p = params.p;
    const double t20 = std::pow(p - 2.0, p - 1.0) / std::pow(p, p);
    if (params.n == 1) {
        const double ratio = t20 / critical_time_1d(params);
        const double expected = 2.0 * (p - 1.0) / p;
        if (std::fabs(ratio - expected) > kIdentityTol * expected)
            throw std::logic_error("barrier_upper_time_limit: ratio identity violated");
    }
    return t20;
}

std::vector<double> cone_time_sequence(const ConeScaling& cs, const PParams& params,
                                       int k_max) {
    params.validate();
    if (!(cs.a > 0.0 && cs.a < 1.0))
        throw std::invalid_argument("cone_time_sequence: require a in (0,1)");
    if (!(cs.tau > 0.0))
        throw std::invalid_argument("cone_time_sequence: require tau > 0");
    if (!(cs.q_exp > 0.0))
        throw std::invalid_argument("cone_time_sequence: require q_exp > 0");
    if (k_max < 0)
        throw std::invalid_argument("cone_time_sequence: require k_max >= 0");
    const double expo = cs.q_exp * (params.p - 2.0) - params.p;
    const double ratio = std::pow(1.0 / cs.a, expo);
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(k_max) + 1);
    double sum = 0.0;
    double term = 1.0;
    for (int j = 0; j <= k_max; ++j) {
        sum += term;
        times.push_back(cs.tau * sum);
        term *= ratio;
    }
    return times;
}

ConeDivergence cone_sequence_diverges(const ConeScaling& cs, const PParams& params) {
    params.validate();
    if (!(cs.a > 0.0 && cs.a < 1.0))
        throw std::invalid_argument("cone_sequence_diverges: require a in (0,1)");
    const double expo = cs.q_exp * (params.p - 2.0) - params.p;
    ConeDivergence d;
    d.boundary_case = expo == 0.0;
    d.diverges = expo >= 0.0;
    return d;
}

SimilarityTransformResult similarity_transform(std::span<const double> x,
                                               std::span<const double> u,
                                               double lambda, double q_exp,
                                               const PParams& params) {
    params.validate();
    if (!(lambda > 0.0))
        throw std::invalid_argument("similarity_transform: require lambda > 0");
    if (x.size() != u.size() || x.size() < 2)
        throw std::invalid_argument("similarity_transform: need matching samples, >= 2");
    SimilarityTransformResult out;
    out.mu = std::pow(lambda, q_exp * (params.p - 2.0) - params.p);
    const double amp = std::pow(lambda, q_exp);
    out.values.assign(x.size(), 0.0);
    out.in_domain.assign(x.size(), false);
    const double lo = x.front();
    const double hi = x.back();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i] / lambda;
        if (xi < lo || xi > hi)
            continue; // flagged out-of-domain, no extrapolation
        // locate the cell by binary search (grid need not be uniform)
        auto it = std::upper_bound(x.begin(), x.end(), xi);
        std::size_t j = static_cast<std::size_t>(std::distance(x.begin(), it));
        if (j == 0)
            j = 1;
        if (j >= x.size())
            j = x.size() - 1;
        const double w = (xi - x[j - 1]) / (x[j] - x[j - 1]);
        out.values[i] = amp * ((1.0 - w) * u[j - 1] + w * u[j]);
        out.in_domain[i] = true;
    }
    return out;
}

} // namespace pparab::analytic
