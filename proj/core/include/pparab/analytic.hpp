#ifndef PPARAB_ANALYTIC_HPP
#define PPARAB_ANALYTIC_HPP

#include <optional>
#include <span>
#include <vector>

#include "pparab/params.hpp"

/// Closed-form layer: Barenblatt source solutions, separable supersolutions,
/// intrinsic-scaling transforms and every critical-time constant used by the
/// waiting-time experiments. All functions are pure; preconditions are
/// enforced with std::invalid_argument.
namespace pparab::analytic {

/// Constants of the Barenblatt solution
///   U(x,t) = t^{-k} ( C0 - q (|x| / t^{k/n})^{p/(p-1)} )_+^{(p-1)/(p-2)}.
struct BarenblattConstants {
    double k;  ///< 1 / (p - 2 + p/n)
    double q;  ///< ((p-2)/p) (k/n)^{1/(p-1)}
    double C0; ///< free mass constant, defaults to q
};

BarenblattConstants barenblatt_constants(const PParams& params,
                                         std::optional<double> C0 = std::nullopt);

/// Pointwise Barenblatt value at time t > 0; zero outside the support ball.
double barenblatt_value(double x, double t, const BarenblattConstants& bc,
                        const PParams& params);

/// Radius of the support ball at time t: (C0/q)^{(p-1)/p} t^{k/n}.
double barenblatt_support_radius(double t, const BarenblattConstants& bc,
                                 const PParams& params);

/// Constants of the separable supersolution
///   v(x,t) = c_p c_o (T - t)^{-1/(p-2)} |x|^delta,  |x| <= 2,
/// with c_p solving f' = f^{p-1} and c_o making |x|^delta satisfy
/// Delta_p g <= g on the ball of radius 2.
struct SeparableConstants {
    double p; ///< exponent the constants were built for
    double delta;
    double c_p; ///< (p-2)^{-1/(p-2)}
    double c_o; ///< [delta^{p-1}((p-1)(delta-1)+(n-1))]^{1/(2-p)} 2^{p/(p-2)-delta}
    double C;   ///< c_p * c_o
};

SeparableConstants separable_constants(const PParams& params, double delta);

/// v(x,t) above with a general blow-up horizon T. Requires t < T.
double separable_supersolution_value(double x, double t, const SeparableConstants& sc,
                                     double T);

/// Memory horizon hat_T = [C(p,delta)/M]^{p-2} r^p of the local memory effect.
double memory_horizon(const PParams& params, double delta, double M, double r);

/// Critical waiting time hat_t = (p-2)^{p-1} / (2 p^{p-1} (p-1)) = q^{p-1}
/// for n = 1. Evaluates both closed forms and throws std::logic_error if they
/// disagree beyond 1e-12 relative.
double critical_time_1d(const PParams& params);

/// The delta-indexed barrier family of the upper-bound construction: the
/// rescaled Barenblatt hat_U tangent from below to (1-r)^{p/(p-2)}.
struct TangencyParameters {
    double delta;
    double epsilon; ///< (1 - (1-delta)^p)^{1/(p-2)}
    double r_touch; ///< (1-delta)^p, the tangency radius
    double t1;      ///< (1-delta)^{n/k}, time when the support is B_{1-delta}
    double t2;      ///< lambda^{p-2} (1 - t1), arrival time of the support at radius 1
    double lambda;  ///< U(0,t1)/epsilon, the amplitude rescaling
};

TangencyParameters tangency_parameters(const PParams& params, double delta);

/// Limit t2(0) = (p-2)^{p-1} / p^p; checks t2(0)/hat_t = 2(p-1)/p when n = 1.
double barrier_upper_time_limit(const PParams& params);

/// Similarity iteration data for the conical-domain argument.
struct ConeScaling {
    double q_exp; ///< homogeneity exponent of the initial datum |x|^q f(x/|x|)
    double a;     ///< contraction factor in (0,1)
    double tau;   ///< reference waiting time of the first iterate
};

/// Times t_k = tau * sum_{j=0..k} (1/a)^{(q(p-2)-p) j} of the support iteration.
std::vector<double> cone_time_sequence(const ConeScaling& cs, const PParams& params,
                                       int k_max);

struct ConeDivergence {
    bool diverges;      ///< t_k -> infinity
    bool boundary_case; ///< q(p-2) = p: linear (not geometric) divergence
};

/// Divergence predicate for the sequence above: diverges iff q(p-2) >= p.
ConeDivergence cone_sequence_diverges(const ConeScaling& cs, const PParams& params);

/// Result of resampling T_lambda u (x) = lambda^q u(x/lambda) on the source
/// grid. Nodes whose preimage x/lambda falls outside the sampled domain are
/// flagged instead of extrapolated. mu is the time-map factor t -> mu t.
struct SimilarityTransformResult {
    std::vector<double> values;
    std::vector<bool> in_domain;
    double mu; ///< lambda^{q(p-2)-p}
};

SimilarityTransformResult similarity_transform(std::span<const double> x,
                                               std::span<const double> u,
                                               double lambda, double q_exp,
                                               const PParams& params);

} // namespace pparab::analytic

#endif
