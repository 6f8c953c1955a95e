#pragma once

#include <span>

#include "overq/constants.hpp"
#include "overq/model.hpp"

namespace overq {

// Explicit JSQ bounds, n >= 2 (the n == 1 caller should be on the SSQ path).
// Same reporting conventions as the SSQ module.

// State-space collapse: E[||q_perp||^p]^{1/p} <= max{E1 p^2, E2 p} (<= E p^2).
// Upper-only; no matching lower bound is known.
BoundReport ssc_bound(const QueueParams& params, double p);
BoundReport ssc_bound(const QueueParams& params, const ConstantTable& t, double p);

struct ZeroMassBounds {
  BoundReport sum_zero;  // bracket on sum_i P(q_i = 0) (upper only)
  BoundReport all_zero;  // bracket on P(sum_i q_i = 0)
};
ZeroMassBounds zero_mass_bounds(const QueueParams& params);
ZeroMassBounds zero_mass_bounds(const QueueParams& params, const ConstantTable& t);

// Bracket on || sum_i q_i - (lambda-mu)/gamma ||_{L^p}.
BoundReport qsum_moment_bounds(const QueueParams& params, double p);
BoundReport qsum_moment_bounds(const QueueParams& params, const ConstantTable& t, double p);

// Piecewise Wasserstein-p bracket for the summed queue vs N(0,1).
BoundReport wp_jsq_bounds(const QueueParams& params, double p);
BoundReport wp_jsq_bounds(const QueueParams& params, const ConstantTable& t, double p);

// Four-case tail bounds on P(<q~, phi> > a) for unit phi. Cases (a)-(c) for
// <phi,1> != 0, the sub-Weibull case (d) for the orthogonal direction, plus
// the nonnegative-direction large-deviation refinement when it applies.
// Lower bounds beyond case (b) are an open problem; those reports carry
// aux["lower_open"] = 1 with lower = 0.
BoundReport jsq_tail_bounds(const QueueParams& params, std::span<const double> phi, double a);
BoundReport jsq_tail_bounds(const QueueParams& params, const ConstantTable& t,
                            std::span<const double> phi, double a);

// delta entry point: a = gamma^{-delta}.
BoundReport jsq_tail_bounds_delta(const QueueParams& params, std::span<const double> phi,
                                  double delta);

}  // namespace overq
