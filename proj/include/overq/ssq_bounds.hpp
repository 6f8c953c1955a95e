#pragma once

#include "overq/constants.hpp"
#include "overq/model.hpp"

namespace overq {

// Explicit single-server bounds with all constants from the constants table.
// Reports never refuse to evaluate: values outside the certified range are
// returned with valid == false, and raw (possibly vacuous) formula values are
// preserved; [0,1] clamping is the reporting layer's business.

// Two-sided bracket on P(q = 0).
BoundReport p0_bounds(const QueueParams& params);
BoundReport p0_bounds(const QueueParams& params, const ConstantTable& t);

// Bracket on ||q - (lambda-mu)/gamma||_{L^p}:
//   upper = min{ C1 sqrt(1/gamma) sqrt(p) + C2 p,  C3 p / log(1+gamma p/lambda) }
//   lower = C4 exp(-C5/(gamma p)) p / log(1+gamma p/lambda)
BoundReport lp_norm_bounds(const QueueParams& params, double p);
BoundReport lp_norm_bounds(const QueueParams& params, const ConstantTable& t, double p);

// Envelope of the centered MGF, as log values:
//   lambda/gamma (e^theta - 1 - theta) <= log E[e^{theta qhat}] <= same + log A
BoundReport mgf_envelope(const QueueParams& params, double theta);
BoundReport mgf_envelope(const QueueParams& params, const ConstantTable& t, double theta);

// Piecewise Wasserstein-p bracket between the normalized law and N(0,1).
BoundReport wp_bounds(const QueueParams& params, double p);
BoundReport wp_bounds(const QueueParams& params, const ConstantTable& t, double p);

// Four-regime tail bracket on P(q~ > a): Gaussian bands for the constant and
// near-constant regimes, min of the Wasserstein-route and transform-route
// uppers for the moderate/large regimes, change-of-measure lower bounds
// throughout. aux records every branch plus the (Delta, theta*, p, rho)
// selector values.
BoundReport tail_bounds(const QueueParams& params, double a);
BoundReport tail_bounds(const QueueParams& params, const ConstantTable& t, double a);

// Transform-route upper tail with theta chosen by golden-section search
// instead of the closed form; returns log of the bound. Exposed so the
// auditable closed-form choice can be compared against a numeric optimum.
double transform_upper_optimized_log(const QueueParams& params, const ConstantTable& t, double a);

// Closed-form transform-route upper tail (log value).
double transform_upper_log(const QueueParams& params, const ConstantTable& t, double a);

}  // namespace overq
