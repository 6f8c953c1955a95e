#pragma once

#include <optional>
#include <span>
#include <vector>

#include "overq/constants.hpp"
#include "overq/jsq_engine.hpp"
#include "overq/model.hpp"
#include "overq/ssq_exact.hpp"

namespace overq {

// Weights of the generator-comparison series
//   W_p <= g_0 + g_1 ||a_1 + T(X)||_p + g_2 ||a_2 - 1||_p + sum_{k>=3} g_k ||a_k||_p.
// g_0 and g_2 have closed forms; g_k for k >= 3 is quadrature of
//   e^{t0} int_{t0}^inf e^{-kt} ||h_{k-1}||_p (1-e^{-2t})^{-(k-1)/2} dt
// with the Hermite-norm bound substituted (which only loosens the upper
// bound). tail_bound majorizes sum_{k>kmax} g_k eta^k / k! at the canonical
// envelope scale eta = sqrt((1-e^{-2 t0})/p); certificate_bound() rescales it
// to the model's actual coefficient envelope.
struct GCoefficients {
  double t0 = 0.0;
  double p = 2.0;
  std::vector<double> g;  // g[0..kmax]
  double tail_bound = 0.0;
};

GCoefficients g_coefficients(double t0, double p, int kmax);

enum class KmModel { kSsq, kJsqSum };

// Kramers-Moyal coefficient a_k of the scaled, transformed generator at a
// state: affine in the state, with the boundary indicator at zero.
double km_coefficient(const QueueParams& params, KmModel model, int k,
                      std::span<const std::int64_t> state);

// Assembled certificate: upper bound on W_p(law of q~, N(0,1)) from exact
// L^p norms of the coefficient deviations under the supplied stationary law,
// plus a certified truncation remainder for k > kmax. Default
// t0 = -log(1 - p gamma / lambda)/2 requires p gamma < lambda; beyond that
// the caller must supply t0 (std::nullopt otherwise throws).
BoundReport certificate_bound(const QueueParams& params, double p, std::optional<double> t0,
                              int kmax, const LatticePmf& pmf);

// Same certificate for the summed JSQ queue (q~_Sigma) under a joint law.
BoundReport certificate_bound_jsq(const QueueParams& params, double p, std::optional<double> t0,
                                  int kmax, const JointPmf& pmf);

}  // namespace overq
