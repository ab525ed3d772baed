#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace dhqr {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Level tau and caps (a, b) of a Huber quantile scoring function.
// Caps are positive and may be infinite; a=b=inf gives the expectile score.
struct ScoreParams {
  double tau;
  double a;
  double b;

  ScoreParams(double tau_, double a_, double b_) : tau(tau_), a(a_), b(b_) {
    if (!(tau > 0.0 && tau < 1.0))
      throw std::invalid_argument("ScoreParams: tau must be in (0,1)");
    if (!(a > 0.0) || !(b > 0.0))
      throw std::invalid_argument("ScoreParams: caps must be positive");
    if (std::isnan(a) || std::isnan(b))
      throw std::invalid_argument("ScoreParams: caps must not be NaN");
  }
};

// A convex function together with one of its subgradients.
struct ConvexSpec {
  std::function<double(double)> phi;
  std::function<double(double)> phi_prime;
};

// Clamp t to [-a, b]. Total; infinite caps leave the corresponding side open.
inline double cap(double t, double a, double b) {
  return std::max(std::min(t, b), -a);
}

// Clamp t to [0, c]; the positive part when c is infinite.
inline double cap_pos(double t, double c) { return cap(t, 0.0, c); }

double huber_quantile_score(double x, double y, const ScoreParams& p);
double quantile_score(double x, double y, double tau);
double expectile_score(double x, double y, double tau);
double huber_loss(double x, double y, double a);

// General consistent score for the Huber quantile, parameterized by a
// convex phi; phi(t)=t^2 recovers huber_quantile_score.
double generic_score(double x, double y, const ScoreParams& p,
                     const ConvexSpec& c);

// Generalized piecewise linear score of order tau; g nondecreasing.
double generic_quantile_score(double x, double y, double tau,
                              const std::function<double(double)>& g);

// Subgradient of huber_quantile_score in the prediction x.
// Zero at the kink x = y.
double score_subgradient(double x, double y, const ScoreParams& p);

enum class ElementaryKind { huber, quantile, expectile };

// Elementary (mixture-component) score at threshold theta. Nonzero only
// when theta lies in the half-open interval between x and y.
double elementary_score(ElementaryKind kind, double x, double y, double theta,
                        const ScoreParams& p);

}  // namespace dhqr
