#include "dhqr/scoring.hpp"

namespace dhqr {

namespace {

void require_finite(double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y))
    throw std::invalid_argument("score: prediction and observation must be finite");
}

inline double asym_weight(double x, double y, double tau) {
  return std::fabs((x >= y ? 1.0 : 0.0) - tau);
}

}  // namespace

double huber_quantile_score(double x, double y, const ScoreParams& p) {
  require_finite(x, y);
  const double k = cap(x - y, p.a, p.b);
  return asym_weight(x, y, p.tau) * (y * y - (k + y) * (k + y) + 2.0 * x * k);
}

double quantile_score(double x, double y, double tau) {
  require_finite(x, y);
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("quantile_score: tau must be in (0,1)");
  return 2.0 * asym_weight(x, y, tau) * std::fabs(x - y);
}

double expectile_score(double x, double y, double tau) {
  require_finite(x, y);
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("expectile_score: tau must be in (0,1)");
  return asym_weight(x, y, tau) * (x - y) * (x - y);
}

double huber_loss(double x, double y, double a) {
  require_finite(x, y);
  if (!(a > 0.0)) throw std::invalid_argument("huber_loss: a must be positive");
  const double r = std::fabs(x - y);
  return r <= a ? 0.5 * r * r : a * r - 0.5 * a * a;
}

double generic_score(double x, double y, const ScoreParams& p,
                     const ConvexSpec& c) {
  require_finite(x, y);
  const double k = cap(x - y, p.a, p.b);
  const double v = c.phi(y) - c.phi(k + y) + k * c.phi_prime(x);
  if (!std::isfinite(v))
    throw std::invalid_argument("generic_score: phi evaluation not finite");
  return asym_weight(x, y, p.tau) * v;
}

double generic_quantile_score(double x, double y, double tau,
                              const std::function<double(double)>& g) {
  require_finite(x, y);
  const double gx = g(x), gy = g(y);
  if ((x - y) * (gx - gy) < 0.0)
    throw std::invalid_argument("generic_quantile_score: g decreases on (x,y)");
  return asym_weight(x, y, tau) * std::fabs(gx - gy);
}

double score_subgradient(double x, double y, const ScoreParams& p) {
  return 2.0 * asym_weight(x, y, p.tau) * cap(x - y, p.a, p.b);
}

double elementary_score(ElementaryKind kind, double x, double y, double theta,
                        const ScoreParams& p) {
  if (y <= theta && theta < x) {
    switch (kind) {
      case ElementaryKind::huber:
        return (1.0 - p.tau) * std::min(theta - y, p.b);
      case ElementaryKind::quantile:
        return 1.0 - p.tau;
      case ElementaryKind::expectile:
        return (1.0 - p.tau) * std::fabs(theta - y);
    }
  }
  if (x <= theta && theta < y) {
    switch (kind) {
      case ElementaryKind::huber:
        return p.tau * std::min(y - theta, p.a);
      case ElementaryKind::quantile:
        return p.tau;
      case ElementaryKind::expectile:
        return p.tau * std::fabs(theta - y);
    }
  }
  return 0.0;
}

}  // namespace dhqr
