#include "dhqr/decision.hpp"

#include <cmath>
#include <stdexcept>

namespace dhqr {

DecisionPolicy::DecisionPolicy(double theta_, double a_, double b_, double rL,
                               double rG)
    : theta(theta_), a(a_), b(b_), r_L(rL), r_G(rG) {
  if (!std::isfinite(theta))
    throw std::invalid_argument("DecisionPolicy: theta must be finite");
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("DecisionPolicy: caps must be positive");
  if (!(r_L >= 0.0 && r_L < 1.0) || !(r_G >= 0.0 && r_G < 1.0))
    throw std::invalid_argument("DecisionPolicy: rates must be in [0,1)");
}

double DecisionPolicy::implied_tau() const { return tau_from_rates(r_L, r_G); }

double tau_from_rates(double r_L, double r_G) {
  if (!(r_L >= 0.0 && r_L < 1.0) || !(r_G >= 0.0 && r_G < 1.0))
    throw std::invalid_argument("tau_from_rates: rates must be in [0,1)");
  return (1.0 - r_G) / (2.0 - r_L - r_G);
}

double payoff(double x, double y, const DecisionPolicy& pol) {
  if (x <= pol.theta) return 0.0;
  if (y <= pol.theta) return -(1.0 - pol.r_L) * cap_pos(pol.theta - y, pol.b);
  return (1.0 - pol.r_G) * cap_pos(y - pol.theta, pol.a);
}

double regret(double x, double y, const DecisionPolicy& pol) {
  if (x > pol.theta && y <= pol.theta)
    return (1.0 - pol.r_L) * cap_pos(pol.theta - y, pol.b);
  if (x <= pol.theta && y > pol.theta)
    return (1.0 - pol.r_G) * cap_pos(y - pol.theta, pol.a);
  return 0.0;
}

PortfolioResult simulate_portfolio(const PredictionSet& ps,
                                   const DecisionPolicy& pol) {
  PortfolioResult r;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double x = ps.predictions[i], y = ps.observations[i];
    if (x > pol.theta)
      ++r.invested;
    else
      ++r.refrained;
    r.total_payoff += payoff(x, y, pol);
    r.total_regret += regret(x, y, pol);
  }
  return r;
}

}  // namespace dhqr
