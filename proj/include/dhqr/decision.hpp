#pragma once

#include "dhqr/evaluation.hpp"
#include "dhqr/scoring.hpp"

namespace dhqr {

// Invest iff the predicted price exceeds theta; losses capped at b, profits
// at a, with deduction rate r_L and profit tax rate r_G.
struct DecisionPolicy {
  double theta;
  double a;
  double b;
  double r_L;
  double r_G;

  DecisionPolicy(double theta_, double a_, double b_, double rL, double rG);
  double implied_tau() const;
};

// tau = (1 - r_G) / (2 - r_L - r_G), strictly inside (0,1).
double tau_from_rates(double r_L, double r_G);

// Monetary payoff of the decision rule: 0 on refrain, capped taxed gain or
// capped deducted loss on invest.
double payoff(double x, double y, const DecisionPolicy& pol);

// Opportunity loss; zero whenever the decision matches the outcome side.
double regret(double x, double y, const DecisionPolicy& pol);

struct PortfolioResult {
  double total_payoff = 0.0;
  double total_regret = 0.0;
  std::size_t invested = 0;
  std::size_t refrained = 0;
};

PortfolioResult simulate_portfolio(const PredictionSet& ps,
                                   const DecisionPolicy& pol);

}  // namespace dhqr
