#pragma once

#include <vector>

#include "dhqr/scoring.hpp"

namespace dhqr {

// A finite set of real observations. Immutable after construction.
class EmpiricalSample {
 public:
  explicit EmpiricalSample(std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& sorted() const { return sorted_; }
  std::size_t size() const { return values_.size(); }
  double min() const { return sorted_.front(); }
  double max() const { return sorted_.back(); }

 private:
  std::vector<double> values_;
  std::vector<double> sorted_;
};

struct LogNormalParams {
  double mu;
  double sigma;

  LogNormalParams(double mu_, double sigma_) : mu(mu_), sigma(sigma_) {
    if (!(sigma > 0.0))
      throw std::invalid_argument("LogNormalParams: sigma must be positive");
  }
};

enum class FunctionalKind { quantile, expectile, huber };

struct FunctionalRequest {
  FunctionalKind kind;
  ScoreParams params;  // caps ignored for quantile/expectile
};

// Root interval of the empirical balance equation; value is the midpoint.
struct RootResult {
  double value;
  double lower;
  double upper;
};

// Smallest sample value whose empirical CDF reaches tau (type-1, no
// interpolation).
double empirical_quantile(const EmpiricalSample& s, double tau);

// Unique root of the sample expectile balance equation, by bisection to
// absolute tolerance 1e-10.
double empirical_expectile(const EmpiricalSample& s, double tau);

// Root (interval midpoint) of
//   g(x) = (1-tau) * sum kappa_{0,b}(x - y_i) - tau * sum kappa_{0,a}(y_i - x).
// Caps of zero are accepted here; the balance equation stays well posed.
double empirical_huber_quantile(const EmpiricalSample& s, const ScoreParams& p);
RootResult empirical_huber_quantile_interval(const EmpiricalSample& s,
                                             const ScoreParams& p);

// Standard normal CDF and its inverse.
double normal_cdf(double z);
double normal_quantile(double p);

// Quantile / expectile / Huber quantile of a log-normal law. Quantiles are
// closed form; the others come from root-finding on quadrature estimates of
// the defining expectations (relative tolerance 1e-8, done on the normal
// scale to sidestep the heavy right tail).
double distribution_huber_quantile(const LogNormalParams& d,
                                   const FunctionalRequest& req);

// Exact MLE: mu = mean of logs, sigma = root mean squared deviation
// (denominator n). Requires strictly positive values and n >= 2 with at
// least two distinct values.
LogNormalParams lognormal_fit_mle(const EmpiricalSample& s);

struct DensityCdf {
  double density;
  double cdf;
};

DensityCdf lognormal_eval(const LogNormalParams& d, double x);

}  // namespace dhqr
