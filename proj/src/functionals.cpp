#include "dhqr/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dhqr {

namespace {

constexpr double kBisectTol = 1e-10;
constexpr int kBisectMaxIter = 200;

// Bisection for a nondecreasing g: returns {smallest x with g(x) >= 0,
// largest x with g(x) <= 0} endpoints of the root interval.
template <class G>
RootResult root_interval(G&& g, double lo, double hi) {
  double l = lo, h = hi;
  for (int i = 0; i < kBisectMaxIter && h - l > kBisectTol; ++i) {
    const double m = 0.5 * (l + h);
    if (g(m) >= 0.0)
      h = m;
    else
      l = m;
  }
  const double left = h;
  l = lo;
  h = hi;
  for (int i = 0; i < kBisectMaxIter && h - l > kBisectTol; ++i) {
    const double m = 0.5 * (l + h);
    if (g(m) <= 0.0)
      l = m;
    else
      h = m;
  }
  const double right = l;
  return {0.5 * (left + right), std::min(left, right), std::max(left, right)};
}

}  // namespace

EmpiricalSample::EmpiricalSample(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty())
    throw std::invalid_argument("EmpiricalSample: empty sample");
  for (double v : values_)
    if (!std::isfinite(v))
      throw std::invalid_argument("EmpiricalSample: non-finite value");
  sorted_ = values_;
  std::sort(sorted_.begin(), sorted_.end());
}

double empirical_quantile(const EmpiricalSample& s, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("empirical_quantile: tau must be in (0,1)");
  const auto& v = s.sorted();
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (static_cast<double>(i + 1) / n >= tau) return v[i];
  }
  return v.back();
}

double empirical_expectile(const EmpiricalSample& s, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("empirical_expectile: tau must be in (0,1)");
  auto balance = [&](double x) {
    double below = 0.0, above = 0.0;
    for (double y : s.values()) {
      below += cap_pos(x - y, kInf);
      above += cap_pos(y - x, kInf);
    }
    return (1.0 - tau) * below - tau * above;
  };
  return root_interval(balance, s.min(), s.max()).value;
}

RootResult empirical_huber_quantile_interval(const EmpiricalSample& s,
                                             const ScoreParams& p) {
  auto balance = [&](double x) {
    double below = 0.0, above = 0.0;
    for (double y : s.values()) {
      below += cap_pos(x - y, p.b);
      above += cap_pos(y - x, p.a);
    }
    return (1.0 - p.tau) * below - p.tau * above;
  };
  return root_interval(balance, s.min(), s.max());
}

double empirical_huber_quantile(const EmpiricalSample& s,
                                const ScoreParams& p) {
  return empirical_huber_quantile_interval(s, p).value;
}

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  // Acklam's rational approximation, then one Halley refinement.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double q, x;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::numbers::sqrt2 * std::sqrt(std::numbers::pi) *
                   std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

namespace {

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

struct QuadState {
  int depth_exhausted = 0;
  double worst_err = 0.0;
};

template <class F>
double adaptive_simpson(F& f, double lo, double hi, double fl, double fm,
                        double fh, double whole, double eps, int depth,
                        QuadState& st) {
  const double m = 0.5 * (lo + hi);
  const double lm = 0.5 * (lo + m), rm = 0.5 * (m + hi);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - lo) / 6.0 * (fl + 4.0 * flm + fm);
  const double right = (hi - m) / 6.0 * (fm + 4.0 * frm + fh);
  const double err = left + right - whole;
  if (depth <= 0) {
    st.depth_exhausted++;
    st.worst_err = std::max(st.worst_err, std::fabs(err));
    return left + right + err / 15.0;
  }
  if (std::fabs(err) <= 15.0 * eps) return left + right + err / 15.0;
  return adaptive_simpson(f, lo, m, fl, flm, fm, left, 0.5 * eps, depth - 1,
                          st) +
         adaptive_simpson(f, m, hi, fm, frm, fh, right, 0.5 * eps, depth - 1,
                          st);
}

template <class F>
double integrate(F f, double lo, double hi, double eps, QuadState& st) {
  const double m = 0.5 * (lo + hi);
  const double fl = f(lo), fm = f(m), fh = f(hi);
  const double whole = (hi - lo) / 6.0 * (fl + 4.0 * fm + fh);
  return adaptive_simpson(f, lo, hi, fl, fm, fh, whole, eps, 48, st);
}

// E[kappa_{0,c}(s * (y - x))] with y log-normal, integrated on the normal
// scale z = (log y - mu) / sigma.
double capped_expectation(const LogNormalParams& d, double x, double c,
                          int sign, QuadState& st) {
  auto f = [&](double z) {
    const double y = std::exp(d.mu + d.sigma * z);
    const double t = sign > 0 ? y - x : x - y;
    return cap_pos(t, c) * normal_pdf(z);
  };
  constexpr double zmax = 12.0;
  // Scale the absolute tolerance by a magnitude proxy for the requested
  // 1e-8 relative accuracy.
  const double scale =
      std::max(1.0, std::exp(d.mu + 0.5 * d.sigma * d.sigma) + std::fabs(x));
  return integrate(f, -zmax, zmax, 1e-8 * scale * 1e-2, st);
}

}  // namespace

double distribution_huber_quantile(const LogNormalParams& d,
                                   const FunctionalRequest& req) {
  const double tau = req.params.tau;
  if (req.kind == FunctionalKind::quantile)
    return std::exp(d.mu + d.sigma * normal_quantile(tau));

  const double a = req.kind == FunctionalKind::expectile ? kInf : req.params.a;
  const double b = req.kind == FunctionalKind::expectile ? kInf : req.params.b;

  QuadState st;
  auto balance = [&](double x) {
    return (1.0 - tau) * capped_expectation(d, x, b, -1, st) -
           tau * capped_expectation(d, x, a, +1, st);
  };
  double lo = std::exp(d.mu - 10.0 * d.sigma);
  double hi = std::exp(d.mu + 10.0 * d.sigma);
  while (balance(hi) < 0.0) hi *= 2.0;
  while (balance(lo) > 0.0) lo *= 0.5;
  const double root = root_interval(balance, lo, hi).value;
  if (st.depth_exhausted > 0)
    throw std::runtime_error(
        "distribution_huber_quantile: quadrature did not converge, residual " +
        std::to_string(st.worst_err));
  return root;
}

LogNormalParams lognormal_fit_mle(const EmpiricalSample& s) {
  if (s.size() < 2)
    throw std::invalid_argument("lognormal_fit_mle: need at least 2 values");
  double sum = 0.0;
  for (double v : s.values()) {
    if (!(v > 0.0))
      throw std::invalid_argument(
          "lognormal_fit_mle: values must be strictly positive");
    sum += std::log(v);
  }
  const double n = static_cast<double>(s.size());
  const double mu = sum / n;
  double ss = 0.0;
  for (double v : s.values()) {
    const double dlt = std::log(v) - mu;
    ss += dlt * dlt;
  }
  const double sigma = std::sqrt(ss / n);
  if (!(sigma > 0.0))
    throw std::invalid_argument("lognormal_fit_mle: degenerate sample, sigma 0");
  return {mu, sigma};
}

DensityCdf lognormal_eval(const LogNormalParams& d, double x) {
  if (!(x > 0.0))
    throw std::invalid_argument("lognormal_eval: x must be positive");
  const double z = (std::log(x) - d.mu) / d.sigma;
  const double density =
      std::exp(-0.5 * z * z) /
      (x * d.sigma * std::sqrt(2.0 * std::numbers::pi));
  return {density, normal_cdf(z)};
}

}  // namespace dhqr
