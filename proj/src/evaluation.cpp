#include "dhqr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dhqr {

PredictionSet::PredictionSet(std::vector<double> x, std::vector<double> y,
                             std::string label_)
    : predictions(std::move(x)), observations(std::move(y)),
      label(std::move(label_)) {
  if (predictions.empty() || predictions.size() != observations.size())
    throw std::invalid_argument("PredictionSet: empty or mismatched lengths");
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (!std::isfinite(predictions[i]) || !std::isfinite(observations[i]))
      throw std::invalid_argument("PredictionSet: non-finite entry");
}

double mean_score(const PredictionSet& ps, const ScoreParams& p) {
  double total = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i)
    total += huber_quantile_score(ps.predictions[i], ps.observations[i], p);
  return total / static_cast<double>(ps.size());
}

double skill_score(double method_mean, double ref_mean) {
  if (ref_mean == 0.0) {
    if (method_mean == 0.0) return 0.0;  // both perfect
    throw std::invalid_argument("skill_score: reference mean score is zero");
  }
  return 1.0 - method_mean / ref_mean;
}

double huber_level_estimate(const PredictionSet& ps, double a, double b) {
  if (a < 0.0 || b < 0.0)
    throw std::invalid_argument("huber_level_estimate: negative cap");
  double below = 0.0, above = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    below += cap_pos(ps.predictions[i] - ps.observations[i], b);
    above += cap_pos(ps.observations[i] - ps.predictions[i], a);
  }
  const double denom = below + above;
  if (denom == 0.0)
    throw std::domain_error(
        "huber_level_estimate: all predictions equal observations");
  return below / denom;
}

double coverage_frequency(const PredictionSet& ps) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (ps.observations[i] <= ps.predictions[i]) ++count;
  return static_cast<double>(count) / static_cast<double>(ps.size());
}

std::vector<MurphyPoint> murphy_curve(const PredictionSet& ps,
                                      const ScoreParams& p,
                                      const std::vector<double>& thetas) {
  if (thetas.empty())
    throw std::invalid_argument("murphy_curve: empty theta grid");
  std::vector<MurphyPoint> curve;
  curve.reserve(thetas.size());
  for (double theta : thetas) {
    double total = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i)
      total += elementary_score(ElementaryKind::huber, ps.predictions[i],
                                ps.observations[i], theta, p);
    curve.push_back({theta, total / static_cast<double>(ps.size())});
  }
  return curve;
}

std::vector<double> default_theta_grid(const PredictionSet& ps,
                                       std::size_t nodes) {
  double lo = ps.predictions[0], hi = ps.predictions[0];
  for (double v : ps.predictions) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double v : ps.observations) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double pad = 0.05 * std::max(hi - lo, 1e-12);
  std::vector<double> grid(nodes);
  for (std::size_t i = 0; i < nodes; ++i)
    grid[i] = (lo - pad) + (hi + pad - (lo - pad)) * static_cast<double>(i) /
                               static_cast<double>(nodes - 1);
  return grid;
}

RatioTable functional_ratio_table(
    const std::vector<std::vector<std::vector<double>>>& huber,
    const std::vector<double>& expectile, const std::vector<double>& quantile,
    std::vector<double> a_grid, std::vector<double> b_grid) {
  if (huber.size() != a_grid.size())
    throw std::invalid_argument("functional_ratio_table: a grid mismatch");
  const std::size_t rows = expectile.size();
  if (rows == 0 || quantile.size() != rows)
    throw std::invalid_argument("functional_ratio_table: row mismatch");

  RatioTable t;
  t.a_grid = std::move(a_grid);
  t.b_grid = std::move(b_grid);
  for (std::size_t ai = 0; ai < t.a_grid.size(); ++ai) {
    if (huber[ai].size() != t.b_grid.size())
      throw std::invalid_argument("functional_ratio_table: b grid mismatch");
    std::vector<double> re, rq;
    for (std::size_t bi = 0; bi < t.b_grid.size(); ++bi) {
      const auto& h = huber[ai][bi];
      if (h.size() != rows)
        throw std::invalid_argument("functional_ratio_table: row mismatch");
      double sum_e = 0.0, sum_q = 0.0;
      std::size_t used = 0, skipped = 0;
      for (std::size_t r = 0; r < rows; ++r) {
        if (expectile[r] == 0.0 || quantile[r] == 0.0) {
          ++skipped;
          continue;
        }
        sum_e += h[r] / expectile[r];
        sum_q += h[r] / quantile[r];
        ++used;
      }
      if (used == 0)
        throw std::domain_error("functional_ratio_table: no usable rows");
      t.excluded_rows = std::max(t.excluded_rows, skipped);
      re.push_back(sum_e / static_cast<double>(used));
      rq.push_back(sum_q / static_cast<double>(used));
    }
    t.h_over_e.push_back(std::move(re));
    t.h_over_q.push_back(std::move(rq));
  }
  return t;
}

}  // namespace dhqr
