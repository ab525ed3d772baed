#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dhqr/scoring.hpp"

namespace dhqr {

// Paired predictions and observations for one method.
struct PredictionSet {
  std::vector<double> predictions;
  std::vector<double> observations;
  std::string label;

  PredictionSet(std::vector<double> x, std::vector<double> y,
                std::string label_ = "");
  std::size_t size() const { return predictions.size(); }
};

double mean_score(const PredictionSet& ps, const ScoreParams& p);

// 1 - method/ref. Both zero returns 0; ref zero with nonzero method is an
// error.
double skill_score(double method_mean, double ref_mean);

// Sample analog of the level identity: pooled capped under-predictions over
// total pooled capped deviations. Throws when the denominator vanishes
// (all predictions exactly equal observations).
double huber_level_estimate(const PredictionSet& ps, double a, double b);

// Fraction of pairs with y <= x.
double coverage_frequency(const PredictionSet& ps);

struct MurphyPoint {
  double theta;
  double mean_elementary;
};

std::vector<MurphyPoint> murphy_curve(const PredictionSet& ps,
                                      const ScoreParams& p,
                                      const std::vector<double>& thetas);

// Default theta grid: 513 equispaced nodes over the data range padded by 5%.
std::vector<double> default_theta_grid(const PredictionSet& ps,
                                       std::size_t nodes = 513);

struct RatioTable {
  std::vector<double> a_grid;
  std::vector<double> b_grid;
  // ratios[ai][bi]; rows with a zero denominator are excluded and counted.
  std::vector<std::vector<double>> h_over_e;
  std::vector<std::vector<double>> h_over_q;
  std::size_t excluded_rows = 0;
};

// huber[ai][bi] holds per-row Huber-quantile predictions at cap pair
// (a_grid[ai], b_grid[bi]); expectile and quantile are aligned per-row
// predictions at the same level.
RatioTable functional_ratio_table(
    const std::vector<std::vector<std::vector<double>>>& huber,
    const std::vector<double>& expectile, const std::vector<double>& quantile,
    std::vector<double> a_grid, std::vector<double> b_grid);

}  // namespace dhqr
