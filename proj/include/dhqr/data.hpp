#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dhqr/network.hpp"

namespace dhqr {

// Rectangular table: features, one target column, stable row ids. Immutable
// once built.
struct Dataset {
  std::vector<std::vector<double>> features;  // rows x d
  std::vector<double> targets;
  std::vector<std::string> feature_names;
  std::vector<std::size_t> row_ids;

  std::size_t rows() const { return targets.size(); }
  std::size_t dim() const { return feature_names.size(); }
};

struct LoadResult {
  Dataset dataset;
  std::size_t dropped = 0;  // rows with missing or non-numeric cells
};

// CSV with a header row, comma separated, '.' decimal. Rows failing numeric
// parse in any selected column are dropped and counted. target_scale divides
// the target (e.g. 1e6 to express prices in 10^6 currency units).
LoadResult load_table(const std::string& path,
                      const std::vector<std::string>& feature_columns,
                      const std::string& target_column,
                      double target_scale = 1.0);

NormStats zscore_fit(const Dataset& d);
Dataset zscore_apply(const Dataset& d, const NormStats& stats);

struct Split {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Seeded uniform shuffle; floor allocation with the remainder assigned to
// train. Disjoint and exhaustive.
Split split_dataset(const Dataset& d, double train_frac, double val_frac,
                    double test_frac, std::uint64_t seed);

// Features uniform on [0,1]^d; target y = exp(c0 + c.x + sigma z) with z
// standard normal. coefficients holds the intercept followed by d slopes.
Dataset synth_lognormal_regression(std::size_t n, std::size_t d,
                                   const std::vector<double>& coefficients,
                                   double sigma, std::uint64_t seed);

// True conditional tau-quantile of the generator above at a feature row.
double synth_true_quantile(const std::vector<double>& features,
                           const std::vector<double>& coefficients,
                           double sigma, double tau);

void save_dataset_csv(const Dataset& d, const std::string& path);

}  // namespace dhqr
