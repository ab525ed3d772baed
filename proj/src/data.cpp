#include "dhqr/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "dhqr/functionals.hpp"

namespace dhqr {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  std::size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return false;
  std::size_t end = s.find_last_not_of(" \t\r") + 1;
  const char* first = s.data() + begin;
  const char* last = s.data() + end;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& idx) {
  Dataset out;
  out.feature_names = d.feature_names;
  for (std::size_t i : idx) {
    out.features.push_back(d.features[i]);
    out.targets.push_back(d.targets[i]);
    out.row_ids.push_back(d.row_ids[i]);
  }
  return out;
}

}  // namespace

LoadResult load_table(const std::string& path,
                      const std::vector<std::string>& feature_columns,
                      const std::string& target_column, double target_scale) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_table: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("load_table: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);

  auto column_index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw std::runtime_error("load_table: missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> feat_idx;
  for (const auto& c : feature_columns) feat_idx.push_back(column_index(c));
  const std::size_t targ_idx = column_index(target_column);

  LoadResult result;
  result.dataset.feature_names = feature_columns;
  std::size_t row_id = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    ++row_id;
    std::vector<double> feats;
    feats.reserve(feat_idx.size());
    bool ok = true;
    for (std::size_t idx : feat_idx) {
      double v;
      if (idx >= fields.size() || !parse_double(fields[idx], v)) {
        ok = false;
        break;
      }
      feats.push_back(v);
    }
    double target = 0.0;
    if (ok && (targ_idx >= fields.size() ||
               !parse_double(fields[targ_idx], target)))
      ok = false;
    if (!ok) {
      ++result.dropped;
      continue;
    }
    result.dataset.features.push_back(std::move(feats));
    result.dataset.targets.push_back(target / target_scale);
    result.dataset.row_ids.push_back(row_id);
  }
  if (result.dataset.rows() == 0)
    throw std::runtime_error("load_table: no usable rows in " + path);
  return result;
}

NormStats zscore_fit(const Dataset& d) {
  if (d.rows() == 0) throw std::invalid_argument("zscore_fit: empty dataset");
  const std::size_t n = d.rows(), dim = d.dim();
  NormStats stats;
  stats.mean.assign(dim, 0.0);
  stats.stddev.assign(dim, 0.0);
  for (const auto& row : d.features)
    for (std::size_t j = 0; j < dim; ++j) stats.mean[j] += row[j];
  for (auto& m : stats.mean) m /= static_cast<double>(n);
  for (const auto& row : d.features)
    for (std::size_t j = 0; j < dim; ++j) {
      const double dv = row[j] - stats.mean[j];
      stats.stddev[j] += dv * dv;
    }
  for (std::size_t j = 0; j < dim; ++j) {
    stats.stddev[j] = std::sqrt(stats.stddev[j] / static_cast<double>(n));
    if (!(stats.stddev[j] > 0.0))
      throw std::invalid_argument("zscore_fit: zero-variance feature '" +
                                  d.feature_names[j] + "'");
  }
  return stats;
}

Dataset zscore_apply(const Dataset& d, const NormStats& stats) {
  if (stats.mean.size() != d.dim())
    throw std::invalid_argument("zscore_apply: dimension mismatch");
  Dataset out = d;
  for (auto& row : out.features)
    for (std::size_t j = 0; j < row.size(); ++j)
      row[j] = (row[j] - stats.mean[j]) / stats.stddev[j];
  return out;
}

Split split_dataset(const Dataset& d, double train_frac, double val_frac,
                    double test_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0 && val_frac > 0.0 && test_frac > 0.0) ||
      std::fabs(train_frac + val_frac + test_frac - 1.0) > 1e-9)
    throw std::invalid_argument("split_dataset: fractions must be positive and sum to 1");
  const std::size_t n = d.rows();
  if (n < 3) throw std::invalid_argument("split_dataset: need at least 3 rows");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_val = static_cast<std::size_t>(
      std::llround(val_frac * static_cast<double>(n)));
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_frac * static_cast<double>(n)));
  if (n_val + n_test >= n)
    throw std::invalid_argument("split_dataset: empty training share");
  const std::size_t n_train = n - n_val - n_test;  // remainder goes to train

  Split s;
  s.train = take_rows(d, {order.begin(), order.begin() + n_train});
  s.val = take_rows(
      d, {order.begin() + n_train, order.begin() + n_train + n_val});
  s.test = take_rows(d, {order.begin() + n_train + n_val, order.end()});
  return s;
}

Dataset synth_lognormal_regression(std::size_t n, std::size_t d,
                                   const std::vector<double>& coefficients,
                                   double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0))
    throw std::invalid_argument("synth_lognormal_regression: sigma < 0");
  if (coefficients.size() != d + 1)
    throw std::invalid_argument(
        "synth_lognormal_regression: need intercept plus d slopes");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);

  Dataset out;
  for (std::size_t j = 0; j < d; ++j)
    out.feature_names.push_back("x" + std::to_string(j + 1));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(d);
    for (auto& v : row) v = u(rng);
    double lin = coefficients[0];
    for (std::size_t j = 0; j < d; ++j) lin += coefficients[j + 1] * row[j];
    out.features.push_back(std::move(row));
    out.targets.push_back(std::exp(lin + sigma * z(rng)));
    out.row_ids.push_back(i + 1);
  }
  return out;
}

double synth_true_quantile(const std::vector<double>& features,
                           const std::vector<double>& coefficients,
                           double sigma, double tau) {
  if (coefficients.size() != features.size() + 1)
    throw std::invalid_argument("synth_true_quantile: coefficient mismatch");
  double lin = coefficients[0];
  for (std::size_t j = 0; j < features.size(); ++j)
    lin += coefficients[j + 1] * features[j];
  return std::exp(lin + sigma * normal_quantile(tau));
}

void save_dataset_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dataset_csv: cannot open " + path);
  out.precision(17);
  for (const auto& name : d.feature_names) out << name << ',';
  out << "y\n";
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (double v : d.features[i]) out << v << ',';
    out << d.targets[i] << '\n';
  }
}

}  // namespace dhqr
