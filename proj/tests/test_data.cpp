#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "dhqr/data.hpp"
#include "dhqr/functionals.hpp"

using namespace dhqr;

namespace {

struct TempCsv {
  std::string path;
  explicit TempCsv(const std::string& content,
                   const std::string& name = "test_data_tmp.csv")
      : path(name) {
    std::ofstream out(path);
    out << content;
  }
  ~TempCsv() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("load_table drops incomplete rows") {
  TempCsv csv(
      "id,area,rooms,price\n"
      "1,120,3,500000\n"
      "2,,3,450000\n"
      "3,80,2,300000\n"
      "4,95,abc,410000\n"
      "5,100,4,\n"
      "6,150,5,700000\n");
  const auto r = load_table(csv.path, {"area", "rooms"}, "price", 1e6);
  CHECK(r.dataset.rows() == 3);
  CHECK(r.dropped == 3);
  CHECK(r.dataset.targets[0] == doctest::Approx(0.5));
  CHECK(r.dataset.feature_names == std::vector<std::string>{"area", "rooms"});
  CHECK_THROWS(load_table(csv.path, {"nosuch"}, "price"));
}

TEST_CASE("load_table edge cases") {
  TempCsv header_only("a,b\n", "test_data_header.csv");
  CHECK_THROWS(load_table(header_only.path, {"a"}, "b"));
  CHECK_THROWS(load_table("does_not_exist.csv", {"a"}, "b"));
}

TEST_CASE("zscore fit and apply") {
  Dataset d;
  d.feature_names = {"f1", "f2"};
  d.features = {{1.0, 10.0}, {2.0, 20.0}, {3.0, 30.0}, {4.0, 40.0}};
  d.targets = {1, 2, 3, 4};
  d.row_ids = {1, 2, 3, 4};
  const auto stats = zscore_fit(d);
  const auto z = zscore_apply(d, stats);
  for (std::size_t j = 0; j < 2; ++j) {
    double mean = 0.0, var = 0.0;
    for (const auto& row : z.features) mean += row[j];
    mean /= 4.0;
    for (const auto& row : z.features) var += (row[j] - mean) * (row[j] - mean);
    CHECK(std::fabs(mean) < 1e-12);
    CHECK(std::fabs(std::sqrt(var / 4.0) - 1.0) < 1e-12);
  }
  CHECK(z.targets == d.targets);  // targets untouched

  // affine round trip
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(z.features[i][j] * stats.stddev[j] + stats.mean[j] ==
            doctest::Approx(d.features[i][j]).epsilon(1e-12));

  Dataset constant = d;
  for (auto& row : constant.features) row[1] = 7.0;
  CHECK_THROWS_WITH_AS(zscore_fit(constant),
                       doctest::Contains("f2"), std::invalid_argument);
}

TEST_CASE("split sizes and determinism") {
  Dataset d;
  d.feature_names = {"f"};
  for (std::size_t i = 0; i < 8843; ++i) {
    d.features.push_back({static_cast<double>(i)});
    d.targets.push_back(static_cast<double>(i));
    d.row_ids.push_back(i);
  }
  const auto s = split_dataset(d, 0.4, 0.3, 0.3, 17);
  CHECK(s.train.rows() == 3537);
  CHECK(s.val.rows() == 2653);
  CHECK(s.test.rows() == 2653);

  const auto s2 = split_dataset(d, 0.4, 0.3, 0.3, 17);
  CHECK(s.train.row_ids == s2.train.row_ids);
  CHECK(s.test.row_ids == s2.test.row_ids);

  Dataset ten;
  ten.feature_names = {"f"};
  for (std::size_t i = 0; i < 10; ++i) {
    ten.features.push_back({static_cast<double>(i)});
    ten.targets.push_back(0.0);
    ten.row_ids.push_back(i);
  }
  const auto st = split_dataset(ten, 0.4, 0.3, 0.3, 1);
  CHECK(st.train.rows() == 4);
  CHECK(st.val.rows() == 3);
  CHECK(st.test.rows() == 3);
  CHECK_THROWS(split_dataset(ten, 0.5, 0.3, 0.3, 1));
}

TEST_CASE("split partitions the row set") {
  Dataset d;
  d.feature_names = {"f"};
  for (std::size_t i = 0; i < 101; ++i) {
    d.features.push_back({0.0});
    d.targets.push_back(0.0);
    d.row_ids.push_back(i);
  }
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = split_dataset(d, 0.4, 0.3, 0.3, seed);
    std::set<std::size_t> all;
    for (auto id : s.train.row_ids) all.insert(id);
    for (auto id : s.val.row_ids) all.insert(id);
    for (auto id : s.test.row_ids) all.insert(id);
    CHECK(all.size() == 101);
    CHECK(s.train.rows() + s.val.rows() + s.test.rows() == 101);
  }
}

TEST_CASE("normalization stats ignore non-fit rows") {
  Dataset train;
  train.feature_names = {"f"};
  train.features = {{1.0}, {2.0}, {3.0}};
  train.targets = {0, 0, 0};
  train.row_ids = {0, 1, 2};
  const auto stats = zscore_fit(train);
  Dataset other = train;
  other.features = {{100.0}, {200.0}, {300.0}};
  const auto stats2 = zscore_fit(train);  // unchanged by other data existing
  CHECK(stats.mean == stats2.mean);
  const auto z = zscore_apply(other, stats);
  CHECK(z.features[0][0] == doctest::Approx((100.0 - 2.0) / stats.stddev[0]));
}

TEST_CASE("synthetic generator") {
  const std::vector<double> coef{0.2, 1.0, -0.5};
  const auto d = synth_lognormal_regression(50, 2, coef, 0.0, 9);
  CHECK(d.rows() == 50);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const double lin =
        coef[0] + coef[1] * d.features[i][0] + coef[2] * d.features[i][1];
    CHECK(d.targets[i] == doctest::Approx(std::exp(lin)).epsilon(1e-12));
  }
  const auto d2 = synth_lognormal_regression(50, 2, coef, 0.0, 9);
  CHECK(d.targets == d2.targets);

  // d = 0: unconditional log-normal, MLE recovers the parameters
  const auto flat = synth_lognormal_regression(100000, 0, {0.25}, 0.6, 4);
  const auto fit = lognormal_fit_mle(EmpiricalSample(flat.targets));
  CHECK(std::fabs(fit.mu - 0.25) < 0.01);
  CHECK(std::fabs(fit.sigma - 0.6) < 0.01);
  CHECK_THROWS(synth_lognormal_regression(10, 2, {1.0}, 0.5, 1));
}

TEST_CASE("synthetic ground-truth coverage") {
  const std::vector<double> coef{0.1, 0.8, -0.3, 0.4};
  const double sigma = 0.5, tau = 0.7;
  const std::size_t n = 20000;
  const auto d = synth_lognormal_regression(n, 3, coef, sigma, 77);
  std::size_t covered = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (d.targets[i] <= synth_true_quantile(d.features[i], coef, sigma, tau))
      ++covered;
  const double freq = static_cast<double>(covered) / static_cast<double>(n);
  const double band = 3.0 * std::sqrt(tau * (1.0 - tau) / static_cast<double>(n));
  CHECK(std::fabs(freq - tau) <= band);
}
