#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "tabinr/baselines.hpp"
#include "tabinr/metrics.hpp"
#include "tabinr/missingness.hpp"
#include "tabinr/rng.hpp"
#include "tabinr/synthetic.hpp"
#include "tabinr/table.hpp"

using namespace tabinr;

namespace {

EncodedTable load_text(const std::string& csv, const TableSchema& schema) {
  std::istringstream in(csv);
  return load_table(in, schema);
}

// Exhaustive O(n^2) KNN re-implementation, independent of the library path.
Matrix knn_oracle(const EncodedTable& t, const BoolMask& mask, int k) {
  auto obs = [&](int i, int g) {
    int c = t.groups[g].front();
    return t.observed(i, c) && !mask(i, c);
  };
  auto label_of = [&](int i, int g) {
    const auto& group = t.groups[g];
    int best = 0;
    for (size_t kk = 1; kk < group.size(); ++kk)
      if (t.values(i, group[kk]) > t.values(i, group[best])) best = static_cast<int>(kk);
    return best;
  };
  const int n = static_cast<int>(t.rows());
  const int m = t.original_cols();
  Matrix out = t.values;
  for (int a = 0; a < n; ++a)
    for (int g = 0; g < m; ++g) {
      if (obs(a, g)) continue;
      std::vector<std::pair<double, int>> cand;
      for (int b = 0; b < n; ++b) {
        if (b == a) continue;
        double acc = 0;
        int co = 0;
        for (int g2 = 0; g2 < m; ++g2) {
          if (!obs(a, g2) || !obs(b, g2)) continue;
          ++co;
          if (t.is_numeric[t.groups[g2].front()]) {
            double d = t.values(a, t.groups[g2].front()) - t.values(b, t.groups[g2].front());
            acc += d * d;
          } else if (label_of(a, g2) != label_of(b, g2)) {
            acc += 1;
          }
        }
        if (co == 0) continue;
        cand.emplace_back(std::sqrt(acc / co), b);
      }
      std::sort(cand.begin(), cand.end());
      if (t.is_numeric[t.groups[g].front()]) {
        double sum = 0;
        int cnt = 0;
        for (auto [d, b] : cand) {
          if (!obs(b, g)) continue;
          sum += t.values(b, t.groups[g].front());
          if (++cnt == k) break;
        }
        if (cnt == 0) {
          double msum = 0;
          int mc = 0;
          for (int b = 0; b < n; ++b)
            if (obs(b, g)) {
              msum += t.values(b, t.groups[g].front());
              ++mc;
            }
          out(a, t.groups[g].front()) = msum / mc;
        } else {
          out(a, t.groups[g].front()) = sum / cnt;
        }
      } else {
        std::vector<int> counts(t.groups[g].size(), 0);
        std::vector<int> order;
        int cnt = 0;
        for (auto [d, b] : cand) {
          if (!obs(b, g)) continue;
          int lab = label_of(b, g);
          ++counts[lab];
          order.push_back(lab);
          if (++cnt == k) break;
        }
        int winner;
        if (cnt == 0) {
          std::vector<int> full(t.groups[g].size(), 0);
          for (int b = 0; b < n; ++b)
            if (obs(b, g)) ++full[label_of(b, g)];
          winner = static_cast<int>(std::max_element(full.begin(), full.end()) - full.begin());
        } else {
          int best_count = *std::max_element(counts.begin(), counts.end());
          winner = -1;
          for (int lab : order)
            if (counts[lab] == best_count) {
              winner = lab;
              break;
            }
        }
        for (size_t kk = 0; kk < t.groups[g].size(); ++kk)
          out(a, t.groups[g][kk]) = kk == static_cast<size_t>(winner) ? 1.0 : 0.0;
      }
    }
  return out;
}

// O(n^2) pair-counting AUROC oracle.
double auc_oracle(const std::vector<double>& y, const std::vector<double>& s) {
  double num = 0;
  long pos = 0, neg = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 1.0)
      ++pos;
    else
      ++neg;
    for (size_t j = 0; j < y.size(); ++j) {
      if (y[i] != 1.0 || y[j] != 0.0) continue;
      if (s[i] > s[j])
        num += 1.0;
      else if (s[i] == s[j])
        num += 0.5;
    }
  }
  return num / (static_cast<double>(pos) * neg);
}

}  // namespace

TEST_CASE("mean imputation fills the observed mean") {
  TableSchema s;
  s.columns.push_back({"x", ColumnKind::numeric, {}});
  s.columns.push_back({"y", ColumnKind::numeric, {}});
  auto t = load_text("x,y\n1,0\n,0\n3,0\n", s);
  Matrix out = impute_mean_mode(t, BoolMask::Constant(3, 2, false));
  CHECK(out(1, 0) == 2.0);
}

TEST_CASE("mode tie resolves to the lowest category index") {
  TableSchema s;
  s.columns.push_back({"c", ColumnKind::categorical, {"a", "b"}});
  s.columns.push_back({"x", ColumnKind::numeric, {}});
  auto t = load_text("c,x\na,0\nb,0\nb,0\na,0\n,0\n", s);
  Matrix out = impute_mean_mode(t, BoolMask::Constant(5, 3, false));
  CHECK(out(4, 0) == 1.0);
  CHECK(out(4, 1) == 0.0);
}

TEST_CASE("mean minimizes column MSE among constant imputers") {
  // The filled constant must be MSE-optimal over the cells it summarizes.
  auto t = synth_correlated_gaussian(200, 1, 42);
  auto pair = mask_mcar(t, 0.3, 7);
  auto masked = apply_mask(t, pair.mask);
  Matrix out = impute_mean_mode(masked, BoolMask::Constant(t.rows(), 1, false));
  double fill = out(static_cast<int>(std::distance(
                        pair.mask.col(0).data(),
                        std::find(pair.mask.col(0).data(),
                                  pair.mask.col(0).data() + t.rows(), true))),
                    0);
  auto mse_of = [&](double c) {
    double acc = 0;
    long cnt = 0;
    for (int i = 0; i < t.rows(); ++i)
      if (masked.observed(i, 0)) {
        acc += std::pow(c - t.values(i, 0), 2);
        ++cnt;
      }
    return acc / cnt;
  };
  double best = mse_of(fill);
  for (double c = -3.0; c <= 3.0; c += 0.1) CHECK(best <= mse_of(c) + 1e-9);
}

TEST_CASE("mean imputation NRMSE on a gaussian column is about 1") {
  auto t = synth_correlated_gaussian(20000, 1, 9, 1, 0.0);
  auto pair = mask_mcar(t, 0.3, 5);
  auto masked = apply_mask(t, pair.mask);
  Matrix out = impute_mean_mode(masked, BoolMask::Constant(t.rows(), 1, false));
  CHECK(nrmse(t, out, pair.mask).mean == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("knn k=1 copies a duplicate row") {
  TableSchema s;
  s.columns.push_back({"a", ColumnKind::numeric, {}});
  s.columns.push_back({"b", ColumnKind::numeric, {}});
  auto t = load_text("a,b\n1,5\n1,\n9,2\n", s);
  Matrix out = impute_knn(t, BoolMask::Constant(3, 2, false), 1);
  CHECK(out(1, 1) == 5.0);
}

TEST_CASE("knn with k >= n matches the oracle using every valid donor") {
  auto t = synth_correlated_gaussian(30, 4, 11);
  auto pair = mask_mcar(t, 0.3, 13);
  auto masked = apply_mask(t, pair.mask);
  BoolMask none = BoolMask::Constant(t.rows(), t.cols(), false);
  CHECK(impute_knn(masked, none, 100) == knn_oracle(masked, none, 100));
}

TEST_CASE("knn matches the brute-force oracle on random mixed tables") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    auto t = synth_logistic_categorical(30 + static_cast<int>(seed), 3, 2, 3, seed);
    auto pair = mask_mcar(t, 0.25, seed + 50);
    auto masked = apply_mask(t, pair.mask);
    BoolMask none = BoolMask::Constant(t.rows(), t.cols(), false);
    for (int k : {1, 3, 5}) {
      Matrix got = impute_knn(masked, none, k);
      Matrix want = knn_oracle(masked, none, k);
      CHECK(got == want);
    }
  }
}

TEST_CASE("knn rejects non-positive k") {
  auto t = synth_rank1(5, 3, 1, 0.0);
  CHECK_THROWS(impute_knn(t, BoolMask::Constant(5, 3, false), 0));
}

TEST_CASE("nrmse closed forms") {
  TableSchema s;
  s.columns.push_back({"x", ColumnKind::numeric, {}});
  auto t = load_text("x\n0\n2\n", s);
  BoolMask mask = BoolMask::Constant(2, 1, true);
  Matrix perfect = t.values;
  CHECK(nrmse(t, perfect, mask).mean == 0.0);

  Matrix ones(2, 1);
  ones << 1, 1;
  // RMSE 1 over population std of {0,2} = 1.
  CHECK(nrmse(t, ones, mask).mean == doctest::Approx(1.0));
}

TEST_CASE("nrmse equals an independent scalar evaluation") {
  auto t = synth_correlated_gaussian(60, 4, 15);
  auto pair = mask_mcar(t, 0.4, 3);
  auto gen = rng::engine(5, "test.nrmse");
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix imputed = t.values;
  for (int i = 0; i < t.rows(); ++i)
    for (int j = 0; j < t.cols(); ++j)
      if (pair.mask(i, j)) imputed(i, j) += normal(gen);

  auto rep = nrmse(t, imputed, pair.mask);
  double acc = 0;
  int cols = 0;
  for (int j = 0; j < t.cols(); ++j) {
    double se = 0;
    long cnt = 0;
    for (int i = 0; i < t.rows(); ++i)
      if (pair.mask(i, j)) {
        se += std::pow(imputed(i, j) - t.values(i, j), 2);
        ++cnt;
      }
    if (cnt == 0) continue;
    double mu = 0;
    for (int i = 0; i < t.rows(); ++i) mu += t.values(i, j);
    mu /= t.rows();
    double var = 0;
    for (int i = 0; i < t.rows(); ++i) var += std::pow(t.values(i, j) - mu, 2);
    var /= t.rows();
    acc += std::sqrt(se / cnt) / std::sqrt(var);
    ++cols;
  }
  CHECK(rep.mean == doctest::Approx(acc / cols).epsilon(1e-12));
}

TEST_CASE("nrmse scale equivariance") {
  auto t = synth_correlated_gaussian(50, 2, 19);
  auto pair = mask_mcar(t, 0.3, 2);
  Matrix imputed = t.values * 0.9;
  double base = nrmse(t, imputed, pair.mask).mean;
  EncodedTable scaled = t;
  scaled.values.col(0) *= 7.5;
  Matrix imputed2 = imputed;
  imputed2.col(0) *= 7.5;
  CHECK(nrmse(scaled, imputed2, pair.mask).mean == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("auroc closed forms") {
  std::vector<double> y{0, 0, 1, 1};
  CHECK(*auroc_binary(y, {0.1, 0.2, 0.8, 0.9}) == 1.0);
  CHECK(*auroc_binary(y, {0.5, 0.5, 0.5, 0.5}) == 0.5);
  CHECK(!auroc_binary({1, 1}, {0.1, 0.2}).has_value());
}

TEST_CASE("auroc matches the pair-counting oracle with ties") {
  auto gen = rng::engine(21, "test.auc");
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> bucket(0, 9);  // forces score ties
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> y, s;
    bool has0 = false, has1 = false;
    for (int i = 0; i < 50; ++i) {
      int label = coin(gen);
      y.push_back(label);
      s.push_back(bucket(gen) / 10.0);
      has0 |= label == 0;
      has1 |= label == 1;
    }
    if (!has0 || !has1) continue;
    CHECK(*auroc_binary(y, s) == doctest::Approx(auc_oracle(y, s)).epsilon(1e-12));
  }
}

TEST_CASE("auroc is invariant to strictly increasing transforms") {
  auto gen = rng::engine(23, "test.auc.mono");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);
  std::vector<double> y, s;
  for (int i = 0; i < 80; ++i) {
    y.push_back(coin(gen));
    s.push_back(unif(gen));
  }
  double base = *auroc_binary(y, s);
  std::vector<double> exp_s = s, aff_s = s;
  for (auto& v : exp_s) v = std::exp(v);
  for (auto& v : aff_s) v = 3.0 * v + 11.0;
  CHECK(*auroc_binary(y, exp_s) == doctest::Approx(base).epsilon(1e-12));
  CHECK(*auroc_binary(y, aff_s) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("table-level auroc reports per component and skips degenerates") {
  auto t = synth_logistic_categorical(100, 1, 2, 3, 27);
  auto pair = mask_mcar(t, 0.5, 5);
  // Scores: the truth plus noise gives informative rankings.
  auto gen = rng::engine(29, "test.auc.table");
  std::normal_distribution<double> normal(0.0, 0.3);
  Matrix scores = t.values;
  for (int i = 0; i < t.rows(); ++i)
    for (int j = 0; j < t.cols(); ++j) scores(i, j) += normal(gen);
  auto rep = auroc(t, scores, pair.mask);
  REQUIRE(rep.mean.has_value());
  CHECK(*rep.mean > 0.6);
  CHECK(!rep.per_component.empty());

  // Empty mask: nothing to score.
  auto none = auroc(t, scores, BoolMask::Constant(t.rows(), t.cols(), false));
  CHECK(!none.mean.has_value());
}
