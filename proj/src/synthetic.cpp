#include "tabinr/synthetic.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "tabinr/rng.hpp"

namespace tabinr {

namespace {

EncodedTable from_numeric_matrix(const Matrix& values, const std::string& prefix) {
  EncodedTable t;
  const int n = static_cast<int>(values.rows());
  const int m = static_cast<int>(values.cols());
  t.values = values;
  t.observed = BoolMask::Constant(n, m, true);
  for (int j = 0; j < m; ++j) {
    t.schema.columns.push_back({prefix + std::to_string(j), ColumnKind::numeric, {}});
    t.groups.push_back({j});
    t.col_of.push_back(j);
    t.is_numeric.push_back(true);
  }
  t.scale.assign(m, std::nullopt);
  t.row_ids.resize(n);
  std::iota(t.row_ids.begin(), t.row_ids.end(), 0);
  t.group_ids.resize(m);
  std::iota(t.group_ids.begin(), t.group_ids.end(), 0);
  t.col_ids.resize(m);
  std::iota(t.col_ids.begin(), t.col_ids.end(), 0);
  return t;
}

}  // namespace

EncodedTable synth_rank1(int n, int m, std::uint64_t seed, double noise_std) {
  auto gen = rng::engine(seed, "synth.rank1");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  Eigen::VectorXd a(n), b(m);
  for (int i = 0; i < n; ++i) a(i) = normal(gen);
  for (int j = 0; j < m; ++j) b(j) = unif(gen);
  Matrix values = a * b.transpose();
  if (noise_std > 0)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) values(i, j) += noise_std * normal(gen);
  return from_numeric_matrix(values, "f");
}

EncodedTable synth_correlated_gaussian(int n, int m, std::uint64_t seed, int factors,
                                       double noise_std) {
  auto gen = rng::engine(seed, "synth.corr");
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix F(m, factors);
  for (int j = 0; j < m; ++j)
    for (int f = 0; f < factors; ++f) F(j, f) = normal(gen);
  Matrix Z(n, factors);
  for (int i = 0; i < n; ++i)
    for (int f = 0; f < factors; ++f) Z(i, f) = normal(gen);
  Matrix values = Z * F.transpose();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) values(i, j) += noise_std * normal(gen);
  return from_numeric_matrix(values, "f");
}

EncodedTable synth_logistic_categorical(int n, int num_numeric, int num_categorical,
                                        int categories, std::uint64_t seed) {
  EncodedTable base = synth_correlated_gaussian(n, num_numeric + num_categorical, seed, 2, 0.3);

  EncodedTable t;
  t.row_ids = base.row_ids;
  int mp = 0;
  for (int g = 0; g < num_numeric + num_categorical; ++g) {
    bool is_cat = g >= num_numeric;
    if (!is_cat) {
      t.schema.columns.push_back({"num" + std::to_string(g), ColumnKind::numeric, {}});
      t.groups.push_back({mp});
      t.col_of.push_back(g);
      t.is_numeric.push_back(true);
      ++mp;
    } else {
      Column c{"cat" + std::to_string(g - num_numeric), ColumnKind::categorical, {}};
      for (int k = 0; k < categories; ++k) c.categories.push_back("c" + std::to_string(k));
      t.schema.columns.push_back(c);
      t.groups.push_back({});
      for (int k = 0; k < categories; ++k) {
        t.groups.back().push_back(mp);
        t.col_of.push_back(g);
        t.is_numeric.push_back(false);
        ++mp;
      }
    }
  }
  t.values = Matrix::Zero(n, mp);
  t.observed = BoolMask::Constant(n, mp, true);
  t.scale.assign(mp, std::nullopt);
  t.group_ids.resize(t.groups.size());
  std::iota(t.group_ids.begin(), t.group_ids.end(), 0);
  t.col_ids.resize(mp);
  std::iota(t.col_ids.begin(), t.col_ids.end(), 0);

  for (int i = 0; i < n; ++i)
    for (size_t g = 0; g < t.groups.size(); ++g) {
      if (t.is_numeric[t.groups[g].front()]) {
        t.values(i, t.groups[g].front()) = base.values(i, static_cast<int>(g));
      } else {
        double z = base.values(i, static_cast<int>(g));
        double p = 1.0 / (1.0 + std::exp(-z));
        int k = std::min<int>(categories - 1, static_cast<int>(p * categories));
        t.values(i, t.groups[g][k]) = 1.0;
      }
    }
  return t;
}

}  // namespace tabinr
