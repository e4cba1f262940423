#include "tabinr/missingness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tabinr/rng.hpp"

namespace tabinr {

namespace {

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

MaskPair empty_pair(const EncodedTable& t) {
  MaskPair p;
  p.mask = BoolMask::Constant(t.rows(), t.cols(), false);
  p.truth = Matrix::Zero(t.rows(), t.cols());
  return p;
}

void mask_group(const EncodedTable& t, MaskPair& out, int row, int orig_col) {
  for (int c : t.groups[orig_col]) {
    out.mask(row, c) = true;
    out.truth(row, c) = t.values(row, c);
  }
}

struct MarState {
  std::vector<int> subset;       // always-observed original columns
  std::vector<int> maskable;     // the rest
  std::vector<Eigen::VectorXd> scores;  // per maskable column: n row scores
  std::vector<double> intercepts;
  double column_target = 0.0;    // per-maskable-column masking rate
};

// Per-maskable-column rate that makes the overall realized rate hit p_miss,
// weighting columns by their observed expanded cells.
double overall_to_column_target(const EncodedTable& t, const std::vector<int>& maskable,
                                double p_miss) {
  long total = 0, in_maskable = 0;
  std::vector<bool> flag(t.original_cols(), false);
  for (int g : maskable) flag[g] = true;
  for (int i = 0; i < t.rows(); ++i)
    for (int j = 0; j < t.cols(); ++j) {
      if (!t.observed(i, j)) continue;
      ++total;
      if (flag[t.col_of[j]]) ++in_maskable;
    }
  if (in_maskable == 0) throw std::invalid_argument("no observed maskable cells");
  double q = p_miss * static_cast<double>(total) / static_cast<double>(in_maskable);
  if (q >= 1.0)
    throw std::invalid_argument(
        "p_miss unreachable: the always-observed subset leaves too few maskable cells");
  return q;
}

// Shared MAR machinery. With `overall_target` set, the per-column rate is
// inflated so the realized rate over all cells lands on p_miss; MNAR's first
// stage instead targets p_miss per column (its second stage covers the rest).
MarState mar_setup(const EncodedTable& t, const MissingnessSpec& spec,
                   bool overall_target) {
  const int m = t.original_cols();
  if (m < 2) throw std::invalid_argument("MAR/MNAR needs >= 2 original columns");
  int k = static_cast<int>(std::floor(spec.observed_subset_fraction * m));
  k = std::clamp(k, 1, m - 1);

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  auto sub_rng = rng::engine(spec.seed, "mar.subset");
  std::shuffle(order.begin(), order.end(), sub_rng);

  MarState st;
  st.subset.assign(order.begin(), order.begin() + k);
  st.maskable.assign(order.begin() + k, order.end());
  std::sort(st.subset.begin(), st.subset.end());
  std::sort(st.maskable.begin(), st.maskable.end());
  if (st.maskable.empty()) throw std::invalid_argument("no maskable columns");
  st.column_target = overall_target ? overall_to_column_target(t, st.maskable, spec.p_miss)
                                    : spec.p_miss;

  // Standardized features from the always-observed columns' expanded values.
  std::vector<int> feat_cols;
  for (int g : st.subset)
    for (int c : t.groups[g]) feat_cols.push_back(c);
  const int n = static_cast<int>(t.rows());
  const int d = static_cast<int>(feat_cols.size());
  Matrix X = Matrix::Zero(n, d);
  for (int f = 0; f < d; ++f) {
    int c = feat_cols[f];
    double sum = 0, sum2 = 0;
    int cnt = 0;
    for (int i = 0; i < n; ++i)
      if (t.observed(i, c)) {
        sum += t.values(i, c);
        sum2 += t.values(i, c) * t.values(i, c);
        ++cnt;
      }
    double mean = cnt > 0 ? sum / cnt : 0.0;
    double var = cnt > 0 ? std::max(0.0, sum2 / cnt - mean * mean) : 0.0;
    double sd = std::sqrt(var);
    if (sd <= 0) sd = 1.0;
    for (int i = 0; i < n; ++i)
      X(i, f) = t.observed(i, c) ? (t.values(i, c) - mean) / sd : 0.0;
  }

  for (int g : st.maskable) {
    auto w_rng = rng::engine(spec.seed, "mar.weights", static_cast<std::uint64_t>(g));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd w(d);
    for (int f = 0; f < d; ++f) w(f) = normal(w_rng);
    Eigen::VectorXd s = X * w;

    double b = 0.0;
    if (st.column_target > 0.0 && st.column_target < 1.0) {
      auto mean_prob = [&](double bb) {
        double acc = 0;
        for (int i = 0; i < n; ++i) acc += sigmoid(s(i) + bb);
        return acc / n;
      };
      b = calibrate_intercept(mean_prob, st.column_target);
    }
    st.scores.push_back(std::move(s));
    st.intercepts.push_back(b);
  }
  return st;
}

void apply_mar_stage(const EncodedTable& t, const MissingnessSpec& spec,
                     const MarState& st, MaskPair& out) {
  if (st.column_target <= 0.0) return;
  auto bern = rng::engine(spec.seed, "mar.bernoulli");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = static_cast<int>(t.rows());
  for (int i = 0; i < n; ++i)
    for (size_t kk = 0; kk < st.maskable.size(); ++kk) {
      double u = unif(bern);  // draw unconditionally: stable stream
      if (!t.group_observed(i, st.maskable[kk])) continue;
      double p = st.column_target >= 1.0 ? 1.0 : sigmoid(st.scores[kk](i) + st.intercepts[kk]);
      if (u < p) mask_group(t, out, i, st.maskable[kk]);
    }
}

}  // namespace

Mechanism mechanism_from_string(const std::string& s) {
  if (s == "mcar") return Mechanism::mcar;
  if (s == "mar") return Mechanism::mar;
  if (s == "mnar") return Mechanism::mnar;
  throw std::invalid_argument("unknown mechanism: " + s);
}

std::string mechanism_to_string(Mechanism m) {
  switch (m) {
    case Mechanism::mcar: return "mcar";
    case Mechanism::mar: return "mar";
    default: return "mnar";
  }
}

double calibrate_intercept(const std::function<double(double)>& probability_fn,
                           double target_rate) {
  if (target_rate <= 0.0 || target_rate >= 1.0)
    throw std::invalid_argument("target_rate must lie in (0,1)");
  double lo = -50.0, hi = 50.0;
  if (probability_fn(lo) > target_rate || probability_fn(hi) < target_rate) {
    lo = -200.0;
    hi = 200.0;
    if (probability_fn(lo) > target_rate || probability_fn(hi) < target_rate)
      throw std::runtime_error("calibrate_intercept: target unreachable in bracket");
  }
  double mid = 0.0;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    double p = probability_fn(mid);
    if (std::abs(p - target_rate) <= 1e-6) return mid;
    if (p < target_rate)
      lo = mid;
    else
      hi = mid;
  }
  if (std::abs(probability_fn(mid) - target_rate) <= 1e-6) return mid;
  throw std::runtime_error("calibrate_intercept: did not converge");
}

MaskPair mask_mcar(const EncodedTable& table, double p_miss, std::uint64_t seed) {
  if (p_miss < 0.0 || p_miss > 1.0) throw std::invalid_argument("p_miss outside [0,1]");
  MaskPair out = empty_pair(table);
  auto gen = rng::engine(seed, "mcar");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < table.rows(); ++i)
    for (int g = 0; g < table.original_cols(); ++g) {
      double u = unif(gen);
      if (!table.group_observed(i, g)) continue;
      if (u < p_miss) mask_group(table, out, i, g);
    }
  return out;
}

MaskPair mask_mar(const EncodedTable& table, const MissingnessSpec& spec) {
  if (spec.p_miss < 0.0 || spec.p_miss > 1.0) throw std::invalid_argument("p_miss outside [0,1]");
  MaskPair out = empty_pair(table);
  if (spec.p_miss <= 0.0) return out;
  MarState st = mar_setup(table, spec, /*overall_target=*/true);
  apply_mar_stage(table, spec, st, out);
  return out;
}

MaskPair mask_mnar(const EncodedTable& table, const MissingnessSpec& spec) {
  if (spec.p_miss < 0.0 || spec.p_miss > 1.0) throw std::invalid_argument("p_miss outside [0,1]");
  MaskPair out = empty_pair(table);
  if (spec.p_miss <= 0.0) return out;
  // First stage targets p_miss per maskable column; the second stage masks
  // the subset at the same rate, so the overall rate also lands on p_miss.
  MarState st = mar_setup(table, spec, /*overall_target=*/false);
  apply_mar_stage(table, spec, st, out);

  // Second stage: Bernoulli(p_miss) on the previously always-observed columns
  // (optionally every still-unmasked cell).
  auto bern = rng::engine(spec.seed, "mnar.bernoulli");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto& cols = spec.second_stage_all_cells ? [&] {
    std::vector<int> all(table.original_cols());
    std::iota(all.begin(), all.end(), 0);
    return all;
  }() : st.subset;
  for (int i = 0; i < table.rows(); ++i)
    for (int g : cols) {
      double u = unif(bern);
      if (!table.group_observed(i, g)) continue;
      if (out.mask(i, table.groups[g].front())) continue;
      if (u < spec.p_miss) mask_group(table, out, i, g);
    }
  return out;
}

MaskPair synthesize_mask(const EncodedTable& table, const MissingnessSpec& spec) {
  switch (spec.mechanism) {
    case Mechanism::mcar: return mask_mcar(table, spec.p_miss, spec.seed);
    case Mechanism::mar: return mask_mar(table, spec);
    default: return mask_mnar(table, spec);
  }
}

double realized_rate(const EncodedTable& table, const BoolMask& mask) {
  long masked = 0, observed = 0;
  for (int i = 0; i < table.rows(); ++i)
    for (int j = 0; j < table.cols(); ++j) {
      if (!table.observed(i, j)) continue;
      ++observed;
      if (mask(i, j)) ++masked;
    }
  return observed > 0 ? static_cast<double>(masked) / observed : 0.0;
}

}  // namespace tabinr
