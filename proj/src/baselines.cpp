#include "tabinr/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tabinr {

namespace {

// Effective observedness: native missing and target-masked cells both count
// as missing so the imputer never peeks at held-out values.
inline bool eff_observed(const EncodedTable& t, const BoolMask& mask, int i, int j) {
  return t.observed(i, j) && !mask(i, j);
}

inline bool eff_group_observed(const EncodedTable& t, const BoolMask& mask, int i, int g) {
  int c = t.groups[g].front();
  return t.observed(i, c) && !mask(i, c);
}

int group_argmax(const EncodedTable& t, const Matrix& values, int i, int g) {
  const auto& group = t.groups[g];
  int best = 0;
  double best_v = values(i, group[0]);
  for (size_t k = 1; k < group.size(); ++k)
    if (values(i, group[k]) > best_v) {
      best_v = values(i, group[k]);
      best = static_cast<int>(k);
    }
  return best;
}

struct ColumnStats {
  double mean = 0.0;   // numeric
  int mode = 0;        // categorical: category index
  bool valid = false;
};

std::vector<ColumnStats> column_stats(const EncodedTable& t, const BoolMask& mask) {
  std::vector<ColumnStats> stats(t.original_cols());
  for (int g = 0; g < t.original_cols(); ++g) {
    const auto& group = t.groups[g];
    if (t.is_numeric[group.front()]) {
      double sum = 0;
      int cnt = 0;
      for (int i = 0; i < t.rows(); ++i)
        if (eff_observed(t, mask, i, group.front())) {
          sum += t.values(i, group.front());
          ++cnt;
        }
      if (cnt == 0)
        throw std::runtime_error("column '" + t.schema.columns[g].name +
                                 "' is fully missing");
      stats[g] = {sum / cnt, 0, true};
    } else {
      std::vector<int> counts(group.size(), 0);
      int total = 0;
      for (int i = 0; i < t.rows(); ++i)
        if (eff_group_observed(t, mask, i, g)) {
          ++counts[group_argmax(t, t.values, i, g)];
          ++total;
        }
      if (total == 0)
        throw std::runtime_error("column '" + t.schema.columns[g].name +
                                 "' is fully missing");
      int mode = static_cast<int>(std::max_element(counts.begin(), counts.end()) -
                                  counts.begin());  // tie -> lowest index
      stats[g] = {0.0, mode, true};
    }
  }
  return stats;
}

void fill_from_stats(const EncodedTable& t, Matrix& out, int i, int g,
                     const ColumnStats& s) {
  const auto& group = t.groups[g];
  if (t.is_numeric[group.front()]) {
    out(i, group.front()) = s.mean;
  } else {
    for (size_t k = 0; k < group.size(); ++k)
      out(i, group[k]) = k == static_cast<size_t>(s.mode) ? 1.0 : 0.0;
  }
}

}  // namespace

Matrix impute_mean_mode(const EncodedTable& table, const BoolMask& target_mask) {
  auto stats = column_stats(table, target_mask);
  Matrix out = table.values;
  for (int i = 0; i < table.rows(); ++i)
    for (int g = 0; g < table.original_cols(); ++g)
      if (!eff_group_observed(table, target_mask, i, g))
        fill_from_stats(table, out, i, g, stats[g]);
  return out;
}

Matrix impute_knn(const EncodedTable& table, const BoolMask& target_mask, int k) {
  if (k < 1) throw std::invalid_argument("impute_knn: k must be >= 1");
  auto stats = column_stats(table, target_mask);
  const int n = static_cast<int>(table.rows());
  const int m = table.original_cols();
  Matrix out = table.values;

  for (int a = 0; a < n; ++a) {
    // Columns this row needs.
    std::vector<int> missing;
    for (int g = 0; g < m; ++g)
      if (!eff_group_observed(table, target_mask, a, g)) missing.push_back(g);
    if (missing.empty()) continue;

    // Distances to every other row over co-observed columns.
    std::vector<std::pair<double, int>> dist;  // (distance, row)
    dist.reserve(n - 1);
    for (int b = 0; b < n; ++b) {
      if (b == a) continue;
      double acc = 0;
      int co = 0;
      for (int g = 0; g < m; ++g) {
        if (!eff_group_observed(table, target_mask, a, g) ||
            !eff_group_observed(table, target_mask, b, g))
          continue;
        ++co;
        if (table.is_numeric[table.groups[g].front()]) {
          double diff = table.values(a, table.groups[g].front()) -
                        table.values(b, table.groups[g].front());
          acc += diff * diff;
        } else if (group_argmax(table, table.values, a, g) !=
                   group_argmax(table, table.values, b, g)) {
          acc += 1.0;
        }
      }
      if (co == 0) continue;
      dist.emplace_back(std::sqrt(acc / co), b);
    }
    std::sort(dist.begin(), dist.end());  // ties -> lower row index

    for (int g : missing) {
      const auto& group = table.groups[g];
      if (table.is_numeric[group.front()]) {
        double sum = 0;
        int cnt = 0;
        for (const auto& [d, b] : dist) {
          if (!eff_group_observed(table, target_mask, b, g)) continue;
          sum += table.values(b, group.front());
          if (++cnt == k) break;
        }
        if (cnt == 0)
          fill_from_stats(table, out, a, g, stats[g]);
        else
          out(a, group.front()) = sum / cnt;
      } else {
        std::vector<int> counts(group.size(), 0);
        std::vector<int> donor_order;  // donor labels in nearness order
        int cnt = 0;
        for (const auto& [d, b] : dist) {
          if (!eff_group_observed(table, target_mask, b, g)) continue;
          int label = group_argmax(table, table.values, b, g);
          ++counts[label];
          donor_order.push_back(label);
          if (++cnt == k) break;
        }
        if (cnt == 0) {
          fill_from_stats(table, out, a, g, stats[g]);
          continue;
        }
        int best_count = *std::max_element(counts.begin(), counts.end());
        int winner = -1;
        for (int label : donor_order)
          if (counts[label] == best_count) {
            winner = label;
            break;
          }
        for (size_t kk = 0; kk < group.size(); ++kk)
          out(a, group[kk]) = kk == static_cast<size_t>(winner) ? 1.0 : 0.0;
      }
    }
  }
  return out;
}

}  // namespace tabinr
