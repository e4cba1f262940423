#include "tabinr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tabinr {

NrmseReport nrmse(const EncodedTable& truth, const Matrix& imputed,
                  const BoolMask& eval_mask) {
  if (imputed.rows() != truth.rows() || imputed.cols() != truth.cols() ||
      eval_mask.rows() != truth.rows() || eval_mask.cols() != truth.cols())
    throw std::invalid_argument("nrmse: shape mismatch");

  NrmseReport rep;
  double nrmse_sum = 0, rmse_sum = 0;
  int used = 0;
  for (int j = 0; j < truth.cols(); ++j) {
    if (!truth.is_numeric[j]) continue;
    double se = 0;
    long cnt = 0;
    for (int i = 0; i < truth.rows(); ++i) {
      if (!eval_mask(i, j)) continue;
      double d = imputed(i, j) - truth.values(i, j);
      se += d * d;
      ++cnt;
    }
    if (cnt == 0) continue;
    double rmse = std::sqrt(se / cnt);

    // Population std over the full ground-truth column.
    double mean = truth.values.col(j).mean();
    double var = (truth.values.col(j).array() - mean).square().mean();
    double sd = std::sqrt(var);
    const std::string& name = truth.schema.columns[truth.col_of[j]].name;
    if (sd <= 0) {
      rep.skipped.push_back(name);
      continue;
    }
    rep.per_feature[name] = rmse / sd;
    nrmse_sum += rmse / sd;
    rmse_sum += rmse;
    ++used;
  }
  if (used > 0) {
    rep.mean = nrmse_sum / used;
    rep.rmse_mean = rmse_sum / used;
  }
  return rep;
}

std::optional<double> auroc_binary(const std::vector<double>& labels,
                                   const std::vector<double>& scores) {
  if (labels.size() != scores.size())
    throw std::invalid_argument("auroc: labels/scores length mismatch");
  const size_t n = labels.size();
  long pos = 0;
  for (double y : labels) {
    if (y != 0.0 && y != 1.0) throw std::invalid_argument("auroc: non-binary label");
    pos += y == 1.0;
  }
  long neg = static_cast<long>(n) - pos;
  if (pos == 0 || neg == 0) return std::nullopt;

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Midranks over tied score runs.
  std::vector<double> rank(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    double mid = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    i = j + 1;
  }
  double rank_pos = 0;
  for (size_t k = 0; k < n; ++k)
    if (labels[k] == 1.0) rank_pos += rank[k];
  double u = rank_pos - 0.5 * static_cast<double>(pos) * (pos + 1);
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

AurocReport auroc(const EncodedTable& truth, const Matrix& scores,
                  const BoolMask& eval_mask, AurocLevel level) {
  if (scores.rows() != truth.rows() || scores.cols() != truth.cols() ||
      eval_mask.rows() != truth.rows() || eval_mask.cols() != truth.cols())
    throw std::invalid_argument("auroc: shape mismatch");

  AurocReport rep;
  double total = 0;
  int valid = 0;
  double group_total = 0;
  int valid_groups = 0;
  for (int g = 0; g < truth.original_cols(); ++g) {
    const auto& group = truth.groups[g];
    if (truth.is_numeric[group.front()]) continue;
    double gsum = 0;
    int gvalid = 0;
    for (size_t k = 0; k < group.size(); ++k) {
      int j = group[k];
      std::vector<double> y, s;
      for (int i = 0; i < truth.rows(); ++i)
        if (eval_mask(i, j)) {
          y.push_back(truth.values(i, j));
          s.push_back(scores(i, j));
        }
      if (y.empty()) continue;
      auto a = auroc_binary(y, s);
      if (!a) continue;
      rep.per_component[truth.schema.columns[g].name + "=" +
                        truth.schema.columns[g].categories[k]] = *a;
      total += *a;
      ++valid;
      gsum += *a;
      ++gvalid;
    }
    if (gvalid > 0) {
      group_total += gsum / gvalid;
      ++valid_groups;
    }
  }
  if (level == AurocLevel::component) {
    if (valid > 0) rep.mean = total / valid;
  } else {
    if (valid_groups > 0) rep.mean = group_total / valid_groups;
  }
  return rep;
}

}  // namespace tabinr
