#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabinr/table.hpp"

namespace tabinr {

struct NrmseReport {
  std::map<std::string, double> per_feature;  // numeric columns with >= 1 eval cell
  double mean = 0.0;
  double rmse_mean = 0.0;  // unnormalized, reported alongside
  std::vector<std::string> skipped;  // zero-std columns
};

// Per numeric column: RMSE over masked cells divided by the population std of
// the fully observed ground-truth column, in original units.
NrmseReport nrmse(const EncodedTable& truth, const Matrix& imputed,
                  const BoolMask& eval_mask);

struct AurocReport {
  std::map<std::string, double> per_component;  // "col=category"
  std::optional<double> mean;  // absent when no component is valid
};

enum class AurocLevel { component, group_one_vs_rest };

// Rank-based AUROC with midrank ties per one-hot component over masked cells;
// macro-averaged. Components without both classes are skipped.
AurocReport auroc(const EncodedTable& truth, const Matrix& scores,
                  const BoolMask& eval_mask, AurocLevel level = AurocLevel::component);

// Midrank AUROC of scores against binary labels; nullopt if one class absent.
std::optional<double> auroc_binary(const std::vector<double>& labels,
                                   const std::vector<double>& scores);

}  // namespace tabinr
