#pragma once

#include <cstdint>
#include <vector>

#include "tabinr/model.hpp"

namespace tabinr {

// An unseen row in the model's encoded/scaled space.
struct PartialRow {
  Eigen::VectorXd values;      // length m'
  std::vector<bool> observed;  // length m'

  void validate(const TabInrModel& model) const;
};

struct TtaConfig {
  double lr = 1e-2;
  int max_steps = 200;
  double plateau_tol = 1e-6;  // stop when best loss improves less than this
  int plateau_window = 10;    // ... over this many steps
  std::uint64_t seed = 0;
};

struct TtaResult {
  Eigen::VectorXd latent;  // fitted row embedding
  std::vector<double> loss_trace;
  int steps = 0;
  bool restarted = false;
};

// Fit a fresh row embedding on the row's observed cells; the network and
// feature embeddings stay untouched. Restarts once with a fresh seed on
// divergence.
TtaResult adapt_row(const TabInrModel& model, const PartialRow& row, const TtaConfig& config);

// Observed entries pass through; missing entries are predicted with the
// fitted embedding, unscaled and winner-takes-all decoded. Original units.
Eigen::VectorXd impute_row(const TabInrModel& model, const Eigen::VectorXd& latent,
                           const PartialRow& row);

}  // namespace tabinr
