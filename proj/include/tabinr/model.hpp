#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tabinr/net.hpp"
#include "tabinr/table.hpp"

namespace tabinr {

enum class MaskingStrategy {
  holdout,              // static seeded validation split of observed cells
  per_epoch_corruption  // fresh seeded split every epoch
};

struct TrainConfig {
  int latent_dim = 32;
  int hidden_layers = 2;
  int hidden_units = 256;
  double dropout = 0.1;
  ActivationSpec activation{Activation::siren, 30.0, 8.0};
  double lr = 1e-3;
  double eta_min = 0.0;
  int epochs = 500;
  int batch_rows = 64;
  double masking_ratio = 0.3;  // validation-holdout fraction of observed cells
  MaskingStrategy masking_strategy = MaskingStrategy::holdout;
  int early_stop_patience = 20;
  // > 0: stop once the monitored per-epoch training loss falls below this;
  // the stopping model is returned as-is (capacity / overfit runs).
  double stop_train_loss = 0.0;
  std::uint64_t seed = 0;
};

// Shared net plus row / feature embedding tables and the table metadata
// needed to decode predictions back to original units.
struct TabInrModel {
  MlpNet net;
  Matrix row_embeddings;      // n x latent_dim
  Matrix feature_embeddings;  // m' x latent_dim
  int latent_dim = 0;

  TableSchema schema;
  std::vector<std::vector<int>> groups;
  std::vector<int> col_of;
  std::vector<bool> is_numeric;
  std::vector<std::optional<NumericScale>> scale;
  bool scaled = false;
  std::vector<std::uint64_t> row_ids, group_ids, col_ids;
  TrainConfig config;

  Eigen::Index rows() const { return row_embeddings.rows(); }
  Eigen::Index cols() const { return feature_embeddings.rows(); }
};

struct Cell {
  int row = 0;
  int col = 0;       // expanded column
  bool binary = false;
  double target = 0.0;
};

struct ModelGrads {
  NetGrads net;
  Matrix row_embeddings;
  Matrix feature_embeddings;

  static ModelGrads zeros_like(const TabInrModel& model);
};

// Raw network output for cell (i,j): scaled prediction for numeric columns,
// a logit for one-hot components.
double predict_cell(const TabInrModel& model, int i, int j);
Eigen::VectorXd predict_cells(const TabInrModel& model, const std::vector<Cell>& cells);

// Mean over cells of squared error (numeric) and BCE-with-logits (binary).
// Gradients, when requested, cover net parameters and both embedding tables.
double mixed_loss(const TabInrModel& model, const std::vector<Cell>& cells,
                  ModelGrads* grads = nullptr, bool train_mode = false,
                  std::mt19937_64* dropout_rng = nullptr);

struct TrainLog {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;
  int best_epoch = -1;
  double best_val = 0.0;
  bool early_stopped = false;
};

TabInrModel train(const EncodedTable& table, const TrainConfig& config,
                  TrainLog* log = nullptr);

// Observed cells pass through; masked numerics are unscaled predictions,
// masked categorical groups decoded winner-takes-all. Original units.
Matrix impute(const TabInrModel& model, const EncodedTable& table,
              const BoolMask& target_mask);

void save_model(const TabInrModel& model, const std::string& path);
TabInrModel load_model(const std::string& path);

// Train/validation cell split used by train(); exposed for tests.
void split_cells(const EncodedTable& table, const TrainConfig& config,
                 std::uint64_t epoch_key, std::vector<Cell>& train_cells,
                 std::vector<Cell>& val_cells);

}  // namespace tabinr
