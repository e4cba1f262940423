#include "tabinr/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "tabinr/optim.hpp"
#include "tabinr/rng.hpp"

namespace tabinr {

namespace {

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// BCE with logits in the overflow-safe form.
double bce_logits(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

std::vector<ParamRef> model_params(TabInrModel& model, ModelGrads& grads) {
  std::vector<ParamRef> params;
  for (size_t l = 0; l < model.net.weights.size(); ++l) {
    params.push_back(ParamRef::of("net.w" + std::to_string(l), model.net.weights[l],
                                  grads.net.weights[l]));
    params.push_back(ParamRef::of("net.b" + std::to_string(l), model.net.biases[l],
                                  grads.net.biases[l]));
  }
  params.push_back(ParamRef::of("row_embeddings", model.row_embeddings, grads.row_embeddings));
  params.push_back(
      ParamRef::of("feature_embeddings", model.feature_embeddings, grads.feature_embeddings));
  return params;
}

struct Snapshot {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Matrix rows, features;
};

Snapshot take_snapshot(const TabInrModel& m) {
  return {m.net.weights, m.net.biases, m.row_embeddings, m.feature_embeddings};
}

void restore_snapshot(TabInrModel& m, const Snapshot& s) {
  m.net.weights = s.weights;
  m.net.biases = s.biases;
  m.row_embeddings = s.rows;
  m.feature_embeddings = s.features;
}

}  // namespace

ModelGrads ModelGrads::zeros_like(const TabInrModel& model) {
  ModelGrads g;
  g.net = NetGrads::zeros_like(model.net);
  g.row_embeddings = Matrix::Zero(model.row_embeddings.rows(), model.row_embeddings.cols());
  g.feature_embeddings =
      Matrix::Zero(model.feature_embeddings.rows(), model.feature_embeddings.cols());
  return g;
}

double predict_cell(const TabInrModel& model, int i, int j) {
  if (i < 0 || i >= model.rows() || j < 0 || j >= model.cols())
    throw std::out_of_range("predict_cell: index out of range");
  Eigen::VectorXd x(2 * model.latent_dim);
  x << model.row_embeddings.row(i).transpose(), model.feature_embeddings.row(j).transpose();
  return forward_one(model.net, x);
}

Eigen::VectorXd predict_cells(const TabInrModel& model, const std::vector<Cell>& cells) {
  const int d = model.latent_dim;
  Eigen::VectorXd out(cells.size());
  constexpr size_t kChunk = 8192;
  for (size_t start = 0; start < cells.size(); start += kChunk) {
    size_t count = std::min(kChunk, cells.size() - start);
    Eigen::MatrixXd X(count, 2 * d);
    for (size_t b = 0; b < count; ++b) {
      const Cell& c = cells[start + b];
      X.row(b) << model.row_embeddings.row(c.row), model.feature_embeddings.row(c.col);
    }
    out.segment(start, count) = forward(model.net, X, nullptr, false, nullptr);
  }
  return out;
}

double mixed_loss(const TabInrModel& model, const std::vector<Cell>& cells,
                  ModelGrads* grads, bool train_mode, std::mt19937_64* dropout_rng) {
  if (cells.empty()) throw std::invalid_argument("mixed_loss: empty cell set");
  const int d = model.latent_dim;
  const double inv_n = 1.0 / static_cast<double>(cells.size());
  double loss = 0.0;
  constexpr size_t kChunk = 4096;
  for (size_t start = 0; start < cells.size(); start += kChunk) {
    size_t count = std::min(kChunk, cells.size() - start);
    Eigen::MatrixXd X(count, 2 * d);
    for (size_t b = 0; b < count; ++b) {
      const Cell& c = cells[start + b];
      if (c.binary && c.target != 0.0 && c.target != 1.0)
        throw std::invalid_argument("mixed_loss: binary cell label outside {0,1}");
      X.row(b) << model.row_embeddings.row(c.row), model.feature_embeddings.row(c.col);
    }
    ForwardCache cache;
    Eigen::VectorXd y =
        forward(model.net, X, grads ? &cache : nullptr, train_mode, dropout_rng);
    Eigen::VectorXd dY(count);
    for (size_t b = 0; b < count; ++b) {
      const Cell& c = cells[start + b];
      if (c.binary) {
        loss += inv_n * bce_logits(y(b), c.target);
        dY(b) = inv_n * (sigmoid(y(b)) - c.target);
      } else {
        double err = y(b) - c.target;
        loss += inv_n * err * err;
        dY(b) = inv_n * 2.0 * err;
      }
    }
    if (grads) {
      Eigen::MatrixXd dX = backward(model.net, cache, dY, grads->net);
      for (size_t b = 0; b < count; ++b) {
        const Cell& c = cells[start + b];
        grads->row_embeddings.row(c.row) += dX.row(b).head(d);
        grads->feature_embeddings.row(c.col) += dX.row(b).tail(d);
      }
    }
  }
  return loss;
}

void split_cells(const EncodedTable& table, const TrainConfig& config,
                 std::uint64_t epoch_key, std::vector<Cell>& train_cells,
                 std::vector<Cell>& val_cells) {
  train_cells.clear();
  val_cells.clear();
  std::uint64_t split_seed =
      config.masking_strategy == MaskingStrategy::holdout
          ? rng::derive(config.seed, "split.holdout")
          : rng::derive(config.seed, "split.epoch", epoch_key);

  struct Keyed {
    std::uint64_t rid, cid;
    Cell cell;
    bool val;
  };
  std::vector<Keyed> keyed;
  for (int i = 0; i < table.rows(); ++i)
    for (int j = 0; j < table.cols(); ++j) {
      if (!table.observed(i, j)) continue;
      std::uint64_t rid = table.row_ids[i];
      std::uint64_t gid = table.group_ids[table.col_of[j]];
      bool val = rng::uniform_at(split_seed, "split", rid, gid) < config.masking_ratio;
      keyed.push_back({rid, table.col_ids[j],
                       Cell{i, j, !table.is_numeric[j], table.values(i, j)}, val});
    }
  // Identity order keeps the cell stream permutation-invariant.
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return a.rid != b.rid ? a.rid < b.rid : a.cid < b.cid;
  });
  for (auto& k : keyed) (k.val ? val_cells : train_cells).push_back(k.cell);
}

TabInrModel train(const EncodedTable& table, const TrainConfig& config, TrainLog* log) {
  if (config.latent_dim < 1 || config.hidden_layers < 1 || config.hidden_units < 1 ||
      config.batch_rows < 1 || config.epochs < 0)
    throw std::invalid_argument("train: invalid config");
  if (config.masking_ratio <= 0.0 || config.masking_ratio >= 1.0)
    throw std::invalid_argument("train: masking_ratio outside (0,1)");

  const int n = static_cast<int>(table.rows());
  const int mp = static_cast<int>(table.cols());
  const int d = config.latent_dim;

  TabInrModel model;
  model.latent_dim = d;
  model.schema = table.schema;
  model.groups = table.groups;
  model.col_of = table.col_of;
  model.is_numeric = table.is_numeric;
  model.scale = table.scale;
  model.scaled = table.scaled;
  model.row_ids = table.row_ids;
  model.group_ids = table.group_ids;
  model.col_ids = table.col_ids;
  model.config = config;
  model.net = init_net(2 * d, config.hidden_units, config.hidden_layers, config.activation,
                       config.dropout, rng::derive(config.seed, "net"));

  // Embeddings drawn per original identity, so a permuted table trains to a
  // permuted copy of the same model.
  model.row_embeddings = Matrix(n, d);
  for (int i = 0; i < n; ++i) {
    auto gen = rng::engine(config.seed, "row_embed", table.row_ids[i]);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k = 0; k < d; ++k) model.row_embeddings(i, k) = normal(gen);
  }
  model.feature_embeddings = Matrix(mp, d);
  for (int j = 0; j < mp; ++j) {
    auto gen = rng::engine(config.seed, "feat_embed", table.col_ids[j]);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k = 0; k < d; ++k) model.feature_embeddings(j, k) = normal(gen);
  }

  std::vector<Cell> train_cells, val_cells;
  split_cells(table, config, 0, train_cells, val_cells);
  if (train_cells.empty() && val_cells.empty())
    throw std::runtime_error("train: table has no observed cells");
  if (config.epochs == 0) return model;
  if (train_cells.empty() || val_cells.empty())
    throw std::runtime_error("train: all observed cells landed in one split");

  // Per-row train cells, keyed by original row id and sorted by column id.
  std::unordered_map<std::uint64_t, std::vector<Cell>> cells_of_rid;
  for (const Cell& c : train_cells) cells_of_rid[table.row_ids[c.row]].push_back(c);

  std::vector<std::uint64_t> rids = table.row_ids;
  std::sort(rids.begin(), rids.end());
  const long batches_per_epoch = (n + config.batch_rows - 1) / config.batch_rows;
  CosineSchedule schedule{config.lr, config.eta_min,
                          static_cast<long>(config.epochs) * batches_per_epoch};
  Adam adam;
  ModelGrads grads = ModelGrads::zeros_like(model);
  std::vector<ParamRef> params = model_params(model, grads);

  double best_val = std::numeric_limits<double>::infinity();
  Snapshot best = take_snapshot(model);
  int best_epoch = -1, since_best = 0;
  long t = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.masking_strategy == MaskingStrategy::per_epoch_corruption) {
      split_cells(table, config, static_cast<std::uint64_t>(epoch), train_cells, val_cells);
      cells_of_rid.clear();
      for (const Cell& c : train_cells) cells_of_rid[table.row_ids[c.row]].push_back(c);
      if (train_cells.empty() || val_cells.empty())
        throw std::runtime_error("train: all observed cells landed in one split");
    }

    std::vector<std::uint64_t> order = rids;
    auto shuffle_rng = rng::engine(config.seed, "shuffle", static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss = 0.0;
    long epoch_batches = 0;
    for (long b = 0; b < batches_per_epoch; ++b) {
      long lo = b * config.batch_rows;
      long hi = std::min<long>(lo + config.batch_rows, n);
      std::vector<std::uint64_t> batch_rids(order.begin() + lo, order.begin() + hi);
      std::sort(batch_rids.begin(), batch_rids.end());
      std::vector<Cell> batch;
      for (std::uint64_t rid : batch_rids) {
        auto it = cells_of_rid.find(rid);
        if (it != cells_of_rid.end())
          batch.insert(batch.end(), it->second.begin(), it->second.end());
      }
      double lr = schedule.lr(t);
      ++t;
      if (batch.empty()) continue;

      // Zero in place: ParamRef holds raw pointers into these tensors.
      for (size_t l = 0; l < grads.net.weights.size(); ++l) {
        grads.net.weights[l].setZero();
        grads.net.biases[l].setZero();
      }
      grads.row_embeddings.setZero();
      grads.feature_embeddings.setZero();
      auto drop_rng = rng::engine(config.seed, "dropout", static_cast<std::uint64_t>(epoch),
                                  static_cast<std::uint64_t>(b));
      double loss = mixed_loss(model, batch, &grads, true, &drop_rng);
      if (!std::isfinite(loss))
        throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch));
      adam.step(params, lr);
      epoch_loss += loss;
      ++epoch_batches;
    }

    double val = mixed_loss(model, val_cells);
    if (!std::isfinite(val))
      throw std::runtime_error("train: validation loss diverged at epoch " +
                               std::to_string(epoch));
    if (log) {
      log->train_loss.push_back(epoch_batches > 0 ? epoch_loss / epoch_batches : 0.0);
      log->val_loss.push_back(val);
    }
    if (val < best_val) {
      best_val = val;
      best = take_snapshot(model);
      best_epoch = epoch;
      since_best = 0;
    } else if (++since_best > config.early_stop_patience) {
      if (log) log->early_stopped = true;
      break;
    }

    // Optional target stop on the monitored training loss (batch mean, with
    // dropout active). The model that reached the target is returned, not the
    // best-val one.
    if (config.stop_train_loss > 0.0 && epoch_batches > 0 &&
        epoch_loss / epoch_batches < config.stop_train_loss) {
      best_val = std::min(best_val, val);
      best = take_snapshot(model);
      best_epoch = epoch;
      break;
    }
  }

  restore_snapshot(model, best);
  if (log) {
    log->best_epoch = best_epoch;
    log->best_val = best_val;
  }
  return model;
}

Matrix impute(const TabInrModel& model, const EncodedTable& table,
              const BoolMask& target_mask) {
  if (table.rows() != model.rows() || table.cols() != model.cols())
    throw std::runtime_error("impute: table shape does not match model");
  if (target_mask.rows() != table.rows() || target_mask.cols() != table.cols())
    throw std::runtime_error("impute: mask shape mismatch");

  Matrix completed = table.values;
  std::vector<Cell> wanted;
  for (int i = 0; i < table.rows(); ++i)
    for (int j = 0; j < table.cols(); ++j)
      if (target_mask(i, j)) wanted.push_back(Cell{i, j, !table.is_numeric[j], 0.0});
  Eigen::VectorXd preds = predict_cells(model, wanted);
  for (size_t k = 0; k < wanted.size(); ++k)
    completed(wanted[k].row, wanted[k].col) = preds(k);

  // Winner-takes-all per masked one-hot group; ties go to the lowest index.
  for (int i = 0; i < table.rows(); ++i)
    for (int g = 0; g < table.original_cols(); ++g) {
      const auto& group = table.groups[g];
      if (table.is_numeric[group.front()]) continue;
      if (!target_mask(i, group.front())) continue;
      int best = 0;
      double best_v = completed(i, group[0]);
      for (size_t k = 1; k < group.size(); ++k)
        if (completed(i, group[k]) > best_v) {
          best_v = completed(i, group[k]);
          best = static_cast<int>(k);
        }
      for (size_t k = 0; k < group.size(); ++k)
        completed(i, group[k]) = k == static_cast<size_t>(best) ? 1.0 : 0.0;
    }

  if (!completed.allFinite()) throw std::runtime_error("impute: non-finite imputation");
  return table.scaled ? unscale(table, completed) : completed;
}

namespace {

constexpr char kMagic[10] = {'t', 'a', 'b', 'i', 'n', 'r', '-', 'v', '1', '\0'};

void write_tensor(std::ostream& out, const double* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
}

void read_tensor(std::istream& in, double* data, std::size_t count) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw std::runtime_error("checkpoint truncated");
}

// Row-major on disk regardless of Eigen's storage order.
void write_matrix(std::ostream& out, const Matrix& m) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  write_tensor(out, rm.data(), static_cast<std::size_t>(rm.size()));
}

Matrix read_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
  read_tensor(in, rm.data(), static_cast<std::size_t>(rm.size()));
  return rm;
}

}  // namespace

void save_model(const TabInrModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);

  nlohmann::json meta;
  meta["latent_dim"] = model.latent_dim;
  meta["n"] = model.rows();
  meta["m_expanded"] = model.cols();
  meta["activation"] = {{"kind", activation_to_string(model.net.activation.kind)},
                        {"omega0", model.net.activation.omega0},
                        {"beta", model.net.activation.beta}};
  meta["dropout"] = model.net.dropout_rate;
  std::vector<std::array<long, 2>> layer_dims;
  for (const auto& w : model.net.weights)
    layer_dims.push_back({static_cast<long>(w.rows()), static_cast<long>(w.cols())});
  meta["layers"] = layer_dims;
  // Stored as a string: column order matters and plain json reorders keys.
  meta["schema"] = schema_to_json(model.schema);
  meta["groups"] = model.groups;
  meta["scaled"] = model.scaled;
  nlohmann::json scales = nlohmann::json::array();
  for (const auto& s : model.scale)
    scales.push_back(s ? nlohmann::json{{"min", s->min}, {"max", s->max}} : nlohmann::json());
  meta["scale"] = scales;
  meta["row_ids"] = model.row_ids;
  meta["group_ids"] = model.group_ids;
  meta["col_ids"] = model.col_ids;
  meta["config"] = {{"latent_dim", model.config.latent_dim},
                    {"hidden_layers", model.config.hidden_layers},
                    {"hidden_units", model.config.hidden_units},
                    {"dropout", model.config.dropout},
                    {"activation", activation_to_string(model.config.activation.kind)},
                    {"omega0", model.config.activation.omega0},
                    {"beta", model.config.activation.beta},
                    {"lr", model.config.lr},
                    {"eta_min", model.config.eta_min},
                    {"epochs", model.config.epochs},
                    {"batch_rows", model.config.batch_rows},
                    {"masking_ratio", model.config.masking_ratio},
                    {"masking_strategy",
                     model.config.masking_strategy == MaskingStrategy::holdout
                         ? "holdout"
                         : "per_epoch_corruption"},
                    {"early_stop_patience", model.config.early_stop_patience},
                    {"stop_train_loss", model.config.stop_train_loss},
                    {"seed", model.config.seed}};
  std::string meta_str = meta.dump();

  out.write(kMagic, sizeof(kMagic));
  std::uint64_t len = meta_str.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(meta_str.data(), static_cast<std::streamsize>(meta_str.size()));
  for (size_t l = 0; l < model.net.weights.size(); ++l) {
    write_matrix(out, model.net.weights[l]);
    write_tensor(out, model.net.biases[l].data(),
                 static_cast<std::size_t>(model.net.biases[l].size()));
  }
  write_matrix(out, model.row_embeddings);
  write_matrix(out, model.feature_embeddings);
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

TabInrModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a tabinr-v1 checkpoint: " + path);
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in) throw std::runtime_error("checkpoint truncated");
  std::string meta_str(len, '\0');
  in.read(meta_str.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("checkpoint truncated");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_str);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("checkpoint metadata corrupt: ") + e.what());
  }

  TabInrModel model;
  model.latent_dim = meta.at("latent_dim").get<int>();
  model.schema = schema_from_json(meta.at("schema").get<std::string>());
  model.groups = meta.at("groups").get<std::vector<std::vector<int>>>();
  model.scaled = meta.at("scaled").get<bool>();
  model.row_ids = meta.at("row_ids").get<std::vector<std::uint64_t>>();
  model.group_ids = meta.at("group_ids").get<std::vector<std::uint64_t>>();
  model.col_ids = meta.at("col_ids").get<std::vector<std::uint64_t>>();
  for (size_t g = 0; g < model.groups.size(); ++g)
    for (int c : model.groups[g]) {
      (void)c;
      model.col_of.push_back(static_cast<int>(g));
      model.is_numeric.push_back(model.schema.columns[g].kind == ColumnKind::numeric);
    }
  for (const auto& s : meta.at("scale")) {
    if (s.is_null())
      model.scale.push_back(std::nullopt);
    else
      model.scale.push_back(NumericScale{s.at("min").get<double>(), s.at("max").get<double>()});
  }
  const auto& cfg = meta.at("config");
  model.config.latent_dim = cfg.at("latent_dim").get<int>();
  model.config.hidden_layers = cfg.at("hidden_layers").get<int>();
  model.config.hidden_units = cfg.at("hidden_units").get<int>();
  model.config.dropout = cfg.at("dropout").get<double>();
  model.config.activation.kind = activation_from_string(cfg.at("activation").get<std::string>());
  model.config.activation.omega0 = cfg.at("omega0").get<double>();
  model.config.activation.beta = cfg.at("beta").get<double>();
  model.config.lr = cfg.at("lr").get<double>();
  model.config.eta_min = cfg.at("eta_min").get<double>();
  model.config.epochs = cfg.at("epochs").get<int>();
  model.config.batch_rows = cfg.at("batch_rows").get<int>();
  model.config.masking_ratio = cfg.at("masking_ratio").get<double>();
  model.config.masking_strategy = cfg.at("masking_strategy").get<std::string>() == "holdout"
                                      ? MaskingStrategy::holdout
                                      : MaskingStrategy::per_epoch_corruption;
  model.config.early_stop_patience = cfg.at("early_stop_patience").get<int>();
  model.config.stop_train_loss = cfg.value("stop_train_loss", 0.0);
  model.config.seed = cfg.at("seed").get<std::uint64_t>();

  model.net.activation.kind =
      activation_from_string(meta.at("activation").at("kind").get<std::string>());
  model.net.activation.omega0 = meta.at("activation").at("omega0").get<double>();
  model.net.activation.beta = meta.at("activation").at("beta").get<double>();
  model.net.dropout_rate = meta.at("dropout").get<double>();
  for (const auto& dims : meta.at("layers")) {
    long r = dims[0].get<long>(), c = dims[1].get<long>();
    model.net.weights.push_back(read_matrix(in, r, c));
    Eigen::VectorXd b(r);
    read_tensor(in, b.data(), static_cast<std::size_t>(r));
    model.net.biases.push_back(std::move(b));
  }
  long n = meta.at("n").get<long>(), mp = meta.at("m_expanded").get<long>();
  model.row_embeddings = read_matrix(in, n, model.latent_dim);
  model.feature_embeddings = read_matrix(in, mp, model.latent_dim);
  return model;
}

}  // namespace tabinr
