#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tabinr/model.hpp"
#include "tabinr/baselines.hpp"
#include "tabinr/metrics.hpp"
#include "tabinr/missingness.hpp"
#include "tabinr/rng.hpp"
#include "tabinr/synthetic.hpp"

using namespace tabinr;

namespace {

TabInrModel tiny_model(const EncodedTable& table, int latent, std::uint64_t seed,
                       Activation act = Activation::siren) {
  TrainConfig cfg;
  cfg.latent_dim = latent;
  cfg.hidden_layers = 1;
  cfg.hidden_units = 8;
  cfg.dropout = 0.0;
  cfg.activation = ActivationSpec{act, 30.0, 8.0};
  cfg.epochs = 0;
  cfg.seed = seed;
  return train(table, cfg);
}

std::vector<Cell> all_observed_cells(const EncodedTable& t) {
  std::vector<Cell> cells;
  for (auto [i, j] : observed_pairs(t))
    cells.push_back(Cell{i, j, !t.is_numeric[j], t.values(i, j)});
  return cells;
}

}  // namespace

TEST_CASE("predict_cell composes net and embeddings") {
  auto t = synth_correlated_gaussian(6, 3, 1);
  auto model = tiny_model(t, 4, 3);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 3; ++j) {
      Eigen::VectorXd x(8);
      x << model.row_embeddings.row(i).transpose(),
          model.feature_embeddings.row(j).transpose();
      CHECK(predict_cell(model, i, j) ==
            doctest::Approx(forward_one(model.net, x)).epsilon(1e-12));
    }
  CHECK_THROWS(predict_cell(model, 6, 0));
  CHECK_THROWS(predict_cell(model, 0, 3));
}

TEST_CASE("zero-parameter net predicts zero; identical embeddings agree") {
  auto t = synth_correlated_gaussian(4, 3, 2);
  auto model = tiny_model(t, 4, 5);
  for (auto& w : model.net.weights) w.setZero();
  for (auto& b : model.net.biases) b.setZero();
  CHECK(predict_cell(model, 1, 2) == 0.0);

  auto model2 = tiny_model(t, 4, 5);
  model2.row_embeddings.row(1) = model2.row_embeddings.row(0);
  for (int j = 0; j < 3; ++j)
    CHECK(predict_cell(model2, 0, j) == predict_cell(model2, 1, j));
}

TEST_CASE("mixed loss closed forms") {
  auto t = synth_correlated_gaussian(4, 2, 3);
  auto model = tiny_model(t, 3, 7);

  // Perfect numeric predictions: target the model's own outputs.
  std::vector<Cell> cells;
  for (int i = 0; i < 4; ++i)
    cells.push_back(Cell{i, 0, false, predict_cell(model, i, 0)});
  CHECK(mixed_loss(model, cells) == doctest::Approx(0.0).epsilon(1e-15));

  // Binary y=1 at logit 0 costs ln 2.
  for (auto& w : model.net.weights) w.setZero();
  for (auto& b : model.net.biases) b.setZero();
  std::vector<Cell> bin{Cell{0, 0, true, 1.0}};
  CHECK(mixed_loss(model, bin) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  CHECK_THROWS(mixed_loss(model, {}));
  std::vector<Cell> bad{Cell{0, 0, true, 0.5}};
  CHECK_THROWS(mixed_loss(model, bad));
}

TEST_CASE("mixed loss gradients match finite differences on a 4x3 toy table") {
  auto t = synth_logistic_categorical(4, 2, 1, 2, 9);  // 4 rows, 2 numeric + 1 binary group
  for (auto act : {Activation::relu, Activation::siren, Activation::hosc}) {
    auto model = tiny_model(t, 3, 11, act);
    auto cells = all_observed_cells(t);
    ModelGrads grads = ModelGrads::zeros_like(model);
    mixed_loss(model, cells, &grads);

    const double h = 1e-6;
    double max_rel = 0.0;
    auto fd_check = [&](double analytic, double* p) {
      double orig = *p;
      *p = orig + h;
      double up = mixed_loss(model, cells);
      *p = orig - h;
      double dn = mixed_loss(model, cells);
      *p = orig;
      double fd = (up - dn) / (2 * h);
      double denom = std::max({std::abs(fd), std::abs(analytic), 1e-6});
      max_rel = std::max(max_rel, std::abs(fd - analytic) / denom);
    };
    for (size_t l = 0; l < model.net.weights.size(); ++l) {
      for (int k = 0; k < model.net.weights[l].size(); ++k)
        fd_check(grads.net.weights[l].data()[k], model.net.weights[l].data() + k);
      for (int k = 0; k < model.net.biases[l].size(); ++k)
        fd_check(grads.net.biases[l].data()[k], model.net.biases[l].data() + k);
    }
    for (int k = 0; k < model.row_embeddings.size(); ++k)
      fd_check(grads.row_embeddings.data()[k], model.row_embeddings.data() + k);
    for (int k = 0; k < model.feature_embeddings.size(); ++k)
      fd_check(grads.feature_embeddings.data()[k], model.feature_embeddings.data() + k);
    CHECK(max_rel < 1e-4);
  }
}

TEST_CASE("epochs = 0 returns the initialized model") {
  auto t = synth_correlated_gaussian(10, 4, 4);
  TrainLog log;
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.latent_dim = 4;
  cfg.hidden_units = 8;
  cfg.hidden_layers = 1;
  cfg.seed = 2;
  auto model = train(t, cfg, &log);
  CHECK(log.train_loss.empty());
  CHECK(model.rows() == 10);
  // Embeddings standard normal: spread should be near 1.
  double sd = std::sqrt(model.row_embeddings.array().square().mean());
  CHECK(sd > 0.5);
  CHECK(sd < 1.5);
}

TEST_CASE("training overfits a small fully observed table") {
  auto raw = synth_rank1(30, 5, 6, 0.0);
  auto t = fit_scaling(raw);
  TrainConfig cfg;
  cfg.latent_dim = 8;
  cfg.hidden_layers = 1;
  cfg.hidden_units = 64;
  cfg.dropout = 0.0;
  cfg.activation = ActivationSpec{Activation::relu, 30.0, 8.0};
  cfg.lr = 1e-2;
  cfg.epochs = 1000;
  cfg.batch_rows = 30;
  cfg.early_stop_patience = 1000;
  cfg.seed = 3;
  TrainLog log;
  auto model = train(t, cfg, &log);
  std::vector<Cell> train_cells, val_cells;
  split_cells(t, cfg, 0, train_cells, val_cells);
  CHECK(mixed_loss(model, train_cells) < 5e-3);
  CHECK(log.best_val <= log.val_loss.front());
}

TEST_CASE("training never reads unobserved cells") {
  auto raw = synth_rank1(20, 4, 8, 0.0);
  auto masked = apply_mask(raw, mask_mcar(raw, 0.3, 5).mask);
  auto t = fit_scaling(masked);
  // Poison everything unobserved; any read would propagate NaN.
  for (int i = 0; i < t.rows(); ++i)
    for (int j = 0; j < t.cols(); ++j)
      if (!t.observed(i, j)) t.values(i, j) = std::numeric_limits<double>::quiet_NaN();
  TrainConfig cfg;
  cfg.latent_dim = 4;
  cfg.hidden_layers = 1;
  cfg.hidden_units = 16;
  cfg.dropout = 0.0;
  cfg.epochs = 20;
  cfg.seed = 4;
  TrainLog log;
  auto model = train(t, cfg, &log);
  for (double v : log.train_loss) CHECK(std::isfinite(v));
  CHECK(model.row_embeddings.allFinite());
}

TEST_CASE("impute passes observed cells through and decodes ties to index 0") {
  auto raw = synth_logistic_categorical(10, 2, 1, 3, 12);
  auto t = fit_scaling(raw);
  auto model = tiny_model(t, 4, 6);

  BoolMask empty = BoolMask::Constant(t.rows(), t.cols(), false);
  Matrix out = impute(model, t, empty);
  CHECK(out == unscale(t, t.values));

  // Zero net: all logits tie at 0, winner-takes-all picks the first category.
  for (auto& w : model.net.weights) w.setZero();
  for (auto& b : model.net.biases) b.setZero();
  BoolMask mask = BoolMask::Constant(t.rows(), t.cols(), false);
  for (int c : t.groups[2]) mask(0, c) = true;
  Matrix out2 = impute(model, t, mask);
  CHECK(out2(0, t.groups[2][0]) == 1.0);
  CHECK(out2(0, t.groups[2][1]) == 0.0);
  CHECK(out2(0, t.groups[2][2]) == 0.0);
}

TEST_CASE("imputation recovers rank-1 structure far better than the mean") {
  auto raw = synth_rank1(120, 6, 21, 0.005);
  auto pair = mask_mcar(raw, 0.3, 33);
  auto masked = apply_mask(raw, pair.mask);
  auto t = fit_scaling(masked);

  // Tiny net + hot lr: row embeddings get ~1 Adam step per epoch, so small
  // tables need many epochs and large steps to generalize.
  TrainConfig cfg;
  cfg.latent_dim = 2;
  cfg.hidden_layers = 1;
  cfg.hidden_units = 16;
  cfg.dropout = 0.0;
  cfg.activation = ActivationSpec{Activation::relu, 30.0, 8.0};
  cfg.lr = 3e-2;
  cfg.epochs = 4000;
  cfg.batch_rows = 64;
  cfg.masking_ratio = 0.1;
  cfg.early_stop_patience = 4000;
  cfg.seed = 5;
  auto model = train(t, cfg);
  Matrix inr = impute(model, t, pair.mask);
  Matrix mean = impute_mean_mode(masked, BoolMask::Constant(t.rows(), t.cols(), false));

  double inr_nrmse = nrmse(raw, inr, pair.mask).mean;
  double mean_nrmse = nrmse(raw, mean, pair.mask).mean;
  CHECK(inr_nrmse < 0.15);
  CHECK(inr_nrmse < 0.5 * mean_nrmse);
}

TEST_CASE("checkpoint round trip is exact") {
  auto t = fit_scaling(synth_logistic_categorical(8, 2, 1, 3, 14));
  auto model = tiny_model(t, 4, 9);
  auto path = std::filesystem::temp_directory_path() / "tabinr_test.ckpt";
  save_model(model, path.string());
  auto loaded = load_model(path.string());
  for (int i = 0; i < t.rows(); ++i)
    for (int j = 0; j < t.cols(); ++j)
      CHECK(predict_cell(loaded, i, j) == predict_cell(model, i, j));
  CHECK(loaded.scaled == model.scaled);
  CHECK(loaded.groups == model.groups);
  CHECK(loaded.config.seed == model.config.seed);

  // Size tracks 8 bytes per parameter plus a bounded header.
  std::size_t params = model.net.parameter_count() +
                       static_cast<std::size_t>(model.row_embeddings.size()) +
                       static_cast<std::size_t>(model.feature_embeddings.size());
  auto bytes = std::filesystem::file_size(path);
  CHECK(bytes >= params * 8);
  CHECK(bytes <= params * 8 + 8192);

  // Corrupt magic is rejected.
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.put('X');
  }
  CHECK_THROWS(load_model(path.string()));
  std::filesystem::remove(path);
}

TEST_CASE("truncated checkpoint is rejected") {
  auto t = fit_scaling(synth_rank1(6, 3, 1, 0.0));
  auto model = tiny_model(t, 3, 2);
  auto path = std::filesystem::temp_directory_path() / "tabinr_trunc.ckpt";
  save_model(model, path.string());
  auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 64);
  CHECK_THROWS(load_model(path.string()));
  std::filesystem::remove(path);
}

TEST_CASE("permutation-aware training is exactly equivariant") {
  auto raw = synth_logistic_categorical(40, 3, 2, 3, 18);
  auto t = fit_scaling(raw);
  TrainConfig cfg;
  cfg.latent_dim = 4;
  cfg.hidden_layers = 1;
  cfg.hidden_units = 16;
  cfg.dropout = 0.1;
  cfg.epochs = 15;
  cfg.batch_rows = 16;
  cfg.seed = 6;
  auto base = train(t, cfg);

  // Permute original columns and rows, retrain, compare through identities.
  std::vector<int> cperm{4, 2, 0, 3, 1};
  std::vector<int> rperm(40);
  for (int i = 0; i < 40; ++i) rperm[i] = (i * 7 + 3) % 40;
  auto perm_table = permute_rows(permute_columns(t, cperm), rperm);
  auto perm = train(perm_table, cfg);

  for (int pi = 0; pi < 40; ++pi)
    for (int pj = 0; pj < static_cast<int>(perm_table.cols()); ++pj) {
      int oi = static_cast<int>(perm_table.row_ids[pi]);
      int oj = static_cast<int>(perm_table.col_ids[pj]);
      CHECK(predict_cell(perm, pi, pj) ==
            doctest::Approx(predict_cell(base, oi, oj)).epsilon(1e-12));
    }
}
