#include "tabinr/tta.hpp"

#include <cmath>
#include <stdexcept>

#include "tabinr/optim.hpp"
#include "tabinr/rng.hpp"

namespace tabinr {

namespace {

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double bce_logits(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

// One optimization run; returns false on divergence.
bool fit(const TabInrModel& model, const std::vector<Cell>& cells, const TtaConfig& config,
         std::uint64_t init_key, TtaResult& out) {
  const int d = model.latent_dim;
  const int B = static_cast<int>(cells.size());

  Eigen::VectorXd latent(d);
  {
    auto gen = rng::engine(config.seed, "tta.init", init_key);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k = 0; k < d; ++k) latent(k) = normal(gen);
  }

  Eigen::MatrixXd C(B, d);  // frozen feature embeddings for the observed cells
  for (int b = 0; b < B; ++b) C.row(b) = model.feature_embeddings.row(cells[b].col);

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(d);
  Adam adam;
  std::vector<ParamRef> params{ParamRef::of("lambda_new", latent, grad)};
  NetGrads scratch = NetGrads::zeros_like(model.net);

  out.loss_trace.clear();
  double best = std::numeric_limits<double>::infinity();
  int since_improve = 0;
  const double inv_b = 1.0 / B;

  for (int step = 0; step < config.max_steps; ++step) {
    Eigen::MatrixXd X(B, 2 * d);
    X.leftCols(d) = latent.transpose().replicate(B, 1);
    X.rightCols(d) = C;
    ForwardCache cache;
    Eigen::VectorXd y = forward(model.net, X, &cache, false, nullptr);

    double loss = 0.0;
    Eigen::VectorXd dY(B);
    for (int b = 0; b < B; ++b) {
      if (cells[b].binary) {
        loss += inv_b * bce_logits(y(b), cells[b].target);
        dY(b) = inv_b * (sigmoid(y(b)) - cells[b].target);
      } else {
        double err = y(b) - cells[b].target;
        loss += inv_b * err * err;
        dY(b) = inv_b * 2.0 * err;
      }
    }
    if (!std::isfinite(loss)) return false;
    out.loss_trace.push_back(loss);
    out.steps = step + 1;

    if (best - loss > config.plateau_tol) {
      since_improve = 0;
    } else if (++since_improve >= config.plateau_window) {
      break;
    }
    best = std::min(best, loss);

    scratch = NetGrads::zeros_like(model.net);
    Eigen::MatrixXd dX = backward(model.net, cache, dY, scratch);
    grad = dX.leftCols(d).colwise().sum().transpose();
    adam.step(params, config.lr);
    if (!latent.allFinite()) return false;
  }
  out.latent = latent;
  return true;
}

}  // namespace

void PartialRow::validate(const TabInrModel& model) const {
  if (values.size() != model.cols() || static_cast<Eigen::Index>(observed.size()) != model.cols())
    throw std::invalid_argument("partial row shape does not match model");
  int n_obs = 0;
  for (bool o : observed) n_obs += o;
  if (n_obs == 0) throw std::invalid_argument("partial row has no observed cells");
  for (Eigen::Index j = 0; j < values.size(); ++j)
    if (observed[j] && !std::isfinite(values(j)))
      throw std::invalid_argument("partial row has non-finite observed value");
  for (size_t g = 0; g < model.groups.size(); ++g) {
    const auto& group = model.groups[g];
    if (model.is_numeric[group.front()]) continue;
    if (!observed[group.front()]) continue;
    double sum = 0.0;
    for (int c : group) {
      double v = values(c);
      if (v != 0.0 && v != 1.0)
        throw std::invalid_argument("observed one-hot group has non-binary entries");
      sum += v;
    }
    if (sum != 1.0) throw std::invalid_argument("observed one-hot group does not sum to 1");
  }
}

TtaResult adapt_row(const TabInrModel& model, const PartialRow& row, const TtaConfig& config) {
  row.validate(model);
  std::vector<Cell> cells;
  for (Eigen::Index j = 0; j < row.values.size(); ++j)
    if (row.observed[j])
      cells.push_back(Cell{0, static_cast<int>(j), !model.is_numeric[j], row.values(j)});

  TtaResult out;
  if (fit(model, cells, config, 0, out)) return out;
  out.restarted = true;
  if (fit(model, cells, config, 1, out)) return out;
  throw std::runtime_error("adapt_row: optimization diverged twice");
}

Eigen::VectorXd impute_row(const TabInrModel& model, const Eigen::VectorXd& latent,
                           const PartialRow& row) {
  row.validate(model);
  if (latent.size() != model.latent_dim)
    throw std::invalid_argument("impute_row: latent dim mismatch");

  const int d = model.latent_dim;
  Eigen::VectorXd completed = row.values;
  for (Eigen::Index j = 0; j < completed.size(); ++j) {
    if (row.observed[j]) continue;
    Eigen::VectorXd x(2 * d);
    x << latent, model.feature_embeddings.row(j).transpose();
    completed(j) = forward_one(model.net, x);
  }
  for (size_t g = 0; g < model.groups.size(); ++g) {
    const auto& group = model.groups[g];
    if (model.is_numeric[group.front()] || row.observed[group.front()]) continue;
    int best = 0;
    double best_v = completed(group[0]);
    for (size_t k = 1; k < group.size(); ++k)
      if (completed(group[k]) > best_v) {
        best_v = completed(group[k]);
        best = static_cast<int>(k);
      }
    for (size_t k = 0; k < group.size(); ++k)
      completed(group[k]) = k == static_cast<size_t>(best) ? 1.0 : 0.0;
  }
  if (model.scaled) {
    for (Eigen::Index j = 0; j < completed.size(); ++j) {
      if (!model.is_numeric[j]) continue;
      const auto& s = *model.scale[j];
      double range = s.max - s.min;
      completed(j) = range > 0 ? completed(j) * range + s.min : s.min;
    }
  }
  return completed;
}

}  // namespace tabinr
