#include "tabinr/net.hpp"

#include <cmath>
#include <stdexcept>

#include "tabinr/rng.hpp"

namespace tabinr {

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "siren") return Activation::siren;
  if (s == "hosc") return Activation::hosc;
  throw std::invalid_argument("unknown activation: " + s);
}

std::string activation_to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::siren: return "siren";
    default: return "hosc";
  }
}

std::size_t MlpNet::parameter_count() const {
  std::size_t n = 0;
  for (size_t l = 0; l < weights.size(); ++l)
    n += static_cast<std::size_t>(weights[l].size()) + biases[l].size();
  return n;
}

NetGrads NetGrads::zeros_like(const MlpNet& net) {
  NetGrads g;
  for (size_t l = 0; l < net.weights.size(); ++l) {
    g.weights.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    g.biases.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
  }
  return g;
}

MlpNet init_net(int input_dim, int hidden_dim, int depth, ActivationSpec activation,
                double dropout_rate, std::uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 1 || depth < 1)
    throw std::invalid_argument("init_net: invalid dimensions");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    throw std::invalid_argument("init_net: dropout_rate outside [0,1)");
  MlpNet net;
  net.activation = activation;
  net.dropout_rate = dropout_rate;
  std::vector<int> dims{input_dim};
  for (int l = 0; l < depth; ++l) dims.push_back(hidden_dim);
  dims.push_back(1);

  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const bool head = l + 2 == dims.size();  // linear output, no sine follows
    double bound;
    if (activation.kind == Activation::siren && !head) {
      bound = l == 0 ? 1.0 / fan_in : std::sqrt(6.0 / fan_in) / activation.omega0;
    } else {
      bound = std::sqrt(6.0 / fan_in);  // He-uniform
    }
    auto gen = rng::engine(seed, "net.layer", l);
    std::uniform_real_distribution<double> unif(-bound, bound);
    Eigen::MatrixXd W(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) W(r, c) = unif(gen);
    net.weights.push_back(std::move(W));
    net.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return net;
}

namespace {

void apply_activation(const ActivationSpec& act, const Eigen::MatrixXd& z,
                      Eigen::MatrixXd& out) {
  switch (act.kind) {
    case Activation::relu:
      out = z.cwiseMax(0.0);
      break;
    case Activation::siren:
      out = (act.omega0 * z.array()).sin();
      break;
    case Activation::hosc:
      out = (act.beta * (act.omega0 * z.array()).sin()).tanh();
      break;
  }
}

Eigen::MatrixXd activation_grad(const ActivationSpec& act, const Eigen::MatrixXd& z) {
  switch (act.kind) {
    case Activation::relu:
      return (z.array() > 0.0).cast<double>();
    case Activation::siren:
      return act.omega0 * (act.omega0 * z.array()).cos();
    default: {  // d/dz tanh(beta sin(w0 z)) = beta w0 cos(w0 z) sech^2
      Eigen::ArrayXXd t = (act.beta * (act.omega0 * z.array()).sin()).tanh();
      return act.beta * act.omega0 * (act.omega0 * z.array()).cos() * (1.0 - t * t);
    }
  }
}

}  // namespace

Eigen::VectorXd forward(const MlpNet& net, const Eigen::MatrixXd& X,
                        ForwardCache* cache, bool train_mode, std::mt19937_64* rng) {
  if (X.cols() != net.input_dim())
    throw std::invalid_argument("forward: input dim mismatch");
  if (!X.allFinite()) throw std::invalid_argument("forward: non-finite input");
  const bool dropping = train_mode && net.dropout_rate > 0.0;
  if (dropping && rng == nullptr)
    throw std::invalid_argument("forward: dropout requires an rng in train mode");

  if (cache) {
    cache->inputs.clear();
    cache->preacts.clear();
    cache->drop_keep.clear();
    cache->train_mode = train_mode;
  }
  Eigen::MatrixXd h = X;
  const int L = net.layer_count();
  for (int l = 0; l < L; ++l) {
    if (cache) cache->inputs.push_back(h);
    Eigen::MatrixXd z = (h * net.weights[l].transpose()).rowwise() +
                        net.biases[l].transpose();
    if (l == L - 1) {
      h = std::move(z);
      break;
    }
    if (cache) cache->preacts.push_back(z);
    apply_activation(net.activation, z, h);
    if (dropping) {
      const double keep = 1.0 - net.dropout_rate;
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      Eigen::MatrixXd keep_mask(h.rows(), h.cols());
      for (Eigen::Index r = 0; r < h.rows(); ++r)
        for (Eigen::Index c = 0; c < h.cols(); ++c)
          keep_mask(r, c) = unif(*rng) < keep ? 1.0 / keep : 0.0;
      h.array() *= keep_mask.array();
      if (cache) cache->drop_keep.push_back(std::move(keep_mask));
    } else if (cache) {
      cache->drop_keep.push_back(Eigen::MatrixXd());
    }
  }
  return h.col(0);
}

double forward_one(const MlpNet& net, const Eigen::VectorXd& x, ForwardCache* cache,
                   bool train_mode, std::mt19937_64* rng) {
  return forward(net, x.transpose(), cache, train_mode, rng)(0);
}

Eigen::MatrixXd backward(const MlpNet& net, const ForwardCache& cache,
                         const Eigen::VectorXd& dY, NetGrads& grads) {
  const int L = net.layer_count();
  if (static_cast<int>(cache.inputs.size()) != L)
    throw std::invalid_argument("backward: cache does not match net");
  if (cache.inputs.front().rows() != dY.size())
    throw std::invalid_argument("backward: gradient batch size mismatch");

  Eigen::MatrixXd delta = dY;  // B x out_l of current layer
  for (int l = L - 1; l >= 0; --l) {
    grads.weights[l].noalias() += delta.transpose() * cache.inputs[l];
    grads.biases[l] += delta.colwise().sum().transpose();
    Eigen::MatrixXd dX = delta * net.weights[l];
    if (l == 0) return dX;
    // Through the previous hidden layer's dropout and activation.
    if (cache.drop_keep[l - 1].size() > 0) dX.array() *= cache.drop_keep[l - 1].array();
    delta = dX.array() * activation_grad(net.activation, cache.preacts[l - 1]).array();
  }
  return delta;  // unreachable
}

}  // namespace tabinr
