#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace tabinr {

enum class Activation { relu, siren, hosc };

struct ActivationSpec {
  Activation kind = Activation::siren;
  double omega0 = 30.0;  // siren / hosc frequency
  double beta = 8.0;     // hosc sharpness
};

Activation activation_from_string(const std::string& s);
std::string activation_to_string(Activation a);

// Scalar-output MLP: depth hidden layers of hidden_dim units, linear head.
struct MlpNet {
  std::vector<Eigen::MatrixXd> weights;  // layer l: out x in
  std::vector<Eigen::VectorXd> biases;
  ActivationSpec activation;
  double dropout_rate = 0.0;

  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int layer_count() const { return static_cast<int>(weights.size()); }
  std::size_t parameter_count() const;
};

// SIREN gets the standard sine init (first layer U[-1/fan_in, 1/fan_in],
// later layers U[+-sqrt(6/fan_in)/omega0]); ReLU/HOSC get He-uniform.
MlpNet init_net(int input_dim, int hidden_dim, int depth, ActivationSpec activation,
                double dropout_rate, std::uint64_t seed);

struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;    // input to each layer, B x in_l
  std::vector<Eigen::MatrixXd> preacts;   // hidden layers, B x out_l
  std::vector<Eigen::MatrixXd> drop_keep; // inverted-dropout multipliers
  bool train_mode = false;
};

struct NetGrads {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static NetGrads zeros_like(const MlpNet& net);
};

// Batched forward over rows of X (B x input_dim) -> B outputs. The cache is
// required for backward; rng is consumed only when train_mode and dropout > 0.
Eigen::VectorXd forward(const MlpNet& net, const Eigen::MatrixXd& X,
                        ForwardCache* cache, bool train_mode, std::mt19937_64* rng);

// Single-sample convenience wrapper.
double forward_one(const MlpNet& net, const Eigen::VectorXd& x,
                   ForwardCache* cache = nullptr, bool train_mode = false,
                   std::mt19937_64* rng = nullptr);

// Reverse mode: dY is dL/d(output) per batch row; parameter grads are
// accumulated into `grads`; returns dL/dX (B x input_dim).
Eigen::MatrixXd backward(const MlpNet& net, const ForwardCache& cache,
                         const Eigen::VectorXd& dY, NetGrads& grads);

}  // namespace tabinr
