#include "tabinr/optim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tabinr {

double CosineSchedule::lr(long t) const {
  if (t_max <= 0 || t >= t_max) return eta_min;
  double phase = std::numbers::pi * static_cast<double>(t) / static_cast<double>(t_max);
  return eta_min + 0.5 * (base_lr - eta_min) * (1.0 + std::cos(phase));
}

void Adam::step(const std::vector<ParamRef>& params, double lr) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Eigen::ArrayXd::Zero(p.size));
      v_.push_back(Eigen::ArrayXd::Zero(p.size));
    }
  }
  if (m_.size() != params.size())
    throw std::runtime_error("adam: parameter set changed between steps");
  for (const auto& p : params) {
    Eigen::Map<const Eigen::ArrayXd> g(p.grad, p.size);
    if (!g.isFinite().all())
      throw std::runtime_error("adam: non-finite gradient for parameter '" + p.name + "'");
  }

  ++step_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (size_t i = 0; i < params.size(); ++i) {
    Eigen::Map<const Eigen::ArrayXd> g(params[i].grad, params[i].size);
    Eigen::Map<Eigen::ArrayXd> w(params[i].value, params[i].size);
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
    w -= lr * (m_[i] / bc1) / ((v_[i] / bc2).sqrt() + eps_);
  }
}

}  // namespace tabinr
