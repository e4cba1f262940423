#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace tabinr {

struct CosineSchedule {
  double base_lr = 1e-3;
  double eta_min = 0.0;
  long t_max = 1;

  double lr(long t) const;
};

// Flat view over one named parameter tensor and its gradient.
struct ParamRef {
  std::string name;
  double* value = nullptr;
  const double* grad = nullptr;
  Eigen::Index size = 0;

  template <typename Derived>
  static ParamRef of(std::string name, Eigen::PlainObjectBase<Derived>& value,
                     const Eigen::PlainObjectBase<Derived>& grad) {
    return ParamRef{std::move(name), value.data(), grad.data(), value.size()};
  }
};

class Adam {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // Rejects the whole step (no parameter touched) on a non-finite gradient,
  // throwing with the offending parameter's name.
  void step(const std::vector<ParamRef>& params, double lr);

  long step_count() const { return step_; }
  void reset() { m_.clear(); v_.clear(); step_ = 0; }

 private:
  double beta1_, beta2_, eps_;
  long step_ = 0;
  std::vector<Eigen::ArrayXd> m_, v_;
};

}  // namespace tabinr
