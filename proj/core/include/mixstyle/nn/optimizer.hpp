#pragma once

#include <cmath>
#include <vector>

#include "mixstyle/nn/tensor.hpp"

namespace mixstyle::nn {

// lr(t) = base_lr * 0.5 * (1 + cos(pi t / T)), no restart.
struct CosineSchedule {
  double base_lr = 2e-4;
  int64_t total_steps = 1;

  double lr_at(int64_t step) const {
    require(total_steps >= 1, "CosineSchedule: total_steps must be >= 1");
    require(step >= 0 && step <= total_steps, "CosineSchedule: step out of [0, T]");
    return base_lr * 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(step) / static_cast<double>(total_steps)));
  }
};

// Bias-corrected Adam. A non-finite gradient rejects the whole step and
// reports it through the return value; parameters are untouched.
template <typename T>
class Adam {
 public:
  explicit Adam(std::vector<Var<T>> params, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
    slots_.resize(params_.size());
    for (size_t i = 0; i < params_.size(); ++i) {
      params_[i]->ensure_grad();
      slots_[i].m.assign(params_[i]->v.size(), T(0));
      slots_[i].v.assign(params_[i]->v.size(), T(0));
    }
  }

  bool step(double lr) {
    for (const auto& p : params_) {
      for (T gi : p->g)
        if (!std::isfinite(static_cast<double>(gi))) return false;
    }
    ++step_count_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
    for (size_t i = 0; i < params_.size(); ++i) {
      auto& p = *params_[i];
      auto& s = slots_[i];
      for (size_t j = 0; j < p.v.size(); ++j) {
        const double gj = static_cast<double>(p.g[j]);
        const double mj = beta1_ * static_cast<double>(s.m[j]) + (1.0 - beta1_) * gj;
        const double vj = beta2_ * static_cast<double>(s.v[j]) + (1.0 - beta2_) * gj * gj;
        s.m[j] = static_cast<T>(mj);
        s.v[j] = static_cast<T>(vj);
        const double mhat = mj / bc1;
        const double vhat = vj / bc2;
        p.v[j] = static_cast<T>(static_cast<double>(p.v[j]) - lr * mhat / (std::sqrt(vhat) + eps_));
      }
    }
    return true;
  }

  void zero_grad() {
    for (auto& p : params_) p->zero_grad();
  }

  int64_t step_count() const { return step_count_; }
  const std::vector<Var<T>>& params() const { return params_; }

 private:
  struct Slot {
    std::vector<T> m, v;
  };
  std::vector<Var<T>> params_;
  std::vector<Slot> slots_;
  int64_t step_count_ = 0;
  double beta1_, beta2_, eps_;
};

}  // namespace mixstyle::nn
