#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <vector>

#include "mixstyle/common/error.hpp"

namespace mixstyle::nn {

// Dense tensor with an optional gradient buffer of identical shape.
// float is the training dtype; double is the verification path used by
// finite-difference checks and the receptive-field probe.
template <typename T>
struct TensorData {
  std::vector<int64_t> shape;
  std::vector<T> v;
  std::vector<T> g;
  bool requires_grad = false;

  int64_t numel() const {
    return std::accumulate(shape.begin(), shape.end(), int64_t{1}, std::multiplies<int64_t>());
  }

  void ensure_grad() {
    if (g.size() != v.size()) g.assign(v.size(), T(0));
  }

  void zero_grad() { std::fill(g.begin(), g.end(), T(0)); }
};

template <typename T>
using Var = std::shared_ptr<TensorData<T>>;

template <typename T>
Var<T> make_var(std::vector<int64_t> shape, bool requires_grad = false) {
  auto t = std::make_shared<TensorData<T>>();
  t->shape = std::move(shape);
  t->v.assign(static_cast<size_t>(t->numel()), T(0));
  t->requires_grad = requires_grad;
  if (requires_grad) t->ensure_grad();
  return t;
}

template <typename T>
Var<T> make_scalar(T value, bool requires_grad = false) {
  auto t = make_var<T>({1}, requires_grad);
  t->v[0] = value;
  return t;
}

// Reverse-mode tape. Ops append closures during the forward pass; backward
// runs them in reverse. One tape per graph; single-threaded per instance.
template <typename T>
class Tape {
 public:
  void record(std::function<void()> fn) { ops_.push_back(std::move(fn)); }

  void backward(const Var<T>& root) {
    require(root->numel() == 1, "backward: root must be a scalar");
    require(root->requires_grad, "backward: root does not require grad");
    root->ensure_grad();
    root->g[0] = T(1);
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
  }

  void clear() { ops_.clear(); }
  size_t size() const { return ops_.size(); }

 private:
  std::vector<std::function<void()>> ops_;
};

template <typename T>
bool rec(Tape<T>* tape, std::initializer_list<Var<T>> inputs) {
  if (tape == nullptr) return false;
  for (const auto& in : inputs)
    if (in && in->requires_grad) return true;
  return false;
}

template <typename T>
bool var_finite(const Var<T>& x) {
  for (T s : x->v)
    if (!std::isfinite(static_cast<double>(s))) return false;
  return true;
}

}  // namespace mixstyle::nn
