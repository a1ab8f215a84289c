#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mixstyle/eval/disentanglement.hpp"

namespace mixstyle::evalm {

// Bagged CART classifier: Gini splits, sqrt(D) feature subsampling, grown to
// purity. Self-contained so the metric runs without external ML dependencies.
class RandomForest {
 public:
  RandomForest(int n_trees, uint64_t seed, int min_samples_split = 2)
      : n_trees_(n_trees), seed_(seed), min_samples_split_(min_samples_split) {}

  void fit(const CodeMatrix& x, std::span<const int> y, int n_classes,
           std::span<const int> sample_indices, int threads = 1);

  int predict(std::span<const float> features) const;

 private:
  struct Node {
    int feature = -1;
    float threshold = 0.0f;
    int left = -1, right = -1;
    int leaf_class = -1;
  };

  int n_trees_;
  uint64_t seed_;
  int min_samples_split_;
  int n_classes_ = 0;
  std::vector<std::vector<Node>> trees_;

  friend struct RandomForestBuilder;
};

}  // namespace mixstyle::evalm
