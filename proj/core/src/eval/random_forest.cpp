#include "mixstyle/eval/random_forest.hpp"

#include <algorithm>
#include <cmath>

#include "mixstyle/common/parallel.hpp"
#include "mixstyle/common/rng.hpp"

namespace mixstyle::evalm {

struct RandomForestBuilder {
  static int majority(const std::vector<int>& counts) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(counts.size()); ++c)
      if (counts[static_cast<size_t>(c)] > counts[static_cast<size_t>(best)]) best = c;
    return best;
  }

  static double gini(const std::vector<int>& counts, int total) {
    if (total == 0) return 0.0;
    double g = 1.0;
    for (int c : counts) {
      const double p = static_cast<double>(c) / total;
      g -= p * p;
    }
    return g;
  }

  // grows one node over rows[lo, hi); returns node index
  static int grow(std::vector<RandomForest::Node>& nodes, const CodeMatrix& x,
                  std::span<const int> y, int n_classes, int min_split, int feats_per_split,
                  std::vector<int>& rows, int lo, int hi, Rng& rng) {
    std::vector<int> counts(static_cast<size_t>(n_classes), 0);
    for (int i = lo; i < hi; ++i) counts[static_cast<size_t>(y[static_cast<size_t>(rows[static_cast<size_t>(i)])])]++;

    const int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();

    const bool pure = *std::max_element(counts.begin(), counts.end()) == hi - lo;
    if (pure || hi - lo < min_split) {
      nodes[static_cast<size_t>(node_id)].leaf_class = majority(counts);
      return node_id;
    }

    // sample sqrt(D) candidate features without replacement
    const int d = x.d;
    std::vector<int> feats;
    feats.reserve(static_cast<size_t>(feats_per_split));
    std::vector<int> pool(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) pool[static_cast<size_t>(i)] = i;
    for (int i = 0; i < feats_per_split && !pool.empty(); ++i) {
      const auto pick = static_cast<size_t>(rng.randint(static_cast<int64_t>(pool.size())));
      feats.push_back(pool[pick]);
      pool[pick] = pool.back();
      pool.pop_back();
    }

    double best_impurity = 1e300;
    int best_feat = -1;
    float best_thr = 0.0f;
    std::vector<std::pair<float, int>> vals;
    for (int f : feats) {
      vals.clear();
      for (int i = lo; i < hi; ++i) {
        const int r = rows[static_cast<size_t>(i)];
        vals.emplace_back(x.at(r, f), y[static_cast<size_t>(r)]);
      }
      std::sort(vals.begin(), vals.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      std::vector<int> left_counts(static_cast<size_t>(n_classes), 0);
      std::vector<int> right_counts = counts;
      const int total = hi - lo;
      for (int i = 0; i + 1 < total; ++i) {
        const int cls = vals[static_cast<size_t>(i)].second;
        left_counts[static_cast<size_t>(cls)]++;
        right_counts[static_cast<size_t>(cls)]--;
        if (vals[static_cast<size_t>(i)].first == vals[static_cast<size_t>(i + 1)].first) continue;
        const int nl = i + 1, nr = total - nl;
        const double imp = (nl * gini(left_counts, nl) + nr * gini(right_counts, nr)) / total;
        if (imp < best_impurity) {
          best_impurity = imp;
          best_feat = f;
          best_thr = 0.5f * (vals[static_cast<size_t>(i)].first + vals[static_cast<size_t>(i + 1)].first);
        }
      }
    }

    if (best_feat < 0) {  // every candidate feature is constant here
      nodes[static_cast<size_t>(node_id)].leaf_class = majority(counts);
      return node_id;
    }

    const auto mid = std::partition(rows.begin() + lo, rows.begin() + hi, [&](int r) {
      return x.at(r, best_feat) <= best_thr;
    });
    const int split = static_cast<int>(mid - rows.begin());
    if (split == lo || split == hi) {
      nodes[static_cast<size_t>(node_id)].leaf_class = majority(counts);
      return node_id;
    }

    nodes[static_cast<size_t>(node_id)].feature = best_feat;
    nodes[static_cast<size_t>(node_id)].threshold = best_thr;
    const int left = grow(nodes, x, y, n_classes, min_split, feats_per_split, rows, lo, split, rng);
    const int right = grow(nodes, x, y, n_classes, min_split, feats_per_split, rows, split, hi, rng);
    nodes[static_cast<size_t>(node_id)].left = left;
    nodes[static_cast<size_t>(node_id)].right = right;
    return node_id;
  }
};

void RandomForest::fit(const CodeMatrix& x, std::span<const int> y, int n_classes,
                       std::span<const int> sample_indices, int threads) {
  require(n_trees_ >= 1, "RandomForest: need at least one tree");
  require(!sample_indices.empty(), "RandomForest: empty training set");
  n_classes_ = n_classes;
  trees_.assign(static_cast<size_t>(n_trees_), {});

  const int feats_per_split = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(x.d)))));

  parallel_for(n_trees_, threads, [&](int64_t t) {
    Rng rng(mix_seed(seed_, static_cast<uint64_t>(t)));
    // bootstrap sample of the training rows
    std::vector<int> rows(sample_indices.size());
    for (size_t i = 0; i < sample_indices.size(); ++i)
      rows[i] = sample_indices[static_cast<size_t>(rng.randint(static_cast<int64_t>(sample_indices.size())))];
    auto& nodes = trees_[static_cast<size_t>(t)];
    nodes.reserve(2 * rows.size());
    RandomForestBuilder::grow(nodes, x, y, n_classes, min_samples_split_, feats_per_split, rows, 0,
                              static_cast<int>(rows.size()), rng);
  });
}

int RandomForest::predict(std::span<const float> features) const {
  require(!trees_.empty(), "RandomForest: predict before fit");
  std::vector<int> votes(static_cast<size_t>(n_classes_), 0);
  for (const auto& nodes : trees_) {
    int cur = 0;
    while (nodes[static_cast<size_t>(cur)].leaf_class < 0) {
      const auto& nd = nodes[static_cast<size_t>(cur)];
      cur = features[static_cast<size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    votes[static_cast<size_t>(nodes[static_cast<size_t>(cur)].leaf_class)]++;
  }
  return RandomForestBuilder::majority(votes);
}

}  // namespace mixstyle::evalm
