#include "mixstyle/eval/disentanglement.hpp"

#include <algorithm>
#include <cmath>

#include "mixstyle/common/rng.hpp"
#include "mixstyle/eval/random_forest.hpp"

namespace mixstyle::evalm {

void FactorMatrix::validate() const {
  require(n >= 2 && k >= 1, "FactorMatrix: need n >= 2 samples and k >= 1 factors");
  require(static_cast<int>(values.size()) == n * k, "FactorMatrix: size mismatch");
  require(static_cast<int>(cardinality.size()) == k, "FactorMatrix: cardinality size mismatch");
  for (int i = 0; i < n; ++i)
    for (int f = 0; f < k; ++f)
      require(at(i, f) >= 0 && at(i, f) < cardinality[static_cast<size_t>(f)],
              "FactorMatrix: value outside cardinality");
}

void CodeMatrix::validate() const {
  require(n >= 2 && d >= 1, "CodeMatrix: need n >= 2 samples and d >= 1 dims");
  require(static_cast<int>(values.size()) == n * d, "CodeMatrix: size mismatch");
  for (float v : values) require(std::isfinite(v), "CodeMatrix: non-finite code");
}

std::vector<int> equal_frequency_bins(const std::vector<float>& column, int bins) {
  require(bins >= 2, "equal_frequency_bins: need at least 2 bins");
  const int n = static_cast<int>(column.size());
  std::vector<float> sorted = column;
  std::sort(sorted.begin(), sorted.end());

  // quantile edges; duplicates collapse so ties never straddle a boundary
  std::vector<float> edges;
  for (int b = 1; b < bins; ++b) {
    const float e = sorted[static_cast<size_t>(static_cast<int64_t>(b) * n / bins)];
    if (edges.empty() || e > edges.back()) edges.push_back(e);
  }

  std::vector<int> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), column[static_cast<size_t>(i)]);
    out[static_cast<size_t>(i)] = static_cast<int>(it - edges.begin());
  }
  return out;
}

double mutual_information(const std::vector<int>& code_bins, const std::vector<int>& factor,
                          int n_code_bins, int n_factor_values) {
  require(code_bins.size() == factor.size(), "mutual_information: length mismatch");
  const int n = static_cast<int>(code_bins.size());
  std::vector<int> joint(static_cast<size_t>(n_code_bins) * n_factor_values, 0);
  std::vector<int> pc(static_cast<size_t>(n_code_bins), 0), pf(static_cast<size_t>(n_factor_values), 0);
  for (int i = 0; i < n; ++i) {
    joint[static_cast<size_t>(code_bins[static_cast<size_t>(i)]) * n_factor_values + factor[static_cast<size_t>(i)]]++;
    pc[static_cast<size_t>(code_bins[static_cast<size_t>(i)])]++;
    pf[static_cast<size_t>(factor[static_cast<size_t>(i)])]++;
  }
  double mi = 0.0;
  for (int c = 0; c < n_code_bins; ++c) {
    for (int f = 0; f < n_factor_values; ++f) {
      const int cnt = joint[static_cast<size_t>(c) * n_factor_values + f];
      if (cnt == 0) continue;
      const double pxy = static_cast<double>(cnt) / n;
      const double px = static_cast<double>(pc[static_cast<size_t>(c)]) / n;
      const double py = static_cast<double>(pf[static_cast<size_t>(f)]) / n;
      mi += pxy * std::log(pxy / (px * py));
    }
  }
  return std::max(mi, 0.0);
}

double entropy_nats(const std::vector<int>& values, int n_values) {
  std::vector<int> counts(static_cast<size_t>(n_values), 0);
  for (int v : values) counts[static_cast<size_t>(v)]++;
  double h = 0.0;
  for (int c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(values.size());
    h -= p * std::log(p);
  }
  return h;
}

double dcimig(const CodeMatrix& codes, const FactorMatrix& factors, int bins) {
  codes.validate();
  factors.validate();
  require(codes.n == factors.n, "dcimig: sample count mismatch");

  std::vector<std::vector<int>> factor_cols(static_cast<size_t>(factors.k));
  double entropy_sum = 0.0;
  for (int f = 0; f < factors.k; ++f) {
    auto& col = factor_cols[static_cast<size_t>(f)];
    col.resize(static_cast<size_t>(factors.n));
    for (int i = 0; i < factors.n; ++i) col[static_cast<size_t>(i)] = factors.at(i, f);
    const double h = entropy_nats(col, factors.cardinality[static_cast<size_t>(f)]);
    require(h > 0.0, "dcimig: constant factor column (zero entropy)");
    entropy_sum += h;
  }

  std::vector<double> factor_gap(static_cast<size_t>(factors.k), 0.0);
  std::vector<float> column(static_cast<size_t>(codes.n));
  for (int dim = 0; dim < codes.d; ++dim) {
    for (int i = 0; i < codes.n; ++i) column[static_cast<size_t>(i)] = codes.at(i, dim);
    const auto binned = equal_frequency_bins(column, bins);
    const int n_bins = *std::max_element(binned.begin(), binned.end()) + 1;

    double best = -1.0, second = -1.0;
    int best_f = -1;
    for (int f = 0; f < factors.k; ++f) {
      const double mi = mutual_information(binned, factor_cols[static_cast<size_t>(f)], n_bins,
                                           factors.cardinality[static_cast<size_t>(f)]);
      if (mi > best) {
        second = best;
        best = mi;
        best_f = f;
      } else if (mi > second) {
        second = mi;
      }
    }
    const double gap = factors.k >= 2 ? best - second : best;
    factor_gap[static_cast<size_t>(best_f)] = std::max(factor_gap[static_cast<size_t>(best_f)], gap);
  }

  double total = 0.0;
  for (double g : factor_gap) total += g;
  return std::clamp(total / entropy_sum, 0.0, 1.0);
}

ExplicitnessResult dci_rf_explicitness(const CodeMatrix& codes, const FactorMatrix& factors,
                                       int seeds, int forest_size, uint64_t base_seed,
                                       int threads) {
  codes.validate();
  factors.validate();
  require(codes.n == factors.n, "dci_rf_explicitness: sample count mismatch");
  require(seeds >= 1, "dci_rf_explicitness: need at least one seed");

  ExplicitnessResult result;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(mix_seed(base_seed, static_cast<uint64_t>(s)));
    double factor_acc = 0.0;

    for (int f = 0; f < factors.k; ++f) {
      const int classes = factors.cardinality[static_cast<size_t>(f)];
      std::vector<int> y(static_cast<size_t>(factors.n));
      for (int i = 0; i < factors.n; ++i) y[static_cast<size_t>(i)] = factors.at(i, f);

      // stratified 70/30 split over the classes that actually occur
      std::vector<std::vector<int>> per_class(static_cast<size_t>(classes));
      for (int i = 0; i < factors.n; ++i) per_class[static_cast<size_t>(y[static_cast<size_t>(i)])].push_back(i);
      std::vector<int> train_idx, test_idx;
      int present = 0;
      for (auto& rows : per_class) {
        if (rows.empty()) continue;
        require(rows.size() >= 2, "dci_rf_explicitness: class with fewer than 2 samples");
        ++present;
        for (size_t i = rows.size() - 1; i > 0; --i)
          std::swap(rows[i], rows[static_cast<size_t>(rng.randint(static_cast<int64_t>(i + 1)))]);
        const size_t n_train = std::max<size_t>(1, (rows.size() * 7) / 10);
        for (size_t i = 0; i < rows.size(); ++i)
          (i < n_train ? train_idx : test_idx).push_back(rows[i]);
      }
      require(present >= 2 && !test_idx.empty(), "dci_rf_explicitness: degenerate split");

      RandomForest forest(forest_size, mix_seed(base_seed, static_cast<uint64_t>(s), static_cast<uint64_t>(f)));
      forest.fit(codes, y, classes, train_idx, threads);

      // balanced accuracy: mean per-class recall
      std::vector<int> correct(static_cast<size_t>(classes), 0), total(static_cast<size_t>(classes), 0);
      std::vector<float> row(static_cast<size_t>(codes.d));
      for (int i : test_idx) {
        for (int j = 0; j < codes.d; ++j) row[static_cast<size_t>(j)] = codes.at(i, j);
        const int pred = forest.predict(row);
        total[static_cast<size_t>(y[static_cast<size_t>(i)])]++;
        if (pred == y[static_cast<size_t>(i)]) correct[static_cast<size_t>(y[static_cast<size_t>(i)])]++;
      }
      double balanced = 0.0;
      int tested = 0;
      for (int c = 0; c < classes; ++c) {
        if (total[static_cast<size_t>(c)] == 0) continue;
        balanced += static_cast<double>(correct[static_cast<size_t>(c)]) / total[static_cast<size_t>(c)];
        ++tested;
      }
      balanced /= std::max(tested, 1);
      const double chance = 1.0 / std::max(present, 2);
      factor_acc += std::clamp((balanced - chance) / (1.0 - chance), 0.0, 1.0);
    }
    result.per_seed.push_back(factor_acc / factors.k);
  }

  double mean = 0.0;
  for (double v : result.per_seed) mean += v;
  mean /= result.per_seed.size();
  double var = 0.0;
  for (double v : result.per_seed) var += (v - mean) * (v - mean);
  var /= result.per_seed.size();
  result.mean = mean;
  result.stddev = std::sqrt(var);
  return result;
}

}  // namespace mixstyle::evalm
