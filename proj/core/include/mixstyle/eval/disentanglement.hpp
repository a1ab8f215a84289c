#pragma once

#include <vector>

#include "mixstyle/common/error.hpp"

namespace mixstyle::evalm {

// N samples x K discrete factors; factor k identifies the FX-parameter
// configuration along axis k.
struct FactorMatrix {
  int n = 0, k = 0;
  std::vector<int> values;       // n*k, row-major
  std::vector<int> cardinality;  // per factor

  int at(int i, int f) const { return values[static_cast<size_t>(i) * k + f]; }
  void validate() const;
};

struct CodeMatrix {
  int n = 0, d = 0;
  std::vector<float> values;  // n*d, row-major

  float at(int i, int j) const { return values[static_cast<size_t>(i) * d + j]; }
  void validate() const;
};

// Equal-frequency discretization of one code dimension; ties collapse bins.
std::vector<int> equal_frequency_bins(const std::vector<float>& column, int bins);

// Mutual information (nats) between a discretized code column and a factor.
double mutual_information(const std::vector<int>& code_bins, const std::vector<int>& factor,
                          int n_code_bins, int n_factor_values);

double entropy_nats(const std::vector<int>& values, int n_values);

// Per code dimension, the gap between its best and second-best factor MI is
// credited to the best factor; each factor keeps its largest credited gap;
// score = sum of gaps / sum of factor entropies, clamped to [0, 1].
double dcimig(const CodeMatrix& codes, const FactorMatrix& factors, int bins = 20);

struct ExplicitnessResult {
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> per_seed;
};

// Random-forest explicitness: per factor, balanced test accuracy of a
// forest on a stratified 70/30 split, rescaled so chance -> 0, perfect -> 1;
// mean over factors, reported mean +/- std over `seeds` runs.
ExplicitnessResult dci_rf_explicitness(const CodeMatrix& codes, const FactorMatrix& factors,
                                       int seeds = 4, int forest_size = 20, uint64_t base_seed = 1,
                                       int threads = 1);

}  // namespace mixstyle::evalm
