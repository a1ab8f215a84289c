#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mixstyle/nn/tensor.hpp"

namespace mixstyle::nn {

struct GradCheckEntry {
  std::string name;
  double max_rel_err;
};

// Central finite differences (h = 1e-3) against reverse-mode gradients on
// the 64-bit path, one entry per layer/composite. Includes the subvector
// NT-Xent head and the full multi-scale spectral loss.
std::vector<GradCheckEntry> gradcheck_suite();

// Max relative error over every coordinate of every input that requires
// grad. loss_fn must rebuild its graph from the inputs on each call.
double gradcheck_case(
    const std::function<Var<double>(Tape<double>*, const std::vector<Var<double>>&)>& loss_fn,
    const std::vector<Var<double>>& inputs, double h = 1e-3);

}  // namespace mixstyle::nn
