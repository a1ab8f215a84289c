#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixstyle/nn/tensor.hpp"

namespace mixstyle::nn {

// Versioned little-endian container: header (magic, version, tensor count),
// then per tensor (name length, name, dtype code, rank, dims, raw values).
// Unknown versions are rejected on load.

enum class CkptDtype : uint8_t { kF32 = 0, kF64 = 1, kU8 = 2 };

struct NamedTensor {
  std::string name;
  CkptDtype dtype = CkptDtype::kF32;
  std::vector<int64_t> shape;
  std::vector<unsigned char> bytes;
};

NamedTensor tensor_from_floats(const std::string& name, const std::vector<int64_t>& shape,
                               const std::vector<float>& values);
NamedTensor tensor_from_string(const std::string& name, const std::string& text);
std::vector<float> floats_from_tensor(const NamedTensor& t);
std::string string_from_tensor(const NamedTensor& t);

void save_checkpoint(const std::string& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_checkpoint(const std::string& path);

const NamedTensor& find_tensor(const std::vector<NamedTensor>& tensors, const std::string& name);

}  // namespace mixstyle::nn
