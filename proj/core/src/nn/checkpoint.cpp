#include "mixstyle/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace mixstyle::nn {

namespace {

constexpr uint32_t kMagic = 0x4b43584d;  // "MXCK"
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::vector<unsigned char>& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

template <typename T>
T get(const std::vector<unsigned char>& in, size_t& pos) {
  require(pos + sizeof(T) <= in.size(), "checkpoint: truncated file");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

size_t dtype_size(CkptDtype d) {
  switch (d) {
    case CkptDtype::kF32: return 4;
    case CkptDtype::kF64: return 8;
    case CkptDtype::kU8: return 1;
  }
  throw Error("checkpoint: bad dtype");
}

}  // namespace

NamedTensor tensor_from_floats(const std::string& name, const std::vector<int64_t>& shape,
                               const std::vector<float>& values) {
  NamedTensor t;
  t.name = name;
  t.dtype = CkptDtype::kF32;
  t.shape = shape;
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  require(n == static_cast<int64_t>(values.size()), "tensor_from_floats: shape/value mismatch");
  t.bytes.resize(values.size() * 4);
  std::memcpy(t.bytes.data(), values.data(), t.bytes.size());
  return t;
}

NamedTensor tensor_from_string(const std::string& name, const std::string& text) {
  NamedTensor t;
  t.name = name;
  t.dtype = CkptDtype::kU8;
  t.shape = {static_cast<int64_t>(text.size())};
  t.bytes.assign(text.begin(), text.end());
  return t;
}

std::vector<float> floats_from_tensor(const NamedTensor& t) {
  require(t.dtype == CkptDtype::kF32, "floats_from_tensor: dtype is not f32: " + t.name);
  std::vector<float> out(t.bytes.size() / 4);
  std::memcpy(out.data(), t.bytes.data(), t.bytes.size());
  return out;
}

std::string string_from_tensor(const NamedTensor& t) {
  require(t.dtype == CkptDtype::kU8, "string_from_tensor: dtype is not u8: " + t.name);
  return std::string(t.bytes.begin(), t.bytes.end());
}

void save_checkpoint(const std::string& path, const std::vector<NamedTensor>& tensors) {
  std::vector<unsigned char> out;
  put<uint32_t>(out, kMagic);
  put<uint32_t>(out, kVersion);
  put<uint64_t>(out, tensors.size());
  for (const auto& t : tensors) {
    put<uint32_t>(out, static_cast<uint32_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    put<uint8_t>(out, static_cast<uint8_t>(t.dtype));
    put<uint32_t>(out, static_cast<uint32_t>(t.shape.size()));
    int64_t n = 1;
    for (int64_t d : t.shape) {
      put<uint64_t>(out, static_cast<uint64_t>(d));
      n *= d;
    }
    require(t.bytes.size() == static_cast<size_t>(n) * dtype_size(t.dtype),
            "save_checkpoint: byte count does not match shape for " + t.name);
    out.insert(out.end(), t.bytes.begin(), t.bytes.end());
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(f.good(), "cannot open checkpoint for writing: " + path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  require(f.good(), "short write to checkpoint: " + path);
}

std::vector<NamedTensor> load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), "cannot open checkpoint: " + path);
  std::vector<unsigned char> in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  size_t pos = 0;
  require(get<uint32_t>(in, pos) == kMagic, "checkpoint: bad magic in " + path);
  const uint32_t version = get<uint32_t>(in, pos);
  require(version == kVersion, "checkpoint: unknown version " + std::to_string(version));
  const uint64_t count = get<uint64_t>(in, pos);
  std::vector<NamedTensor> tensors;
  tensors.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    NamedTensor t;
    const uint32_t name_len = get<uint32_t>(in, pos);
    require(pos + name_len <= in.size(), "checkpoint: truncated name");
    t.name.assign(reinterpret_cast<const char*>(in.data() + pos), name_len);
    pos += name_len;
    const uint8_t dtype = get<uint8_t>(in, pos);
    require(dtype <= 2, "checkpoint: unknown dtype code");
    t.dtype = static_cast<CkptDtype>(dtype);
    const uint32_t rank = get<uint32_t>(in, pos);
    int64_t n = 1;
    for (uint32_t r = 0; r < rank; ++r) {
      const auto d = static_cast<int64_t>(get<uint64_t>(in, pos));
      t.shape.push_back(d);
      n *= d;
    }
    const size_t nbytes = static_cast<size_t>(n) * dtype_size(t.dtype);
    require(pos + nbytes <= in.size(), "checkpoint: truncated tensor data");
    t.bytes.assign(in.begin() + static_cast<std::ptrdiff_t>(pos),
                   in.begin() + static_cast<std::ptrdiff_t>(pos + nbytes));
    pos += nbytes;
    tensors.push_back(std::move(t));
  }
  return tensors;
}

const NamedTensor& find_tensor(const std::vector<NamedTensor>& tensors, const std::string& name) {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw Error("checkpoint: missing tensor " + name);
}

}  // namespace mixstyle::nn
