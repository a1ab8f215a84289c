#pragma once

#include <cstdint>
#include <string>

namespace mixstyle {

// FNV-1a 64-bit. Used for input provenance in run manifests and for cache
// invalidation, not for security.
uint64_t fnv1a64(const void* data, size_t n, uint64_t seed = 0xcbf29ce484222325ull);

uint64_t hash_file(const std::string& path);

std::string hash_hex(uint64_t h);

}  // namespace mixstyle
