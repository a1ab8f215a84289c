#pragma once

#include <stdexcept>
#include <string>

namespace mixstyle {

// Single exception type for the whole library. The message is the contract:
// one line, machine-grepable prefix "mixstyle:".
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error("mixstyle: " + msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace mixstyle
