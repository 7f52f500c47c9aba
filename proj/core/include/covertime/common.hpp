#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace covertime {

using i32 = std::int32_t;
using i64 = std::int64_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;

enum class Errc {
  BadWeights,
  BadOrientation,
  NotGenerating,
  StepBudgetExceeded,
  NotAbsorbing,
  CapExceeded,
  ToleranceUnreachable,
  SolveFailed,
  KNotInA,
  KEqualsA,
  CapacityUnavailable,
  Disconnected,
  DegenerateScale,
  NoConvergence,
  SeparationViolated,
  SeparationTooSmall,
  ConfigInvalid,
  IoError,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

// FNV-1a, used for config and mode hashes in output manifests.
inline u64 fnv1a(const void* data, std::size_t n, u64 h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline u64 fnv1a(const std::string& s, u64 h = 0xcbf29ce484222325ull) {
  return fnv1a(s.data(), s.size(), h);
}

}  // namespace covertime
