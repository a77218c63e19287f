#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace frbm {

/// Raised when an argument violates a documented precondition.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised when a quadrature self-check or nested-rule comparison fails.
struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a sampled coefficient is nonpositive where positivity is required.
struct CoefficientSignError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a linear solve does not meet its residual contract.
struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an assembled operator violates a structural contract (SPD).
struct AssemblyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when greedy training finds no training snapshot with new information.
struct StagnationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a certified bound or verification suite fails.
struct CertificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

/// Differential order s of the two-sided problem, restricted to (1,2).
/// The variational formulation acts through the half order beta() = s/2.
class FracOrder {
 public:
  explicit FracOrder(double s) : s_(s) {
    require(s > 1.0 && s < 2.0, "FracOrder: s must lie in (1,2)");
  }
  double s() const { return s_; }
  double beta() const { return 0.5 * s_; }

 private:
  double s_;
};

/// Chunked parallel loop; falls back to serial on single-core hosts.
/// Bodies must write to disjoint state per index.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  unsigned workers = hw < 8 ? hw : 8u;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t i = t; i < n; i += workers) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// FNV-1a 64-bit hash, used for config provenance stamps.
inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace frbm
