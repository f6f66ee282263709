#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cwb {

using Scalar = double;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

// Error kinds double as process exit codes; keep the numbering stable, the
// CLI contract depends on it.
enum class ErrorKind : int {
  Config = 2,    // malformed/unknown configuration
  Io = 3,        // missing or unreadable files, malformed payloads
  Numeric = 4,   // degenerate data, divergence, failed factorizations
  Contract = 5,  // precondition/invariant violations at API boundaries
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(ErrorKind::Config, msg) {}
};
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(ErrorKind::Io, msg) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& msg) : Error(ErrorKind::Numeric, msg) {}
};
struct ContractError : Error {
  explicit ContractError(const std::string& msg) : Error(ErrorKind::Contract, msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks, one per
// worker; fn must only write to per-index slots so results are identical to
// the serial order. Exceptions are captured and rethrown on the caller.
inline void parallel_for(std::size_t n, int workers,
                         const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t nthreads =
      std::min<std::size_t>(std::max(workers, 1), n);
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(nthreads);
  std::size_t chunk = (n + nthreads - 1) / nthreads;
  for (std::size_t t = 0; t < nthreads; ++t) {
    std::size_t lo = t * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([&, t, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errs[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace cwb
