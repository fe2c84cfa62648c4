#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace btltest {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidSizeError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

// Thrown when a sampled or ingested graph fails the connectivity invariant.
struct ConnectivityError : Error {
  int attempts = 0;
  ConnectivityError(const std::string& msg, int attempts_used)
      : Error(msg), attempts(attempts_used) {}
};

struct LazinessError : Error {
  using Error::Error;
};

struct ConvergenceError : Error {
  double residual = 0.0;
  ConvergenceError(const std::string& msg, double final_residual)
      : Error(msg), residual(final_residual) {}
};

struct SizeLimitError : Error {
  using Error::Error;
};

struct TopologyError : Error {
  using Error::Error;
};

struct DegenerateDistributionError : Error {
  using Error::Error;
};

struct OptimizationError : Error {
  using Error::Error;
};

struct ParseError : Error {
  long line = 0;
  ParseError(const std::string& msg, long line_number)
      : Error(msg + " (line " + std::to_string(line_number) + ")"), line(line_number) {}
};

struct ValidationError : Error {
  using Error::Error;
};

// Neumaier compensated accumulator. Norm identities in the spectral module
// are checked at 1e-10 relative tolerance, which plain summation does not
// reliably reach for n in the hundreds.
class KahanSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Empirical quantile, inverse-CDF convention: for q in (0,1] the ceil(q*N)-th
// smallest value; q = 0 gives the minimum.
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("quantile of empty sample");
  std::sort(values.begin(), values.end());
  if (q <= 0.0) return values.front();
  if (q >= 1.0) return values.back();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  if (rank == 0) rank = 1;
  if (rank > values.size()) rank = values.size();
  return values[rank - 1];
}

inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

}  // namespace btltest
