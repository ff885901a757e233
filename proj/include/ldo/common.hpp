#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>

namespace ldo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown on mismatched vector/matrix dimensions.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an input lies outside the domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Numerical failure: a solver could not produce a valid answer.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An enumeration would exceed its configured size cap.
class CapExceeded : public std::length_error {
public:
  using std::length_error::length_error;
};

inline void require_same_size(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size())
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
}

/// Writes a warning to std::clog. Each call site tag is reported at most a few times per process.
inline void log_warning(std::atomic<int>& counter, const std::string& msg) {
  if (counter.fetch_add(1, std::memory_order_relaxed) < 3) std::clog << "[ldo warning] " << msg << "\n";
}

/// Value in [-inf, +inf] with +inf represented by a tag, not by a floating-point infinity.
///
/// Arithmetic is intentionally not provided: callers test `is_finite()` and work with
/// `value()` so that +inf never enters penalty or cost arithmetic.
class ExtendedReal {
public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double v) : value_(v) {}  // NOLINT(google-explicit-constructor)

  static constexpr ExtendedReal infinity() {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  constexpr bool is_finite() const { return !infinite_; }
  constexpr bool is_infinite() const { return infinite_; }

  double value() const {
    if (infinite_) throw DomainError("ExtendedReal::value() on +inf");
    return value_;
  }

  /// Finite value, or +inf as a double. Only for comparisons and reporting.
  constexpr double as_double() const { return infinite_ ? kInf : value_; }

  friend constexpr bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }
  friend constexpr bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.infinite_) return false;
    return b.infinite_ || a.value_ < b.value_;
  }
  friend constexpr bool operator<=(const ExtendedReal& a, const ExtendedReal& b) { return !(b < a); }
  friend constexpr bool operator>(const ExtendedReal& a, const ExtendedReal& b) { return b < a; }
  friend constexpr bool operator>=(const ExtendedReal& a, const ExtendedReal& b) { return !(a < b); }

  friend std::ostream& operator<<(std::ostream& os, const ExtendedReal& x) {
    if (x.infinite_) return os << "inf";
    return os << x.value_;
  }

private:
  double value_ = 0.0;
  bool infinite_ = false;
};

}  // namespace ldo
