#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <vector>

#include "crowdcal/errors.hpp"

namespace crowdcal {

// Calibration problems here have at most 20 parameters (the histogram
// scenario); the cap keeps tangents on the stack.
inline constexpr int kMaxTangentDim = 32;

using TangentVec =
    Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxTangentDim, 1>;

// Forward-mode scalar: a value plus its partial derivatives wrt the
// calibration parameters. An empty tangent means "identically zero";
// constants stay cheap and zero-derivative programs cost almost nothing
// on top of plain double arithmetic.
class Dual {
 public:
  Dual() = default;
  Dual(double v) : v_(v) {}  // NOLINT: implicit by design, constants are Duals
  Dual(double v, TangentVec g) : v_(v), g_(std::move(g)) {}

  double value() const { return v_; }
  const TangentVec& tangent_raw() const { return g_; }
  bool has_tangent() const { return g_.size() > 0; }

  // Materializes the tangent at dimension n (empty -> zeros).
  TangentVec tangent(int n) const {
    if (g_.size() > 0) return g_;
    return TangentVec::Zero(n);
  }

  Dual& operator+=(const Dual& o) {
    v_ += o.v_;
    if (o.g_.size() > 0) {
      if (g_.size() > 0)
        g_ += o.g_;
      else
        g_ = o.g_;
    }
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v_ -= o.v_;
    if (o.g_.size() > 0) {
      if (g_.size() > 0)
        g_ -= o.g_;
      else
        g_ = -o.g_;
    }
    return *this;
  }
  Dual& operator*=(const Dual& o) { return *this = *this * o; }
  Dual& operator/=(const Dual& o) { return *this = *this / o; }

  friend Dual operator-(const Dual& a) {
    Dual r(-a.v_);
    if (a.g_.size() > 0) r.g_ = -a.g_;
    return r;
  }

  friend Dual operator+(const Dual& a, const Dual& b) {
    Dual r = a;
    r += b;
    return r;
  }
  friend Dual operator+(const Dual& a, double b) { return Dual(a.v_ + b, a.g_); }
  friend Dual operator+(double a, const Dual& b) { return Dual(a + b.v_, b.g_); }

  friend Dual operator-(const Dual& a, const Dual& b) {
    Dual r = a;
    r -= b;
    return r;
  }
  friend Dual operator-(const Dual& a, double b) { return Dual(a.v_ - b, a.g_); }
  friend Dual operator-(double a, const Dual& b) {
    Dual r(a - b.v_);
    if (b.g_.size() > 0) r.g_ = -b.g_;
    return r;
  }

  friend Dual operator*(const Dual& a, const Dual& b) {
    Dual r(a.v_ * b.v_);
    if (a.g_.size() > 0) {
      if (b.g_.size() > 0)
        r.g_ = b.v_ * a.g_ + a.v_ * b.g_;
      else
        r.g_ = b.v_ * a.g_;
    } else if (b.g_.size() > 0) {
      r.g_ = a.v_ * b.g_;
    }
    return r;
  }
  friend Dual operator*(const Dual& a, double b) {
    Dual r(a.v_ * b);
    if (a.g_.size() > 0) r.g_ = b * a.g_;
    return r;
  }
  friend Dual operator*(double a, const Dual& b) { return b * a; }

  friend Dual operator/(const Dual& a, const Dual& b) {
    if (b.v_ == 0.0) throw ArithmeticError("dual division by zero value");
    Dual r(a.v_ / b.v_);
    if (a.g_.size() > 0) {
      if (b.g_.size() > 0)
        r.g_ = a.g_ / b.v_ - (a.v_ / (b.v_ * b.v_)) * b.g_;
      else
        r.g_ = a.g_ / b.v_;
    } else if (b.g_.size() > 0) {
      r.g_ = -(a.v_ / (b.v_ * b.v_)) * b.g_;
    }
    return r;
  }
  friend Dual operator/(const Dual& a, double b) {
    if (b == 0.0) throw ArithmeticError("dual division by zero value");
    Dual r(a.v_ / b);
    if (a.g_.size() > 0) r.g_ = a.g_ / b;
    return r;
  }
  friend Dual operator/(double a, const Dual& b) {
    if (b.v_ == 0.0) throw ArithmeticError("dual division by zero value");
    Dual r(a / b.v_);
    if (b.g_.size() > 0) r.g_ = -(a / (b.v_ * b.v_)) * b.g_;
    return r;
  }

  // Comparisons are on values; an untraced branch is invisible to the
  // gradient estimate (pathwise semantics).
  friend bool operator<(const Dual& a, const Dual& b) { return a.v_ < b.v_; }
  friend bool operator>(const Dual& a, const Dual& b) { return a.v_ > b.v_; }
  friend bool operator<=(const Dual& a, const Dual& b) { return a.v_ <= b.v_; }
  friend bool operator>=(const Dual& a, const Dual& b) { return a.v_ >= b.v_; }
  friend bool operator==(const Dual& a, const Dual& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Dual& a, const Dual& b) { return a.v_ != b.v_; }

 private:
  double v_ = 0.0;
  TangentVec g_;  // size 0 or the parameter dimension n
};

inline Dual exp(const Dual& a) {
  const double e = std::exp(a.value());
  Dual r(e);
  if (a.has_tangent()) r = Dual(e, TangentVec(e * a.tangent_raw()));
  return r;
}

inline Dual log(const Dual& a) {
  if (a.value() <= 0.0) throw ArithmeticError("dual log of non-positive value");
  Dual r(std::log(a.value()));
  if (a.has_tangent()) r = Dual(r.value(), TangentVec(a.tangent_raw() / a.value()));
  return r;
}

inline Dual sqrt(const Dual& a) {
  if (a.value() < 0.0) throw ArithmeticError("dual sqrt of negative value");
  const double s = std::sqrt(a.value());
  Dual r(s);
  if (a.has_tangent()) r = Dual(s, TangentVec(a.tangent_raw() / (2.0 * s)));
  return r;
}

// |x|; the tangent at x == 0 is taken as zero.
inline Dual abs(const Dual& a) {
  if (a.value() > 0.0) return a;
  if (a.value() < 0.0) return -a;
  return Dual(0.0);
}

// Value-based selects; kinks, not jumps.
inline const Dual& min(const Dual& a, const Dual& b) { return b.value() < a.value() ? b : a; }
inline const Dual& max(const Dual& a, const Dual& b) { return a.value() < b.value() ? b : a; }

inline bool isfinite(const Dual& a) {
  if (!std::isfinite(a.value())) return false;
  return !a.has_tangent() || a.tangent_raw().allFinite();
}

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.value(); }

// Identity seeding: element i carries value theta[i] and tangent e_i.
inline std::vector<Dual> seed_parameters(std::span<const double> theta) {
  const int n = static_cast<int>(theta.size());
  if (n == 0) throw InvalidDimensionError("seed_parameters: empty parameter vector");
  if (n > kMaxTangentDim)
    throw InvalidDimensionError("seed_parameters: dimension exceeds tangent capacity");
  std::vector<Dual> out;
  out.reserve(theta.size());
  for (int i = 0; i < n; ++i) {
    TangentVec g = TangentVec::Zero(n);
    g[i] = 1.0;
    out.emplace_back(theta[i], std::move(g));
  }
  return out;
}

inline std::vector<Dual> seed_parameters(const Eigen::VectorXd& theta) {
  return seed_parameters(std::span<const double>(theta.data(), theta.size()));
}

// Zero-tangent seeding for plain evaluation through the same code path.
inline std::vector<Dual> constant_parameters(std::span<const double> theta) {
  return std::vector<Dual>(theta.begin(), theta.end());
}

}  // namespace crowdcal

namespace Eigen {

template <>
struct NumTraits<crowdcal::Dual> : NumTraits<double> {
  using Real = crowdcal::Dual;
  using NonInteger = crowdcal::Dual;
  using Nested = crowdcal::Dual;
  using Literal = double;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    ReadCost = 4,
    AddCost = 8,
    MulCost = 16,
    RequireInitialization = 1,
  };
};

template <typename BinaryOp>
struct ScalarBinaryOpTraits<crowdcal::Dual, double, BinaryOp> {
  using ReturnType = crowdcal::Dual;
};
template <typename BinaryOp>
struct ScalarBinaryOpTraits<double, crowdcal::Dual, BinaryOp> {
  using ReturnType = crowdcal::Dual;
};

}  // namespace Eigen
