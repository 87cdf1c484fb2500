#ifndef PROBISIM_RATIONAL_HPP
#define PROBISIM_RATIONAL_HPP

#include <cstdint>
#include <numeric>
#include <string>

#include "probisim/base.hpp"

namespace probisim::pts {

// Exact rational on 64-bit words with overflow checks; plenty for the
// slice-depth products this project computes.
class Rational {
public:
  Rational() = default;
  Rational(long long num, long long den = 1) : num_(num), den_(den) { normalize(); }

  long long num() const { return num_; }
  long long den() const { return den_; }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(checked_add(checked_mul(a.num_, b.den_), checked_mul(b.num_, a.den_)),
                    checked_mul(a.den_, b.den_));
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return a + Rational(-b.num_, b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(checked_mul(a.num_, b.num_), checked_mul(a.den_, b.den_));
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) fail(ErrorCode::BadInput, "rational division by zero");
    return Rational(checked_mul(a.num_, b.den_), checked_mul(a.den_, b.num_));
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
  }

  Rational abs() const { return Rational(num_ < 0 ? -num_ : num_, den_); }
  bool is_zero() const { return num_ == 0; }

  std::string to_string() const {
    return den_ == 1 ? std::to_string(num_)
                     : std::to_string(num_) + "/" + std::to_string(den_);
  }

private:
  static long long checked_mul(long long a, long long b) {
    __int128 r = static_cast<__int128>(a) * b;
    if (r > INT64_MAX || r < INT64_MIN)
      fail(ErrorCode::ResourceExceeded, "rational overflow");
    return static_cast<long long>(r);
  }
  static long long checked_add(long long a, long long b) {
    __int128 r = static_cast<__int128>(a) + b;
    if (r > INT64_MAX || r < INT64_MIN)
      fail(ErrorCode::ResourceExceeded, "rational overflow");
    return static_cast<long long>(r);
  }
  void normalize() {
    if (den_ == 0) fail(ErrorCode::BadInput, "zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
    if (num_ == 0) den_ = 1;
  }

  long long num_ = 0;
  long long den_ = 1;
};

} // namespace probisim::pts

#endif
