#pragma once

#include <cmath>
#include <ostream>

namespace hkt::ad {

// Forward-mode dual number carrying one directional derivative.
// Arithmetic propagates d(f)/d(seed) alongside the value, so any scalar
// routine templated on its number type differentiates itself when called
// with Dual arguments.
struct Dual {
  double v = 0.0;  // value
  double d = 0.0;  // directional derivative

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT: implicit by design
  constexpr Dual(double value, double deriv) : v(value), d(deriv) {}

  Dual& operator+=(const Dual& o) {
    v += o.v;
    d += o.d;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    d -= o.d;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    d = d * o.v + v * o.d;
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    d = (d * o.v - v * o.d) / (o.v * o.v);
    v /= o.v;
    return *this;
  }
};

// Value/derivative accessors usable in code generic over double and Dual.
constexpr double value(double x) { return x; }
constexpr double value(const Dual& x) { return x.v; }
constexpr double deriv(double) { return 0.0; }
constexpr double deriv(const Dual& x) { return x.d; }

constexpr Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
constexpr Dual operator+(const Dual& a) { return a; }

constexpr Dual operator+(const Dual& a, const Dual& b) { return {a.v + b.v, a.d + b.d}; }
constexpr Dual operator-(const Dual& a, const Dual& b) { return {a.v - b.v, a.d - b.d}; }
constexpr Dual operator*(const Dual& a, const Dual& b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d};
}
constexpr Dual operator/(const Dual& a, const Dual& b) {
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}

constexpr Dual operator+(const Dual& a, double b) { return {a.v + b, a.d}; }
constexpr Dual operator+(double a, const Dual& b) { return {a + b.v, b.d}; }
constexpr Dual operator-(const Dual& a, double b) { return {a.v - b, a.d}; }
constexpr Dual operator-(double a, const Dual& b) { return {a - b.v, -b.d}; }
constexpr Dual operator*(const Dual& a, double b) { return {a.v * b, a.d * b}; }
constexpr Dual operator*(double a, const Dual& b) { return {a * b.v, a * b.d}; }
constexpr Dual operator/(const Dual& a, double b) { return {a.v / b, a.d / b}; }
constexpr Dual operator/(double a, const Dual& b) {
  return {a / b.v, -a * b.d / (b.v * b.v)};
}

// Comparisons act on values; derivative information never changes branches.
constexpr bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
constexpr bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
constexpr bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
constexpr bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }
constexpr bool operator==(const Dual& a, const Dual& b) { return a.v == b.v; }
constexpr bool operator!=(const Dual& a, const Dual& b) { return a.v != b.v; }
constexpr bool operator<(const Dual& a, double b) { return a.v < b; }
constexpr bool operator>(const Dual& a, double b) { return a.v > b; }
constexpr bool operator<(double a, const Dual& b) { return a < b.v; }
constexpr bool operator>(double a, const Dual& b) { return a > b.v; }

inline Dual sin(const Dual& x) { return {std::sin(x.v), std::cos(x.v) * x.d}; }
inline Dual cos(const Dual& x) { return {std::cos(x.v), -std::sin(x.v) * x.d}; }
inline Dual tan(const Dual& x) {
  const double c = std::cos(x.v);
  return {std::tan(x.v), x.d / (c * c)};
}
inline Dual asin(const Dual& x) {
  return {std::asin(x.v), x.d / std::sqrt(1.0 - x.v * x.v)};
}
inline Dual acos(const Dual& x) {
  return {std::acos(x.v), -x.d / std::sqrt(1.0 - x.v * x.v)};
}
inline Dual atan(const Dual& x) { return {std::atan(x.v), x.d / (1.0 + x.v * x.v)}; }
inline Dual atan2(const Dual& y, const Dual& x) {
  const double den = x.v * x.v + y.v * y.v;
  return {std::atan2(y.v, x.v), (x.v * y.d - y.v * x.d) / den};
}
inline Dual sqrt(const Dual& x) {
  const double r = std::sqrt(x.v);
  return {r, x.d / (2.0 * r)};
}
inline Dual exp(const Dual& x) {
  const double e = std::exp(x.v);
  return {e, e * x.d};
}
inline Dual log(const Dual& x) { return {std::log(x.v), x.d / x.v}; }
inline Dual pow(const Dual& x, double p) {
  return {std::pow(x.v, p), p * std::pow(x.v, p - 1.0) * x.d};
}
inline Dual abs(const Dual& x) { return x.v < 0.0 ? -x : x; }
inline Dual fabs(const Dual& x) { return abs(x); }
inline Dual max(const Dual& a, const Dual& b) { return a.v >= b.v ? a : b; }
inline Dual min(const Dual& a, const Dual& b) { return a.v <= b.v ? a : b; }

inline std::ostream& operator<<(std::ostream& os, const Dual& x) {
  return os << x.v << "+" << x.d << "e";
}

}  // namespace hkt::ad
