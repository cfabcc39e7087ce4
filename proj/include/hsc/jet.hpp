#pragma once
// Second-order forward-mode jets: value with first and second derivative
// in a single independent variable. Used to obtain exact derivatives of the
// closed-form coefficient functions.

#include <cmath>

namespace hsc {

struct Jet {
  double v = 0.0, d1 = 0.0, d2 = 0.0;
  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT: constants promote implicitly
  Jet(double value, double first, double second) : v(value), d1(first), d2(second) {}
  static Jet variable(double x) { return {x, 1.0, 0.0}; }
};

inline Jet operator+(const Jet& a, const Jet& b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
inline Jet operator-(const Jet& a, const Jet& b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
inline Jet operator-(const Jet& a) { return {-a.v, -a.d1, -a.d2}; }
inline Jet operator*(const Jet& a, const Jet& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}
inline Jet reciprocal(const Jet& a) {
  const double r = 1.0 / a.v;
  return {r, -a.d1 * r * r, (2.0 * a.d1 * a.d1 * r - a.d2) * r * r};
}
inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
inline Jet& operator+=(Jet& a, const Jet& b) { return a = a + b; }
inline Jet& operator-=(Jet& a, const Jet& b) { return a = a - b; }
inline Jet& operator*=(Jet& a, const Jet& b) { return a = a * b; }

inline Jet sqrt(const Jet& a) {
  const double s = std::sqrt(a.v);
  const double d1 = a.d1 / (2.0 * s);
  return {s, d1, (a.d2 - 2.0 * d1 * d1) / (2.0 * s)};
}

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.v; }

}  // namespace hsc
