#pragma once
// Independent reference implementations used only by the tests. Everything
// here is written from the defining formulas in long double, without calling
// into the library.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using ld = long double;

inline ld h(ld y) { return std::sqrt(2.0L + y * y) - 2.0L; }
inline ld hp(ld y) { return y / std::sqrt(2.0L + y * y); }
inline ld hpp(ld y) { return 2.0L / std::pow(2.0L + y * y, 1.5L); }

// Richardson-extrapolated central differences (first or second derivative).
inline ld derivative(const std::function<ld(ld)>& f, ld x, int order, ld step = 1e-2L) {
  constexpr int levels = 6;
  ld table[levels][levels];
  ld hs = step;
  for (int i = 0; i < levels; ++i, hs /= 2.0L) {
    if (order == 1)
      table[i][0] = (f(x + hs) - f(x - hs)) / (2.0L * hs);
    else
      table[i][0] = (f(x + hs) - 2.0L * f(x) + f(x - hs)) / (hs * hs);
    ld p = 4.0L;
    for (int j = 1; j <= i; ++j, p *= 4.0L)
      table[i][j] = table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) / (p - 1.0L);
  }
  return table[levels - 1][levels - 1];
}

// Coefficient functions written literally (singular at eta = 0).
struct Coeffs {
  int d;
  ld c11(ld e) const {
    const ld w = e * hp(e) - h(e), om = 1 - hp(e) * hp(e);
    return -(d - 1) * w / om * h(e) / e - (h(e) * h(e) - e * e) / om * e * hpp(e) / w -
           2 * (e - h(e) * hp(e)) / om;
  }
  ld c12(ld e) const { return (h(e) * h(e) - e * e) / (1 - hp(e) * hp(e)); }
  ld c20(ld e) const {
    const ld w = e * hp(e) - h(e), om = 1 - hp(e) * hp(e);
    return -1 - (d - 1) * w / om * hp(e) / e - (h(e) * h(e) - e * e) / om * hpp(e) / w;
  }
  ld c21(ld e) const { return -2 * (e - h(e) * hp(e)) / (1 - hp(e) * hp(e)); }
  ld c1(ld e) const { return -e * h(e) / (e * hp(e) - h(e)); }
  ld c2(ld e) const { return -e * hp(e) / (e * hp(e) - h(e)); }
  // Dimension shifts taken as differences of the literal coefficients.
  ld c3(ld e) const { return Coeffs{d - 2}.c11(e) - c11(e); }
  ld c4(ld e) const { return Coeffs{d - 2}.c20(e) - c20(e); }
};

// Brute-force integral of f over [a, b] by composite Simpson in long double.
inline ld simpson(const std::function<ld(ld)>& f, ld a, ld b, int n = 20000) {
  if (n % 2) ++n;
  const ld dx = (b - a) / n;
  ld acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0L : 2.0L) * f(a + i * dx);
  return acc * dx / 3.0L;
}

}  // namespace oracle

namespace oracle {

// Direct H^k(B_R^d) norm (k <= 2) of the radial function f(|x|), as a sum of
// the L^2 norms of the derivative tensors of order 0..k. Uses
// |grad f|^2 = f'^2 and |Hess f|^2 = f''^2 + (d-1)(f'/r)^2.
inline ld direct_radial_norm(const std::function<ld(ld)>& f, int d, int k, ld R) {
  const ld area = 2.0L * std::pow(3.14159265358979323846L, d / 2.0L) / std::tgamma(d / 2.0L);
  auto fp = [&](ld r) { return derivative(f, r, 1, 1e-3L); };
  auto fpp = [&](ld r) { return derivative(f, r, 2, 1e-3L); };
  ld total = 0.0L;
  for (int j = 0; j <= k; ++j) {
    auto integrand = [&](ld r) -> ld {
      const ld w = std::pow(r, d - 1);
      if (j == 0) return f(r) * f(r) * w;
      if (j == 1) return fp(r) * fp(r) * w;
      if (r == 0.0L) return d == 1 ? fpp(r) * fpp(r) : 0.0L;
      const ld q = fp(r) / r;
      return (fpp(r) * fpp(r) + (d - 1) * q * q) * w;
    };
    total += std::sqrt(area * simpson(integrand, 0.0L, R, 4000));
  }
  return total;
}

}  // namespace oracle
