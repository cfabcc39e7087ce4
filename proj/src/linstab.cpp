#include "hsc/linstab.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "hsc/descent.hpp"

namespace hsc {

namespace {
void check_setup(const DimensionParams& p, const RadialGrid& g) {
  if (!p.a) throw std::invalid_argument("the blowup profile needs d >= 7");
  if (g.parity() != Parity::even) throw std::invalid_argument("linearized operator acts on even states");
  if (g.N() < 48) throw std::invalid_argument("linearized operator needs N >= 48");
}

std::vector<cplx> eigenvalues(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double weighted_norm(const RadialGrid& g, const StateVector& v, int k, int d) {
  return state_norm(g, v, k, d);
}
}  // namespace

OperatorMatrix assemble_free(const DimensionParams& p, const RadialGrid& g) {
  check_setup(p, g);
  return {free_generator_matrix(g, p.d), g, p.d, "L_d"};
}

OperatorMatrix assemble_potential(const DimensionParams& p, const RadialGrid& g) {
  check_setup(p, g);
  const int M = g.half_size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * M, 2 * M);
  for (int i = 0; i < M; ++i) A(M + i, i) = potential(p, g.eta()(i));
  return {A, g, p.d, "L_V"};
}

OperatorMatrix assemble_L(const DimensionParams& p, const RadialGrid& g) {
  const auto Ld = assemble_free(p, g);
  const auto LV = assemble_potential(p, g);
  const int n = static_cast<int>(Ld.A.rows());
  return {Ld.A - 2.0 * Eigen::MatrixXd::Identity(n, n) + LV.A, g, p.d, "L"};
}

StateVector symmetry_mode_state(const DimensionParams& p, const RadialGrid& g) {
  const int M = g.half_size();
  StateVector v{Eigen::VectorXd(M), Eigen::VectorXd(M), Parity::even};
  for (int i = 0; i < M; ++i) {
    const auto f = symmetry_mode(p, g.eta()(i));
    v.f1(i) = f[0];
    v.f2(i) = f[1];
  }
  return v;
}

double eigen_identity_residual(const OperatorMatrix& L) {
  const Eigen::VectorXd f = symmetry_mode_state(make_params(L.d), L.grid).stacked();
  return (L.A * f - f).norm() / f.norm();
}

void require_resolved(const OperatorMatrix& L) {
  const double r = eigen_identity_residual(L);
  if (r > 1e-4)
    throw std::runtime_error("resolution too low: eigen-identity residual " + std::to_string(r));
}

bool SpectrumResult::mode_stable(double tol) const {
  return unstable_count == 1 && std::abs(top - 1.0) < tol;
}

SpectrumResult spectrum(const DimensionParams& p, double R, int N, int dN, double tol, double window) {
  const RadialGrid g(R, N, Parity::even), g2(R, N + dN, Parity::even);
  const auto L = assemble_L(p, g);
  SpectrumResult out;
  out.d = p.d;
  out.R = R;
  out.N = N;
  out.N_check = N + dN;
  Eigen::EigenSolver<Eigen::MatrixXd> es(L.A, true);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  out.raw.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  const auto other = eigenvalues(assemble_L(p, g2).A);
  for (const cplx& z : out.raw) {
    if (z.real() < window) continue;
    double best = std::numeric_limits<double>::infinity();
    for (const cplx& w : other) best = std::min(best, std::abs(z - w));
    if (best < tol) out.filtered.push_back(z);
  }
  std::sort(out.filtered.begin(), out.filtered.end(),
            [](const cplx& a, const cplx& b) { return a.real() > b.real(); });
  for (const cplx& z : out.filtered) {
    out.stable.push_back(z.real() < 0.0);
    if (z.real() >= 0.0) ++out.unstable_count;
  }
  if (out.filtered.empty()) throw std::runtime_error("no eigenvalue survived the resolution filter");
  out.top = out.filtered.front();
  out.gap = out.filtered.size() > 1 ? out.filtered[1].real() : -std::numeric_limits<double>::infinity();

  int idx = 0;
  for (int i = 0; i < static_cast<int>(out.raw.size()); ++i)
    if (std::abs(out.raw[i] - out.top) < std::abs(out.raw[idx] - out.top)) idx = i;
  Eigen::VectorXd u = es.eigenvectors().col(idx).real();
  if (u.norm() == 0.0) u = es.eigenvectors().col(idx).imag();
  u.normalize();
  out.top_vector = u;
  Eigen::VectorXd f = symmetry_mode_state(p, g).stacked().normalized();
  const double par = std::abs(u.dot(f));
  out.angle_to_symmetry_mode = std::atan2((u - u.dot(f) * f).norm(), par);
  return out;
}

std::string to_json(const SpectrumResult& s) {
  nlohmann::json j;
  j["d"] = s.d;
  j["R"] = s.R;
  j["N"] = s.N;
  j["N_check"] = s.N_check;
  j["eigenvalues"] = nlohmann::json::array();
  for (size_t i = 0; i < s.filtered.size(); ++i)
    j["eigenvalues"].push_back(
        {{"re", s.filtered[i].real()}, {"im", s.filtered[i].imag()}, {"stable", bool(s.stable[i])}});
  j["gap"] = s.gap;
  j["mode_stable"] = s.mode_stable();
  j["angle_to_symmetry_mode"] = s.angle_to_symmetry_mode;
  return j.dump(2);
}

OperatorMatrix riesz_projection(const OperatorMatrix& L, cplx center, double radius, int M,
                                double clearance) {
  if (M < 4) throw std::invalid_argument("too few contour nodes");
  for (const cplx& z : eigenvalues(L.A))
    if (std::abs(std::abs(z - center) - radius) < clearance)
      throw std::invalid_argument("contour passes through the spectrum");
  const int n = static_cast<int>(L.A.rows());
  const Eigen::MatrixXcd A = L.A.cast<cplx>();
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < M; ++j) {
    // Half-step offset keeps the nodes off the real axis.
    const double theta = 2.0 * std::numbers::pi * (j + 0.5) / M;
    const cplx e = radius * std::exp(cplx(0.0, theta));
    const Eigen::MatrixXcd shifted = (center + e) * Eigen::MatrixXcd::Identity(n, n) - A;
    P += (e / double(M)) * shifted.partialPivLu().inverse();
  }
  return {P.real(), L.grid, L.d, "projection"};
}

double rk4_stable_step(const OperatorMatrix& L) {
  double rho = 0.0;
  for (const cplx& z : eigenvalues(L.A)) rho = std::max(rho, std::abs(z));
  // RK4 covers |z| <= 2.78 along the negative axis; the stiff collocation
  // modes are far from normal, so keep a factor of about three.
  return 1.0 / rho;
}

StateVector evolve_linear(const OperatorMatrix& L, const StateVector& v, double ds, double dt) {
  if (ds < 0.0) throw std::invalid_argument("negative time step");
  if (dt <= 0.0) dt = rk4_stable_step(L);
  const int steps = std::max(1, static_cast<int>(std::ceil(ds / dt)));
  const double h = ds / steps;
  Eigen::VectorXd x = v.stacked();
  const double n0 = x.norm();
  for (int i = 0; i < steps; ++i) {
    const Eigen::VectorXd k1 = L.A * x;
    const Eigen::VectorXd k2 = L.A * (x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = L.A * (x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = L.A * (x + h * k3);
    x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    if (!(x.norm() <= 1e3 * std::exp(2.0 * h * (i + 1)) * n0 + 1e-300))
      throw std::runtime_error("linear evolution unstable");
  }
  return StateVector::from_stacked(x, Parity::even);
}

double fitted_exponent(const std::vector<double>& t, const std::vector<double>& values) {
  if (t.size() != values.size() || t.size() < 2) throw std::invalid_argument("need at least two samples");
  double st = 0, sl = 0, stt = 0, stl = 0;
  const double n = static_cast<double>(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    const double l = std::log(values[i]);
    st += t[i];
    sl += l;
    stt += t[i] * t[i];
    stl += t[i] * l;
  }
  return (n * stl - st * sl) / (n * stt - st * st);
}

DecayFit linear_decay_fit(const OperatorMatrix& L, const StateVector& v, double s_end, int samples,
                          int k, double s_begin) {
  if (samples < 2 || !(s_end > s_begin)) throw std::invalid_argument("bad sampling window");
  if (k < 0) k = (L.d - 1) / 2;
  const double dt = rk4_stable_step(L);
  DecayFit fit;
  StateVector x = s_begin > 0.0 ? evolve_linear(L, v, s_begin, dt) : v;
  const double step = (s_end - s_begin) / (samples - 1);
  for (int i = 0; i < samples; ++i) {
    if (i > 0) x = evolve_linear(L, x, step, dt);
    fit.s.push_back(s_begin + i * step);
    fit.norms.push_back(weighted_norm(L.grid, x, k, L.d));
  }
  fit.rate = fitted_exponent(fit.s, fit.norms);
  return fit;
}

ModeODECoefficients mode_ode_coeffs(const DimensionParams& p, cplx lambda, double eta) {
  if (std::abs(eta) < 1e-12 || std::abs(std::abs(eta) - 0.5) < 1e-12)
    throw std::domain_error("mode equation is singular at 0 and 1/2");
  const auto c = wave_coeffs(p.d, eta);
  const double V = potential(p, eta);
  const cplx mu = lambda + 2.0;
  return {(c.c11 + mu * c.c21) / c.c12, (mu * (c.c20 - mu) + V) / c.c12};
}

FrobeniusIndices frobenius_indices(const DimensionParams& p, cplx lambda) {
  const cplx mu = lambda + 2.0;
  FrobeniusIndices out;
  const auto c0 = wave_coeffs(p.d, 0.0);
  out.at_zero = {0.0, 1.0 - c0.eta_c11 / c0.c12};
  // c12 has a simple zero at 1/2: lim (eta - 1/2) p = (c11 + mu c21) / c12'.
  const Jet x = Jet::variable(0.5);
  const auto c = coefficient_set(p.d, x, lift_height(x, standard_height()));
  const cplx P0 = (c.eta_c11.v / 0.5 + mu * c.c21.v) / c.c12.d1;
  out.at_half = {0.0, 1.0 - P0};
  return out;
}

namespace {
using Poly = std::vector<cplx>;

Poly operator*(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Poly operator+(const Poly& a, const Poly& b) {
  Poly out(std::max(a.size(), b.size()), 0.0);
  for (size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

Poly scale(const Poly& a, cplx s) {
  Poly out = a;
  for (auto& c : out) c *= s;
  return out;
}

// P(x0 + t) as a polynomial in t.
Poly shift(const Poly& a, double x0) {
  Poly out{0.0};
  const Poly lin{x0, 1.0};
  for (size_t i = a.size(); i-- > 0;) out = out * lin + Poly{a[i]};
  return out;
}

cplx coef(const Poly& a, int k) { return k >= 0 && k < static_cast<int>(a.size()) ? a[k] : 0.0; }

// A g'' + B g' + C g = 0 with A(0) = 0 (regular singular point at t = 0):
// coefficients of the index-0 series. At indices listed in `deferred` the
// division by the indicial factor is replaced by a rescaling of all earlier
// coefficients, which keeps the series entire in lambda across resonances.
std::vector<cplx> frobenius_series(const Poly& A, const Poly& B, const Poly& C, int terms,
                                   const std::vector<int>& deferred) {
  std::vector<cplx> a(terms, 0.0);
  a[0] = 1.0;
  for (int n = 1; n < terms; ++n) {
    cplx S = 0.0;
    for (int k = 2; k < static_cast<int>(A.size()); ++k) {
      const int j = n + 1 - k;
      if (j >= 0) S += A[k] * double(j) * double(j - 1) * a[j];
    }
    for (int k = 1; k < static_cast<int>(B.size()); ++k) {
      const int j = n - k;
      if (j >= 0) S += B[k] * double(j) * a[j];
    }
    for (int k = 0; k < static_cast<int>(C.size()); ++k) {
      const int j = n - 1 - k;
      if (j >= 0) S += C[k] * a[j];
    }
    const cplx F = double(n) * double(n - 1) * coef(A, 1) + double(n) * coef(B, 0);
    if (std::find(deferred.begin(), deferred.end(), n) != deferred.end()) {
      for (int j = 0; j < n; ++j) a[j] *= F;
      a[n] = -S;
    } else {
      a[n] = -S / F;
    }
  }
  return a;
}

std::pair<cplx, cplx> evaluate(const std::vector<cplx>& a, double t) {
  cplx v = 0.0, dv = 0.0;
  for (size_t n = a.size(); n-- > 0;) {
    v = v * t + a[n];
    if (n > 0) dv = dv * t + double(n) * a[n];
  }
  return {v, dv};
}

constexpr int kSeriesTerms = 160;

// Polynomial form of the mode equation multiplied by r (b + r^2)^2.
struct SscPolys {
  Poly A, B, C;
};

SscPolys ssc_polys(const DimensionParams& p, cplx lambda) {
  const double a = p.ad(), b = p.bd(), d = p.d;
  const Poly bq2 = Poly{b, 0.0, 1.0} * Poly{b, 0.0, 1.0};
  const Poly Vn{6.0 * (d - 4) * a * b, 0.0, -3.0 * (d - 4) * a * (a - 2.0)};
  SscPolys s;
  s.A = Poly{0.0, 1.0, 0.0, -1.0} * bq2;
  s.B = Poly{d - 1.0, 0.0, -2.0 * (lambda + 3.0)} * bq2;
  s.C = Poly{0.0, 1.0} * (scale(bq2, -(lambda + 2.0) * (lambda + 3.0)) + Vn);
  return s;
}
}  // namespace

cplx ssc_regular_solution(const DimensionParams& p, cplx lambda, double r) {
  if (!(r >= 0.0 && r < 1.0)) throw std::domain_error("series from the origin converges on [0, 1)");
  const auto s = ssc_polys(p, lambda);
  return evaluate(frobenius_series(s.A, s.B, s.C, kSeriesTerms, {}), r).first;
}

SscConnection ssc_mode_scan(const DimensionParams& p, cplx lambda, double match) {
  if (!(match > 0.0 && match < 1.0)) throw std::domain_error("matching point must lie in (0, 1)");
  if (lambda.real() < -1.0) throw std::domain_error("scan window is Re lambda >= -1");
  const auto s = ssc_polys(p, lambda);
  const auto a0 = frobenius_series(s.A, s.B, s.C, kSeriesTerms, {});
  // At r = 1 the indices are {0, (d - 5)/2 - lambda}; the second is a positive
  // integer j <= (d - 3)/2 somewhere in Re lambda >= -1.
  std::vector<int> deferred;
  for (int j = 1; j <= (p.d - 3) / 2; ++j) deferred.push_back(j);
  const auto a1 = frobenius_series(shift(s.A, 1.0), shift(s.B, 1.0), shift(s.C, 1.0), kSeriesTerms,
                                   deferred);
  SscConnection c;
  std::tie(c.g0, c.dg0) = evaluate(a0, match);
  std::tie(c.g1, c.dg1) = evaluate(a1, match - 1.0);
  // Both series converge with ratio |t| / 1; check the tail.
  const double tail0 = std::abs(a0.back()) * std::pow(match, kSeriesTerms - 1);
  const double tail1 = std::abs(a1.back()) * std::pow(1.0 - match, kSeriesTerms - 1);
  if (tail0 > 1e-12 * std::max(1.0, std::abs(c.g0)) || tail1 > 1e-12 * std::max(1.0, std::abs(c.g1)))
    throw std::runtime_error("Frobenius series not converged at the matching point");
  c.determinant = c.g0 * c.dg1 - c.dg0 * c.g1;
  const double scale = std::abs(c.g0 * c.dg1) + std::abs(c.dg0 * c.g1);
  // Resonance without a logarithm: the series from 1 vanishes identically.
  c.normalized = scale > 0.0 ? std::abs(c.determinant) / scale : 0.0;
  return c;
}

SscZeroScan ssc_zero_scan(const DimensionParams& p, double re_lo, double re_hi, double im_max, int grid) {
  auto W = [&](cplx z) { return ssc_mode_scan(p, z).determinant; };
  auto Wn = [&](cplx z) { return ssc_mode_scan(p, z).normalized; };
  SscZeroScan out;
  out.min_boundary = std::numeric_limits<double>::infinity();

  // Argument principle along the rectangle, refining segments with large phase jumps.
  const cplx corners[5] = {{re_lo, -im_max}, {re_hi, -im_max}, {re_hi, im_max}, {re_lo, im_max}, {re_lo, -im_max}};
  double total = 0.0;
  std::function<void(cplx, cplx, cplx, cplx, int)> segment = [&](cplx za, cplx zb, cplx wa, cplx wb, int depth) {
    const double dphi = std::arg(wb / wa);
    if (std::abs(dphi) > std::numbers::pi / 8 && depth < 14) {
      const cplx zm = 0.5 * (za + zb), wm = W(zm);
      out.min_boundary = std::min(out.min_boundary, Wn(zm));
      segment(za, zm, wa, wm, depth + 1);
      segment(zm, zb, wm, wb, depth + 1);
      return;
    }
    total += dphi;
  };
  for (int e = 0; e < 4; ++e) {
    cplx za = corners[e], wa = W(za);
    out.min_boundary = std::min(out.min_boundary, Wn(za));
    for (int i = 1; i <= grid; ++i) {
      const cplx zb = corners[e] + (corners[e + 1] - corners[e]) * (double(i) / grid);
      const cplx wb = W(zb);
      out.min_boundary = std::min(out.min_boundary, Wn(zb));
      segment(za, zb, wa, wb, 0);
      za = zb;
      wa = wb;
    }
  }
  out.winding = static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));

  // |W| has no interior minima away from zeros; polish its grid minima by the secant method.
  const int nx = grid, ny = 2 * grid;
  std::vector<double> val((nx + 1) * (ny + 1));
  auto at = [&](int i, int j) {
    return cplx(re_lo + (re_hi - re_lo) * i / nx, -im_max + 2.0 * im_max * j / ny);
  };
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j) val[i * (ny + 1) + j] = std::abs(W(at(i, j)));
  for (int i = 0; i <= nx; ++i) {
    for (int j = 0; j <= ny; ++j) {
      const double v = val[i * (ny + 1) + j];
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          const int ii = i + di, jj = j + dj;
          if ((di || dj) && ii >= 0 && ii <= nx && jj >= 0 && jj <= ny && val[ii * (ny + 1) + jj] < v)
            is_min = false;
        }
      if (!is_min) continue;
      cplx z0 = at(i, j), z1 = z0 + cplx(1e-3, 1e-3);
      cplx w0 = W(z0), w1 = W(z1);
      const double margin = 0.25 * (re_hi - re_lo);
      bool lost = false;
      for (int it = 0; it < 60 && std::abs(z1 - z0) > 1e-14; ++it) {
        const cplx z2 = z1 - w1 * (z1 - z0) / (w1 - w0);
        if (!(z2.real() >= std::max(-1.0, re_lo - margin) && z2.real() <= re_hi + margin &&
              std::abs(z2.imag()) <= im_max + margin)) {
          lost = true;
          break;
        }
        z0 = z1;
        w0 = w1;
        z1 = z2;
        w1 = W(z1);
      }
      const bool inside = z1.real() >= re_lo - 1e-9 && z1.real() <= re_hi + 1e-9 &&
                          std::abs(z1.imag()) <= im_max + 1e-9;
      if (lost || !inside || std::abs(W(z1)) > 1e-8 * std::abs(W(z1 + 1e-2))) continue;
      bool dup = false;
      for (const cplx& z : out.zeros) dup = dup || std::abs(z - z1) < 1e-6;
      if (!dup) out.zeros.push_back(z1);
    }
  }
  return out;
}

}  // namespace hsc
