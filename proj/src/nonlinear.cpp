#include "hsc/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>
#include <json.hpp>

namespace hsc {

double bump(const PerturbationSpec& f, double r) {
  const double x = r / f.epsilon;
  if (std::abs(x) >= 1.0) return 0.0;
  return f.amplitude * std::exp(1.0 - 1.0 / (1.0 - x * x));
}

double initial_time(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  return std::log(-standard_height().derivatives(0.0)[0] / (1.0 + 2.0 * epsilon));
}

ProfileValue profile_tr(const DimensionParams& p, double T, double t, double r) {
  const double a = p.ad(), b = p.bd();
  const double D = b * (T - t) * (T - t) + r * r;
  if (D == 0.0) throw std::domain_error("blowup profile is singular at (T, 0)");
  return {-a / D, -2.0 * a * b * (T - t) / (D * D), 2.0 * a * r / (D * D)};
}

// ---------------------------------------------------------------- (t, r) solver

double CauchySolution::value(int n, int j) const {
  if (j < 0) j = -j;
  if (j >= J_) return 0.0;
  return levels_[n - lo_](j);
}

CauchySolution::Sample CauchySolution::sample(double t, double r) const {
  r = std::abs(r);
  if (r >= dr_ * (J_ - 3)) return {0.0, 0.0, 0.0};
  const double x = (t - t0_) / dt_;
  const int n0 = static_cast<int>(std::floor(x)) - 1;
  if (n0 < lo_ + 1 || n0 + 3 > hi_ - 1) throw std::out_of_range("time outside the solved window");
  const double yr = r / dr_;
  const int j0 = static_cast<int>(std::floor(yr)) - 1;

  auto lagrange = [](double u, double* c) {
    // Nodes 0, 1, 2, 3 relative to the stencil start.
    for (int i = 0; i < 4; ++i) {
      c[i] = 1.0;
      for (int m = 0; m < 4; ++m)
        if (m != i) c[i] *= (u - m) / double(i - m);
    }
  };
  double ct[4], cr[4];
  lagrange(x - n0, ct);
  lagrange(yr - j0, cr);
  Sample s{0.0, 0.0, 0.0};
  for (int a = 0; a < 4; ++a) {
    const int n = n0 + a;
    for (int b = 0; b < 4; ++b) {
      const int j = j0 + b;
      const double c = ct[a] * cr[b];
      s.w += c * value(n, j);
      s.wt += c * (value(n + 1, j) - value(n - 1, j)) / (2.0 * dt_);
      const double sgn = j < 0 ? -1.0 : 1.0;  // w_r is odd
      const int ja = std::abs(j);
      s.wr += c * sgn * (value(n, ja + 1) - value(n, ja - 1)) / (2.0 * dr_);
    }
  }
  return s;
}

double CauchySolution::max_abs() const {
  double m = 0.0;
  for (const auto& v : levels_) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

double CauchySolution::outside_cone() const {
  double m = 0.0;
  for (int n = lo_; n <= hi_; ++n) {
    const double t = t0_ + n * dt_;
    for (int j = 0; j < J_; ++j)
      if (j * dr_ >= std::abs(t) + eps_ + 2.0 * dr_) m = std::max(m, std::abs(value(n, j)));
  }
  return m;
}

CauchySolution cauchy_tr_solver(const DimensionParams& p, const PerturbationSpec& f, double t_lo,
                                double t_hi, double dr, double cfl) {
  if (p.d < 7) throw std::invalid_argument("the blowup experiment needs d >= 7");
  if (!(t_lo <= 0.0 && t_hi >= 0.0 && t_hi < 1.0)) throw std::invalid_argument("need t_lo <= 0 <= t_hi < 1");
  // Leapfrog bound sqrt(2/d), tightened by the damping term below.
  const double damping = 1.0 / 32.0;
  if (!(cfl > 0.0 && cfl <= std::sqrt(2.0 / p.d * (1.0 - 8.0 * damping))))
    throw std::invalid_argument("cfl outside (0, sqrt(2 (1 - 8 damping) / d)]");
  // Coarser grids leave a dispersive spike at the origin after the focus.
  if (dr <= 0.0) dr = f.epsilon / 320.0;

  CauchySolution sol;
  sol.dr_ = dr;
  sol.dt_ = cfl * dr;
  sol.eps_ = f.epsilon;
  const double reach = std::max(-t_lo, t_hi);
  sol.J_ = static_cast<int>(std::ceil((f.epsilon + reach) / dr)) + 16;
  // Two extra levels on each side feed the time derivative and the stencil.
  sol.lo_ = -static_cast<int>(std::ceil(-t_lo / sol.dt_)) - 3;
  sol.hi_ = static_cast<int>(std::ceil(t_hi / sol.dt_)) + 3;
  if ((sol.hi_ + 1) * sol.dt_ >= 1.0) throw std::invalid_argument("forward window reaches the blowup time");

  const int J = sol.J_;
  const double d = p.d;
  Eigen::VectorXd r(J);
  for (int j = 0; j < J; ++j) r(j) = j * dr;

  // Flux form r^{1-d} (r^{d-1} w_r)_r over cells [r_{j-1/2}, r_{j+1/2}] with
  // exact volumes: symmetric in the volume inner product, so the spectrum is
  // real and leapfrog is stable for dt <= dr sqrt(2/d).
  Eigen::VectorXd up(J), down(J);
  for (int j = 0; j < J; ++j) {
    const double rp = (j + 0.5) * dr, rm = std::max(j - 0.5, 0.0) * dr;
    const double vol = (std::pow(rp, d) - std::pow(rm, d)) / d;
    up(j) = std::pow(rp, d - 1.0) / (dr * vol);
    down(j) = j > 0 ? std::pow(rm, d - 1.0) / (dr * vol) : 0.0;
  }
  auto lap = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd out(J);
    for (int j = 0; j < J; ++j) {
      const double wp = j + 1 < J ? w(j + 1) : 0.0, wm = j > 0 ? w(j - 1) : 0.0;
      out(j) = up(j) * (wp - w(j)) - down(j) * (w(j) - wm);
    }
    return out;
  };
  // (d - 4)(r^2 ((u + w)^3 - u^3) + 3 ((u + w)^2 - u^2)) with u = u_1^*.
  auto source = [&](const Eigen::VectorXd& w, double t) {
    Eigen::VectorXd out(J);
    for (int j = 0; j < J; ++j) {
      const double u = profile_tr(p, 1.0, t, r(j)).u, x = w(j);
      out(j) = (d - 4.0) * (r(j) * r(j) * x * (3.0 * u * u + 3.0 * u * x + x * x) + 3.0 * x * (2.0 * u + x));
    }
    return out;
  };

  // Fourth-difference damping of the velocity (even reflection at r = 0). It
  // removes the grid-scale ringing the focus leaves at the origin and changes
  // smooth solutions at O(dr^4).
  auto fourth_difference = [&](const Eigen::VectorXd& v) {
    auto at = [&](int j) { return std::abs(j) < J ? v(std::abs(j)) : 0.0; };
    Eigen::VectorXd out(J);
    for (int j = 0; j < J; ++j) out(j) = at(j + 2) - 4.0 * at(j + 1) + 6.0 * at(j) - 4.0 * at(j - 1) + at(j - 2);
    return out;
  };

  Eigen::VectorXd w0(J), g0(J);
  for (int j = 0; j < J; ++j) {
    w0(j) = f.weight_f * bump(f, r(j));
    g0(j) = f.weight_g * bump(f, r(j));
  }
  w0(J - 1) = 0.0;
  g0(J - 1) = 0.0;

  sol.levels_.assign(sol.hi_ - sol.lo_ + 1, Eigen::VectorXd::Zero(J));
  auto level = [&](int n) -> Eigen::VectorXd& { return sol.levels_[n - sol.lo_]; };
  level(0) = w0;
  const Eigen::VectorXd acc0 = lap(w0) - source(w0, 0.0);

  for (int dir : {1, -1}) {
    const double h = dir * sol.dt_;
    const int last = dir > 0 ? sol.hi_ : sol.lo_;
    Eigen::VectorXd prev = w0, cur = w0 + h * g0 + 0.5 * h * h * acc0;
    cur(J - 1) = 0.0;
    level(dir) = cur;
    for (int n = dir; n != last; n += dir) {
      Eigen::VectorXd next = 2.0 * cur - prev + h * h * (lap(cur) - source(cur, n * sol.dt_)) -
                             damping * fourth_difference(cur - prev);
      next(J - 1) = 0.0;
      if (!next.allFinite() || next.cwiseAbs().maxCoeff() > 1.0)
        throw std::runtime_error("local existence window exceeded");
      prev = std::move(cur);
      cur = std::move(next);
      level(n + dir) = cur;
    }
  }
  return sol;
}

// ---------------------------------------------------------------- initial data

HyperboloidalIC initial_data_operator(const DimensionParams& p, const RadialGrid& g,
                                      const CauchySolution& sol, const PerturbationSpec& f,
                                      double T) {
  if (std::abs(T - 1.0) > f.epsilon * (1.0 + 1e-12)) throw std::invalid_argument("T outside [1 - eps, 1 + eps]");
  HyperboloidalIC ic;
  ic.T = T;
  ic.s0 = initial_time(f.epsilon);
  const double e = std::exp(-ic.s0), scale = std::exp(-2.0 * ic.s0);
  const int M = g.half_size();
  ic.state = {Eigen::VectorXd(M), Eigen::VectorXd(M), Parity::even};
  for (int i = 0; i < M; ++i) {
    const double y = g.eta()(i);
    const double h = standard_height().derivatives(y)[0];
    const double t = T + e * h, r = e * y;
    const auto w = sol.sample(t, r);
    const auto u1 = profile_tr(p, 1.0, t, r), uT = profile_tr(p, T, t, r);
    // d/ds of (t, r) along eta_T at fixed y.
    const double tdot = -e * h, rdot = -e * y;
    ic.state.f1(i) = scale * (w.w + (u1.u - uT.u));
    ic.state.f2(i) = scale * ((w.wt + (u1.ut - uT.ut)) * tdot + (w.wr + (u1.ur - uT.ur)) * rdot);
  }
  return ic;
}

// ---------------------------------------------------------------- evolution

ExperimentSetup make_setup(int d, double R, int N, int k) {
  const auto p = make_params(d);
  const RadialGrid g(R, N, Parity::even);
  auto L = assemble_L(p, g);
  require_resolved(L);
  auto P = riesz_projection(L);
  const auto sp = spectrum(p, R, N);
  return {p, g, std::move(L), std::move(P), symmetry_mode_state(p, g).stacked(), sp.gap, k};
}

double projection_coefficient(const ExperimentSetup& e, const StateVector& v) {
  return (e.P.A * v.stacked()).dot(e.mode) / e.mode.squaredNorm();
}

namespace {
TrajectoryPoint record(const ExperimentSetup& e, double s, const StateVector& v) {
  return {s, weighted_sobolev_norm(e.grid, v.f1, e.k, e.params.d),
          weighted_sobolev_norm(e.grid, v.f2, e.k - 1, e.params.d), projection_coefficient(e, v)};
}
}  // namespace

Trajectory evolve_nonlinear(const ExperimentSetup& e, const HyperboloidalIC& ic, double s_end,
                            int samples, double dt, bool nonlinear) {
  if (samples < 2 || !(s_end > ic.s0)) throw std::invalid_argument("bad sampling window");
  if (dt <= 0.0) dt = 0.8 * rk4_stable_step(e.L);
  const int M = e.grid.half_size();
  // N(y, a) = c2 a^2 + c3 a^3 at each node.
  Eigen::VectorXd c2(M), c3(M);
  for (int i = 0; i < M; ++i) {
    const double y = e.grid.eta()(i);
    const double np = nonlinearity_scalar(e.params, y, 1.0), nm = nonlinearity_scalar(e.params, y, -1.0);
    c2(i) = 0.5 * (np + nm);
    c3(i) = 0.5 * (np - nm);
  }
  auto rhs = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd out = e.L.A * x;
    if (nonlinear) {
      const auto a = x.head(M).array();
      out.tail(M).array() += c2.array() * a * a + c3.array() * a * a * a;
    }
    return out;
  };

  Trajectory tr;
  Eigen::VectorXd x = ic.state.stacked();
  const double span = (s_end - ic.s0) / (samples - 1);
  const int sub = std::max(1, static_cast<int>(std::ceil(span / dt)));
  const double h = span / sub;
  tr.points.push_back(record(e, ic.s0, ic.state));
  tr.states.push_back(ic.state);
  for (int i = 1; i < samples; ++i) {
    for (int j = 0; j < sub; ++j) {
      const Eigen::VectorXd k1 = rhs(x);
      const Eigen::VectorXd k2 = rhs(x + 0.5 * h * k1);
      const Eigen::VectorXd k3 = rhs(x + 0.5 * h * k2);
      const Eigen::VectorXd k4 = rhs(x + h * k3);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    const auto v = StateVector::from_stacked(x, Parity::even);
    tr.points.push_back(record(e, ic.s0 + i * span, v));
    tr.states.push_back(v);
    if (!x.allFinite() || x.head(M).cwiseAbs().maxCoeff() > 1.0) {
      tr.exploded = true;
      break;
    }
  }
  return tr;
}

DecayFit0 decay_fit(const std::vector<double>& s, const std::vector<double>& norms) {
  if (s.size() != norms.size() || s.size() < 10) throw std::invalid_argument("decay fit needs at least 10 samples");
  DecayFit0 out;
  if (*std::min_element(norms.begin(), norms.end()) <= 0.0) {
    out.omega0 = std::numeric_limits<double>::infinity();
    return out;
  }
  out.omega0 = -fitted_exponent(s, norms);
  double mean_s = 0.0, mean_l = 0.0;
  for (size_t i = 0; i < s.size(); ++i) {
    mean_s += s[i] / s.size();
    mean_l += std::log(norms[i]) / s.size();
  }
  double rss = 0.0;
  for (size_t i = 0; i < s.size(); ++i) {
    const double r = std::log(norms[i]) - (mean_l - out.omega0 * (s[i] - mean_s));
    rss += r * r;
  }
  out.residual = std::sqrt(rss / s.size());
  for (size_t i = s.size() / 2; i + 1 < s.size(); ++i)
    if (norms[i + 1] > norms[i] * 1.01) out.monotone_tail = false;
  return out;
}

// ---------------------------------------------------------------- shooting

namespace {
DecayReport make_report(const Trajectory& tr, double T, double s0, double fit_begin) {
  DecayReport rep;
  rep.series = tr.points;
  rep.T = T;
  rep.s0 = s0;
  rep.fit_begin = s0 + fit_begin;
  std::vector<double> s, nk, nk1;
  for (const auto& pt : tr.points)
    if (pt.s >= rep.fit_begin - 1e-12) {
      s.push_back(pt.s);
      nk.push_back(pt.norm_k);
      nk1.push_back(pt.norm_km1);
    }
  if (s.size() >= 10) {
    rep.fit_k = decay_fit(s, nk);
    rep.fit_km1 = decay_fit(s, nk1);
  }
  return rep;
}
}  // namespace

BlowupTimeResult adjust_blowup_time(const ExperimentSetup& e, const PerturbationSpec& f,
                                    const ShootingOptions& opt) {
  const double eps = f.epsilon;
  const auto sol = cauchy_tr_solver(e.params, f, -3.0 * eps - 0.05, 0.05, opt.dr);
  const double s0 = initial_time(eps), s_end = s0 + opt.span;
  BlowupTimeResult res;

  // Projection coefficient at s_end; an exploded run is continued by the e^s law.
  auto a_of = [&](double T) {
    ++res.evaluations;
    const auto ic = initial_data_operator(e.params, e.grid, sol, f, T);
    const auto tr = evolve_nonlinear(e, ic, s_end, opt.samples, opt.dt, opt.nonlinear);
    const auto& last = tr.points.back();
    return last.projection * std::exp(s_end - last.s);
  };

  double lo = 1.0, hi = 1.0, alo = a_of(1.0), ahi = alo;
  if (alo != 0.0) {
    bool found = false;
    for (double w = std::min(opt.window, eps); !found; w = std::min(2.0 * w, eps)) {
      const double am = a_of(1.0 - w), ap = a_of(1.0 + w);
      if ((am < 0) != (alo < 0)) {
        lo = 1.0 - w, hi = 1.0, ahi = alo, alo = am;
        found = true;
      } else if ((ap < 0) != (alo < 0)) {
        lo = 1.0, hi = 1.0 + w, ahi = ap;
        found = true;
      } else if (w >= eps) {
        throw std::runtime_error("instability not one-dimensional at this resolution");
      }
    }
    boost::uintmax_t iters = 80;
    const auto [a, b] = boost::math::tools::toms748_solve(
        a_of, lo, hi, alo, ahi, boost::math::tools::eps_tolerance<double>(48), iters);
    lo = a;
    hi = b;
    res.T_star = 0.5 * (a + b);
  }
  res.T_lo = lo;
  res.T_hi = hi;
  res.a_lo = alo;
  res.a_hi = ahi;

  const auto ic = initial_data_operator(e.params, e.grid, sol, f, res.T_star);
  res.trajectory = evolve_nonlinear(e, ic, s_end, opt.samples, opt.dt, opt.nonlinear);
  res.report = make_report(res.trajectory, res.T_star, s0, opt.fit_begin);
  return res;
}

std::string to_csv(const DecayReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "s,norm_k,norm_km1,projection_coeff\n";
  for (const auto& p : r.series) os << p.s << ',' << p.norm_k << ',' << p.norm_km1 << ',' << p.projection << '\n';
  return os.str();
}

std::string to_json(const BlowupTimeResult& r, const ExperimentSetup& e, const PerturbationSpec& f) {
  nlohmann::json j;
  j["T_star"] = r.T_star;
  j["omega0_fit"] = r.report.fit_k.omega0;
  j["omega0_fit_km1"] = r.report.fit_km1.omega0;
  j["fit_residual"] = r.report.fit_k.residual;
  j["monotone_tail"] = r.report.fit_k.monotone_tail;
  j["gap"] = e.gap;
  j["evaluations"] = r.evaluations;
  j["exploded"] = r.trajectory.exploded;
  j["parameters"] = {{"d", e.params.d},
                     {"R", e.grid.R()},
                     {"N", e.grid.N()},
                     {"k", e.k},
                     {"epsilon", f.epsilon},
                     {"amplitude", f.amplitude},
                     {"weight_f", f.weight_f},
                     {"weight_g", f.weight_g},
                     {"s0", r.report.s0},
                     {"fit_begin", r.report.fit_begin}};
  return j.dump(2);
}

}  // namespace hsc
