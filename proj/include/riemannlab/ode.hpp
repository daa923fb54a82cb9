// Dormand-Prince 5(4) with local error control, for Eigen vector states.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace riemannlab {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  Eigen::ArrayXd atol_vec;  // per-component absolute tolerance, overrides atol when sized
  double h_initial = 0.0;  // 0 picks a starting step automatically
  double h_max = 0.0;      // 0 means unbounded
  long long max_steps = 200000000;
};

struct OdeStats {
  long long accepted = 0;
  long long rejected = 0;
  long long evaluations = 0;
};

class OdeFailure : public std::runtime_error {
 public:
  OdeFailure(const std::string& what, double t) : std::runtime_error(what), t_reached(t) {}
  double t_reached;
};

namespace detail {

template <class Vec>
double error_norm(const Vec& err, const Vec& y0, const Vec& y1, const OdeOptions& opt) {
  const Eigen::ArrayXd m = y0.cwiseAbs().array().max(y1.cwiseAbs().array());
  const Eigen::ArrayXd sc = opt.atol_vec.size() == m.size() ? (opt.atol_vec + opt.rtol * m).eval()
                                                           : (opt.atol + opt.rtol * m).eval();
  return std::sqrt((err.cwiseAbs().array() / sc).square().mean());
}

struct NoProjection {
  template <class Vec>
  void operator()(double, Vec&) const {}
};

}  // namespace detail

// Integrates y' = f(t, y) from t0 through every stop (monotone, either
// direction). After each accepted step obs(t, y, y', stop) is called, with
// stop the index of the stop just reached or -1. f(t, y, dy) writes dy.
// project(t, y) may pull an accepted state back onto a constraint set. The
// stored derivative is kept, so projections must be small against the tolerance.
template <class Vec, class Rhs, class Observer, class Projection>
OdeStats dopri5(Rhs&& f, double t0, Vec& y, const std::vector<double>& stops,
                const OdeOptions& opt, Observer&& obs, Projection&& project) {
  constexpr bool projects = !std::is_same_v<std::decay_t<Projection>, detail::NoProjection>;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  OdeStats st;
  if (stops.empty()) return st;
  const double dir = stops.back() >= t0 ? 1.0 : -1.0;
  const Eigen::Index n = y.size();
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), y1(n), err(n);

  double t = t0;
  f(t, y, k1);
  ++st.evaluations;

  double h = std::abs(opt.h_initial);
  if (h == 0.0) {
    const double a0 = opt.atol_vec.size() > 0 ? opt.atol_vec.minCoeff() : opt.atol;
    const double sc = a0 + opt.rtol * y.cwiseAbs().maxCoeff();
    const double d0 = y.cwiseAbs().maxCoeff() / sc, d1 = k1.cwiseAbs().maxCoeff() / sc;
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, std::abs(stops.back() - t0));
    yt = y + dir * h * k1;
    f(t + dir * h, yt, k2);
    ++st.evaluations;
    const double d2 = (k2 - k1).cwiseAbs().maxCoeff() / sc / h;
    const double m = std::max(d1, d2);
    const double h1 = m <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / m, 0.2);
    h = std::min(100.0 * h, h1);
  }
  if (opt.h_max > 0.0) h = std::min(h, opt.h_max);

  for (std::size_t si = 0; si < stops.size(); ++si) {
    const double target = stops[si];
    if ((target - t) * dir < 0.0) throw std::invalid_argument("dopri5: stops must be monotone");
    while ((target - t) * dir > 0.0) {
      if (st.accepted + st.rejected >= opt.max_steps)
        throw OdeFailure("dopri5: step budget exhausted", t);
      bool last = false;
      double hs = h;
      if (hs >= std::abs(target - t) * (1.0 - 1e-12)) {
        hs = std::abs(target - t);
        last = true;
      }
      if (hs < 1e-14 * std::max(1.0, std::abs(t)))
        throw OdeFailure("dopri5: step size underflow", t);
      const double hh = dir * hs;
      yt = y + hh * (a21 * k1);
      f(t + c2 * hh, yt, k2);
      yt = y + hh * (a31 * k1 + a32 * k2);
      f(t + c3 * hh, yt, k3);
      yt = y + hh * (a41 * k1 + a42 * k2 + a43 * k3);
      f(t + c4 * hh, yt, k4);
      yt = y + hh * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      f(t + c5 * hh, yt, k5);
      yt = y + hh * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      const double tn = last ? target : t + hh;
      f(t + hh, yt, k6);
      y1 = y + hh * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      f(tn, y1, k7);
      st.evaluations += 6;
      err = hh * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double en = detail::error_norm(err, y, y1, opt);
      if (!std::isfinite(en)) throw OdeFailure("dopri5: non-finite state", t);
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      if (en <= 1.0) {
        t = tn;
        y = y1;
        k1 = k7;
        if constexpr (projects) project(t, y);
        ++st.accepted;
        obs(t, static_cast<const Vec&>(y), static_cast<const Vec&>(k1), last ? int(si) : -1);
        // keep the natural step when only clipped by the stop
        if (!last) h = hs * fac;
      } else {
        ++st.rejected;
        h = hs * std::min(1.0, fac);
        last = false;
      }
      if (opt.h_max > 0.0) h = std::min(h, opt.h_max);
    }
  }
  return st;
}

template <class Vec, class Rhs, class Observer>
OdeStats dopri5(Rhs&& f, double t0, Vec& y, const std::vector<double>& stops,
                const OdeOptions& opt, Observer&& obs) {
  return dopri5(std::forward<Rhs>(f), t0, y, stops, opt, std::forward<Observer>(obs), detail::NoProjection{});
}

}  // namespace riemannlab
