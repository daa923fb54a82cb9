#include "riemannlab/bf_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace riemannlab {

namespace {

// rotation about the third body axis (binormal)
Mat3 rot_b(double a) {
  Mat3 R;
  R << std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a), 0.0, 0.0, 0.0, 1.0;
  return R;
}

// rotation about the first body axis (tangent)
Mat3 rot_t(double a) {
  Mat3 R;
  R << 1.0, 0.0, 0.0, 0.0, std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a);
  return R;
}

Vec3 slerp(const Vec3& a, const Vec3& b, double tau) {
  const double om = std::atan2(a.cross(b).norm(), a.dot(b));
  if (om < 1e-15) return a;
  return ((std::sin((1.0 - tau) * om) * a + std::sin(tau * om) * b) / std::sin(om)).normalized();
}

void normalise_columns(Eigen::Matrix3Xd& T) { T.colwise().normalize(); }

class MapStepper {
 public:
  explicit MapStepper(const GridCurve& c)
      : periodic_(c.periodic), h_(c.h), a_(c.anchor), n_(c.size()), k1_(3, n_), k2_(3, n_), k3_(3, n_),
        k4_(3, n_), y_(3, n_) {}

  void rhs(const Eigen::Matrix3Xd& T, Eigen::Matrix3Xd& d, Vec3& dchi) const {
    const double ih2 = 1.0 / (h_ * h_);
    const Eigen::Index n = n_;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index l = i - 1, r = i + 1;
      if (periodic_) {
        if (l < 0) l += n;
        if (r >= n) r -= n;
      } else if (i == 0 || i == n - 1) {
        d.col(i).setZero();
        continue;
      }
      const Vec3 lap = (T.col(r) - 2.0 * T.col(i) + T.col(l)) * ih2;
      d.col(i) = Vec3(T.col(i)).cross(lap);
    }
    Eigen::Index l = a_ - 1, r = a_ + 1;
    if (periodic_) {
      if (l < 0) l += n;
      if (r >= n) r -= n;
    }
    dchi = Vec3(T.col(a_)).cross(Vec3((T.col(r) - T.col(l)) / (2.0 * h_)));
  }

  // one RK4 step, returns max ||T| - 1| before the final projection
  double step(Eigen::Matrix3Xd& T, Vec3& chi, double dt) {
    Vec3 c1, c2, c3, c4;
    rhs(T, k1_, c1);
    y_ = T + 0.5 * dt * k1_;
    normalise_columns(y_);
    rhs(y_, k2_, c2);
    y_ = T + 0.5 * dt * k2_;
    normalise_columns(y_);
    rhs(y_, k3_, c3);
    y_ = T + dt * k3_;
    normalise_columns(y_);
    rhs(y_, k4_, c4);
    T += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    chi += (dt / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
    const double defect = (T.colwise().norm().array() - 1.0).abs().maxCoeff();
    normalise_columns(T);
    return defect;
  }

 private:
  bool periodic_;
  double h_;
  Eigen::Index a_, n_;
  Eigen::Matrix3Xd k1_, k2_, k3_, k4_, y_;
};

void check_finite(const Eigen::Matrix3Xd& T, const Vec3& chi, double t) {
  if (!T.allFinite() || !chi.allFinite())
    throw BlowUp("run_schrodinger_map: non-finite state at t = " + std::to_string(t), t);
}

double far_drift(const GridCurve& c, const Eigen::Matrix3Xd& T) {
  if (c.periodic || c.size() < 4) return 0.0;
  const Eigen::Index n = c.size();
  return std::max((T.col(1) - c.T.col(1)).norm(), (T.col(n - 2) - c.T.col(n - 2)).norm());
}

void record(MapRun& run, const GridCurve& c, double t, const Eigen::Matrix3Xd& T, const Vec3& chi, bool keep) {
  run.t.push_back(t);
  run.chi0.push_back(chi);
  if (keep) {
    GridCurve g = c;
    g.T = T;
    integrate_chi(g, chi);
    run.curves.push_back(std::move(g));
  }
}

}  // namespace

long long PolygonalLineSpec::corners() const {
  return static_cast<long long>(std::floor(std::pow(double(n), nu) + 1e-9));
}

double PolygonalLineSpec::edge() const { return std::pow(double(n), -mu); }

GridCurve build_polygonal_line(const PolygonalLineSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("build_polygonal_line: n must be >= 1");
  if (!(spec.theta > 0.0 && spec.theta < kPi))
    throw std::invalid_argument("build_polygonal_line: theta must lie in (0, pi)");
  if (spec.cells_per_edge < 2) throw std::invalid_argument("build_polygonal_line: need >= 2 cells per edge");
  const long long J = spec.corners();
  const double L = spec.L > 0.0 ? spec.L : double(J + 8);
  if (L < double(J) + 1.0) throw std::invalid_argument("build_polygonal_line: L must exceed the last corner by 1");
  const long long cells = spec.cells_per_edge;
  const double e = spec.edge();
  const long long half = std::llround(L * double(cells));

  const double th = spec.theta, sh = std::sin(0.5 * th), ch = std::cos(0.5 * th);
  const double delta = kPi - th, om = spec.torsion.omega0();
  const Mat3 step = rot_b(delta) * rot_t(om);
  const Mat3 back = step.transpose();
  // frames of the segments before (G) and after (F) each corner
  std::vector<Mat3> F(static_cast<std::size_t>(J + 1)), G(static_cast<std::size_t>(J + 1));
  G[0].col(0) = Vec3(sh, -ch, 0.0);
  G[0].col(1) = Vec3(ch, sh, 0.0);
  G[0].col(2) = Vec3::UnitZ();
  F[0] = G[0] * step;
  for (long long k = 1; k <= J; ++k) {
    F[std::size_t(k)] = F[std::size_t(k - 1)] * step;
    G[std::size_t(k)] = G[std::size_t(k - 1)] * back;
  }
  // corner positions P_k and P_{-k}
  std::vector<Vec3> Pp(static_cast<std::size_t>(J + 1)), Pm(static_cast<std::size_t>(J + 1));
  Pp[0] = Pm[0] = Vec3::Zero();
  for (long long k = 1; k <= J; ++k) {
    Pp[std::size_t(k)] = Pp[std::size_t(k - 1)] + e * F[std::size_t(k - 1)].col(0);
    Pm[std::size_t(k)] = Pm[std::size_t(k - 1)] - e * G[std::size_t(k - 1)].col(0);
  }

  GridCurve c;
  c.h = e / double(cells);
  c.x0 = -double(half) * c.h;
  c.anchor = half;
  c.T.resize(3, 2 * half + 1);
  c.chi.resize(3, 2 * half + 1);
  for (long long k = -J; k <= J; ++k) c.corners.push_back(double(k) * e);
  for (long long q = -half; q <= half; ++q) {
    const Eigen::Index i = q + half;
    const double u = double(q) / double(cells);  // position in edge units
    if (q >= 0) {
      const long long k = std::min(q / cells, J);
      c.T.col(i) = F[std::size_t(k)].col(0);
      c.chi.col(i) = Pp[std::size_t(k)] + (u - double(k)) * e * F[std::size_t(k)].col(0);
    } else {
      const long long m = std::min((-q + cells - 1) / cells - 1, J);
      c.T.col(i) = G[std::size_t(m)].col(0);
      c.chi.col(i) = Pm[std::size_t(m)] + (u + double(m)) * e * G[std::size_t(m)].col(0);
    }
  }
  return c;
}

GridCurve mollify(const GridCurve& curve, int w) {
  if (w < 2) throw std::invalid_argument("mollify: w must be >= 2 cells");
  std::vector<double> xs = curve.corners;
  std::sort(xs.begin(), xs.end());
  const double W = double(w) * curve.h;
  for (std::size_t k = 1; k < xs.size(); ++k)
    if (2.0 * W > xs[k] - xs[k - 1] + 1e-12 * curve.h)
      throw std::invalid_argument("mollify: smoothing windows overlap");
  GridCurve out = curve;
  const Eigen::Index n = curve.size();
  for (double xc : xs) {
    const Eigen::Index ic = std::llround((xc - curve.x0) / curve.h);
    if (ic - w < 0 || ic + w >= n) throw std::invalid_argument("mollify: corner too close to the grid end");
    const Vec3 a = curve.T.col(ic - w), b = curve.T.col(ic + w);
    for (Eigen::Index q = -w; q <= w; ++q) {
      const double tau = double(q) / double(w) + 0.5;
      if (tau <= 0.0 || tau >= 1.0) continue;
      out.T.col(ic + q) = slerp(a, b, tau);
    }
  }
  // Re-integrate, then pin the curve to the input on both sides of the
  // window nearest the anchor. A smoothed turn is shorter along the
  // bisector than the corner, so the two sides share that slip equally.
  integrate_chi(out, Vec3::Zero());
  Vec3 shift = curve.chi.col(curve.anchor) - out.chi.col(curve.anchor);
  for (double xc : xs) {
    const Eigen::Index ic = std::llround((xc - curve.x0) / curve.h);
    if (std::abs(ic - curve.anchor) <= w)
      shift = 0.5 * (curve.chi.col(ic - w) - out.chi.col(ic - w) + curve.chi.col(ic + w) - out.chi.col(ic + w));
  }
  out.chi.colwise() += shift;
  return out;
}

GridCurve make_circle(double r, int N) {
  if (!(r > 0.0) || N < 8) throw std::invalid_argument("make_circle: need r > 0 and N >= 8");
  GridCurve c;
  c.periodic = true;
  c.h = 2.0 * kPi * r / double(N);
  c.x0 = 0.0;
  c.anchor = 0;
  c.T.resize(3, N);
  c.chi.resize(3, N);
  for (int i = 0; i < N; ++i) {
    const double a = 2.0 * kPi * double(i) / double(N);
    c.chi.col(i) = Vec3(r * std::cos(a), r * std::sin(a), 0.0);
    c.T.col(i) = Vec3(-std::sin(a), std::cos(a), 0.0);
  }
  return c;
}

double discrete_turning(const GridCurve& curve) {
  double s = 0.0;
  for (Eigen::Index i = 0; i + 1 < curve.size(); ++i)
    s += std::atan2(Vec3(curve.T.col(i)).cross(Vec3(curve.T.col(i + 1))).norm(),
                    curve.T.col(i).dot(curve.T.col(i + 1)));
  return s;
}

void integrate_chi(GridCurve& curve, const Vec3& chi_anchor) {
  const Eigen::Index n = curve.size(), a = curve.anchor;
  curve.chi.resize(3, n);
  curve.chi.col(a) = chi_anchor;
  for (Eigen::Index i = a + 1; i < n; ++i)
    curve.chi.col(i) = curve.chi.col(i - 1) + 0.5 * curve.h * (curve.T.col(i - 1) + curve.T.col(i));
  for (Eigen::Index i = a - 1; i >= 0; --i)
    curve.chi.col(i) = curve.chi.col(i + 1) - 0.5 * curve.h * (curve.T.col(i + 1) + curve.T.col(i));
}

MapRun run_schrodinger_map(const GridCurve& curve, double dt, long long steps, long long output_every,
                           bool keep_curves) {
  if (!(dt > 0.0) || dt > 0.25 * curve.h * curve.h * (1.0 + 1e-12))
    throw std::invalid_argument("run_schrodinger_map: need 0 < dt <= h^2/4");
  if (steps < 0 || output_every < 1) throw std::invalid_argument("run_schrodinger_map: bad step counts");
  MapRun run;
  Eigen::Matrix3Xd T = curve.T;
  Vec3 chi = curve.chi.col(curve.anchor);
  MapStepper st(curve);
  record(run, curve, 0.0, T, chi, keep_curves);
  for (long long k = 1; k <= steps; ++k) {
    run.max_unit_defect = std::max(run.max_unit_defect, st.step(T, chi, dt));
    const double t = double(k) * dt;
    if (k % 64 == 0 || k == steps) check_finite(T, chi, t);
    if (k % output_every == 0 || k == steps) {
      run.far_field_drift = std::max(run.far_field_drift, far_drift(curve, T));
      record(run, curve, t, T, chi, keep_curves);
    }
  }
  return run;
}

MapRun run_schrodinger_map_to(const GridCurve& curve, double dt_max, const std::vector<double>& times,
                              bool keep_curves) {
  if (!(dt_max > 0.0) || dt_max > 0.25 * curve.h * curve.h * (1.0 + 1e-12))
    throw std::invalid_argument("run_schrodinger_map: need 0 < dt <= h^2/4");
  MapRun run;
  Eigen::Matrix3Xd T = curve.T;
  Vec3 chi = curve.chi.col(curve.anchor);
  MapStepper st(curve);
  double t = 0.0;
  for (double target : times) {
    if (target < t) throw std::invalid_argument("run_schrodinger_map_to: times must increase");
    const double span = target - t;
    const long long m = span > 0.0 ? static_cast<long long>(std::ceil(span / dt_max - 1e-9)) : 0;
    for (long long k = 0; k < m; ++k) run.max_unit_defect = std::max(run.max_unit_defect, st.step(T, chi, span / double(m)));
    t = target;
    check_finite(T, chi, t);
    run.far_field_drift = std::max(run.far_field_drift, far_drift(curve, T));
    record(run, curve, t, T, chi, keep_curves);
  }
  return run;
}

FrameComparison compare_with_frame(const PolygonalLineSpec& spec, const std::vector<double>& t_grid, int w,
                                   const FrameOptions& frame_opt) {
  if (t_grid.empty()) throw std::invalid_argument("compare_with_frame: empty time grid");
  FrameComparison out;
  out.t = t_grid;
  const double scale = std::pow(double(spec.n), spec.mu);  // chi = n^mu chi~(t n^{-2 mu})
  const GridCurve c0 = mollify(build_polygonal_line(spec), w);
  out.h = c0.h * scale;
  std::vector<double> pde_times;
  for (double t : t_grid) pde_times.push_back(t / (scale * scale));
  const MapRun run = run_schrodinger_map_to(c0, 0.25 * c0.h * c0.h, pde_times);
  for (const Vec3& v : run.chi0) out.pde.push_back(scale * v);

  const double Gamma = double(spec.n) * (kPi - spec.theta);
  FrameOptions fo = frame_opt;
  fo.times = t_grid;
  fo.eps = std::min(fo.eps, 0.5 * t_grid.front());
  const FrameRun fr = evolve_frame(build_alpha(spec.n, spec.nu, Gamma, spec.torsion), fo);
  out.frame = fr.chi;

  std::vector<Vec3> pts = out.frame;
  pts.push_back(Vec3::Zero());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) out.diameter = std::max(out.diameter, (pts[i] - pts[j]).norm());
  double d = 0.0;
  for (std::size_t i = 0; i < out.t.size(); ++i) d = std::max(d, (out.pde[i] - out.frame[i]).norm());
  out.distance = out.diameter > 0.0 ? d / out.diameter : d;
  return out;
}

}  // namespace riemannlab
