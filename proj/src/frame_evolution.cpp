#include "riemannlab/frame_evolution.hpp"

#include <stdexcept>
#include <string>

namespace riemannlab {

namespace {

const cplx kI(0.0, 1.0);
const cplx kSqrt4PiI = std::sqrt(cplx(0.0, 4.0 * kPi));

Mat3 frame_matrix(const Vec3& T, const CVec3& N) {
  Mat3 F;
  F.col(0) = T;
  F.col(1) = N.real();
  F.col(2) = N.imag();
  return F;
}

// Gram-Schmidt on (T, Re N), Im N from the cross product.
void orthonormalise(Vec3& T, CVec3& N) {
  T.normalize();
  Vec3 e1 = N.real();
  e1 -= e1.dot(T) * T;
  e1.normalize();
  const Vec3 e2 = T.cross(e1);
  N = e1.cast<cplx>() + kI * e2.cast<cplx>();
}

}  // namespace

double frame_defect(const FramePoint& f) {
  const Mat3 F = frame_matrix(f.T, f.N);
  return (F.transpose() * F - Mat3::Identity()).cwiseAbs().maxCoeff();
}

CornerGauge corner_gauge(const AlphaSequence& alpha) {
  CornerGauge g;
  const cplx a0 = alpha.at(0);
  g.c = std::abs(a0);
  if (!(g.c > 0.0)) throw std::invalid_argument("corner_gauge: alpha_0 must be nonzero");
  g.theta = corner_angle(g.c);
  const ProfileAsymptotics pa = profile_asymptotics(g.c);
  g.Theta = rotation_to_corner(pa.A_plus, pa.A_minus, g.theta);
  for (long long j = -alpha.J; j <= alpha.J; ++j) {
    if (j == 0) continue;
    const double m = std::norm(alpha.at(j));
    g.side_mass += m;
    g.weighted_log += m * std::log(double(std::abs(j)));
  }
  const CVec3 profile_N = Vec3::UnitY().cast<cplx>() + kI * Vec3::UnitZ().cast<cplx>();
  g.N_ref = std::polar(1.0, std::arg(a0) + g.weighted_log) * (g.Theta.cast<cplx>() * profile_N);
  return g;
}

FramePoint init_frame(const CornerGauge& gauge, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("init_frame: eps must be > 0");
  FramePoint f;
  f.t = eps;
  f.T = gauge.Theta * Vec3::UnitX();
  f.N = std::polar(1.0, -gauge.Phi(eps)) * gauge.N_ref;
  return f;
}

FramePoint init_frame(const AlphaSequence& alpha, double eps) {
  return init_frame(corner_gauge(alpha), eps);
}

FrameRun evolve_frame(const AlphaSequence& alpha, const FrameOptions& opt) {
  const double eps = opt.eps;
  if (opt.times.empty()) {
    if (!(eps > 0.0 && eps < opt.T_end && opt.T_end <= 1.0))
      throw std::invalid_argument("evolve_frame: need 0 < eps < T_end <= 1");
    if (opt.samples < 2) throw std::invalid_argument("evolve_frame: samples must be >= 2");
  } else if (!(eps > 0.0)) {
    throw std::invalid_argument("evolve_frame: eps must be > 0");
  }
  if (!(opt.tol > 0.0)) throw std::invalid_argument("evolve_frame: tol must be > 0");

  FrameRun run;
  run.alpha = alpha;
  run.gauge = corner_gauge(alpha);
  run.eps = eps;
  const CornerGauge& gauge = run.gauge;
  run.startup_budget = 2.0 * gauge.c * std::sqrt(eps);

  const Eigen::VectorXcd data = remainder_data(alpha, opt.halo);
  const long long K = (data.size() - 1) / 2;
  const long long J = alpha.J;
  const Eigen::Index M = data.size();
  const double total = alpha.mass();
  const double mass0 = data.squaredNorm();
  std::vector<cplx> a(static_cast<std::size_t>(M));
  Eigen::ArrayXd a2(M);
  for (long long j = -K; j <= K; ++j) {
    a[std::size_t(j + K)] = alpha.at(j);
    a2(j + K) = std::norm(alpha.at(j));
  }

  // state: R (M), T (3, real), N (3), chi (3, real), gn integral (3)
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(M + 12);
  const FramePoint f0 = init_frame(gauge, eps);
  y.segment(M, 3) = f0.T.cast<cplx>();
  y.segment(M + 3, 3) = f0.N;
  y.segment(M + 6, 3) = (run.startup_budget * (gauge.Theta * Vec3::UnitZ())).cast<cplx>();

  std::vector<double> t_out = opt.times;
  if (t_out.empty()) {
    const double t0 = std::max(eps, opt.sample_min);
    if (!(t0 < opt.T_end)) throw std::invalid_argument("evolve_frame: empty sample window");
    t_out.resize(static_cast<std::size_t>(opt.samples));
    for (int i = 0; i < opt.samples; ++i)
      t_out[std::size_t(i)] = t0 * std::pow(opt.T_end / t0, double(i) / double(opt.samples - 1));
    t_out.back() = opt.T_end;
  } else {
    for (std::size_t i = 0; i < t_out.size(); ++i)
      if (!(t_out[i] >= eps && t_out[i] <= 1.0) || (i > 0 && !(t_out[i] > t_out[i - 1])))
        throw std::invalid_argument("evolve_frame: times must increase within [eps, 1]");
  }

  auto record = [&](double t, const Eigen::VectorXcd& st) {
    FramePoint f;
    f.t = t;
    f.T = st.segment(M, 3).real();
    f.N = st.segment(M + 3, 3);
    run.t.push_back(t);
    run.frames.push_back(f);
    run.chi.push_back(st.segment(M + 6, 3).real());
    run.gn.push_back(st.segment(M + 9, 3));
    run.R.push_back(st.head(M));
  };
  std::vector<double> stops;
  std::vector<double> stop_t;
  for (double t : t_out) {
    if (t <= eps) {
      record(eps, y);
      continue;
    }
    stops.push_back(0.25 / t);
    stop_t.push_back(t);
  }

  CubicForce force(data);
  Eigen::VectorXcd dR(M);
  auto rhs = [&](double s, const Eigen::VectorXcd& st, Eigen::VectorXcd& dy) {
    const double t = 0.25 / s;
    const double rt = std::sqrt(t), ls = std::log(rt);
    const auto R = st.head(M);
    if (mass0 > 0.0) {
      remainder_rhs(force, data, t, R, dR);
      dy.head(M) = dR;
    } else {
      dy.head(M).setZero();
    }
    // u(t, 0), u_x(t, 0) and the theta sum sum_{|j|<=J} e^{-i j^2 s}
    cplx u = 0.0, ux = 0.0, theta = 0.0;
    for (long long j = -K; j <= K; ++j) {
      const double ph = double(j) * double(j) * s;
      if (std::abs(j) <= J) theta += std::polar(1.0, -ph);
      const cplx g = a[std::size_t(j + K)] + R(j + K) / kSqrt4PiI;
      if (g == 0.0) continue;
      const cplx term = std::polar(1.0, -(a2(j + K) - total) * ls + ph) * g / rt;
      u += term;
      ux += term * cplx(0.0, -double(j) / (2.0 * t));
    }
    const Vec3 T = st.segment(M, 3).real();
    const CVec3 N = st.segment(M + 3, 3);
    const CVec3 Tt = (std::conj(ux) * N).imag().cast<cplx>();
    const CVec3 Nt = -kI * ux * T.cast<cplx>() + kI * (0.5 * std::norm(u) - total / (2.0 * t)) * N;
    const CVec3 chit = (std::conj(u) * N).imag().cast<cplx>();
    const CVec3 gt = (theta / rt) * (std::polar(1.0, gauge.Phi(t)) * N - gauge.N_ref);
    dy.segment(M, 3) = Tt;
    dy.segment(M + 3, 3) = Nt;
    dy.segment(M + 6, 3) = chit;
    dy.segment(M + 9, 3) = gt;
    dy *= -4.0 * t * t;
  };
  auto project = [&](double, Eigen::VectorXcd& st) {
    Vec3 T = st.segment(M, 3).real();
    CVec3 N = st.segment(M + 3, 3);
    FramePoint f;
    f.T = T;
    f.N = N;
    run.orthonormality_drift = std::max(run.orthonormality_drift, frame_defect(f));
    orthonormalise(T, N);
    st.segment(M, 3) = T.cast<cplx>();
    st.segment(M + 3, 3) = N;
  };
  auto obs = [&](double, const Eigen::VectorXcd& st, const Eigen::VectorXcd&, int stop) {
    if (mass0 > 0.0) {
      const double mass = (data + st.head(M)).squaredNorm();
      run.max_mass_drift = std::max(run.max_mass_drift, std::abs(mass - mass0) / mass0);
    }
    if (stop >= 0) record(stop_t[std::size_t(stop)], st);
  };

  OdeOptions oo;
  oo.rtol = opt.tol;
  oo.max_steps = opt.max_steps;
  oo.atol_vec = Eigen::ArrayXd::Constant(M + 12, opt.tol);
  oo.atol_vec.head(M) = opt.tol * std::max(std::pow(data.cwiseAbs().maxCoeff(), 3), 1e-300);
  oo.atol_vec.segment(M + 6, 3) = opt.tol * gauge.c;
  try {
    run.stats = dopri5(rhs, 0.25 / eps, y, stops, oo, obs, project);
  } catch (const OdeFailure& e) {
    throw OdeFailure(std::string(e.what()) + " at t = " + std::to_string(0.25 / e.t_reached),
                     0.25 / e.t_reached);
  }
  return run;
}

CornerTrajectory corner_trajectory(const FrameRun& run) {
  CornerTrajectory c;
  c.t = run.t;
  c.chi = run.chi;
  c.n = run.alpha.n;
  c.Gamma = run.alpha.Gamma;
  c.torsion = run.alpha.torsion;
  c.startup_budget = run.startup_budget;
  return c;
}

Vec3 theorem1_target(double t, double Gamma, RationalTorsion torsion, bool reflected) {
  const cplx r = r_tilde(t, Gamma, torsion, 100000).value;
  return reflected ? Vec3(0.0, -r.imag(), -r.real()) : Vec3(0.0, r.real(), r.imag());
}

Theorem1Error theorem1_study(long long n, double nu, double Gamma, RationalTorsion torsion,
                             const FrameOptions& opt) {
  Theorem1Error out;
  out.run = evolve_frame(build_alpha(n, nu, Gamma, torsion), opt);
  const FrameRun& run = out.run;
  for (std::size_t i = 0; i < run.t.size(); ++i) {
    const double t = run.t[i];
    const Vec3 v = double(n) * run.chi[i];
    const Vec3 target = theorem1_target(t, Gamma, torsion, false);
    const Vec3 refl = theorem1_target(t, Gamma, torsion, true);
    out.e_n = std::max(out.e_n, (v - target).norm());
    out.e_n_reflected = std::max(out.e_n_reflected, (v - refl).norm());
    out.max_first = std::max(out.max_first, std::abs(v(0)));
    out.target_scale = std::max(out.target_scale, target.norm());
  }
  out.gn_at_end = run.gn.back().norm();
  return out;
}

double theorem1_error(long long n, double nu, double Gamma, RationalTorsion torsion, double T_end,
                      int t_samples) {
  FrameOptions o;
  o.T_end = T_end;
  o.samples = t_samples;
  return theorem1_study(n, nu, Gamma, torsion, o).e_n;
}

CVec3 gn_diagnostic(long long n, double nu, double Gamma, RationalTorsion torsion, double t,
                    const FrameOptions& opt) {
  FrameOptions o = opt;
  o.T_end = t;
  o.samples = 2;
  o.sample_min = std::min(o.sample_min, 0.5 * t);
  return evolve_frame(build_alpha(n, nu, Gamma, torsion), o).gn.back();
}

}  // namespace riemannlab
