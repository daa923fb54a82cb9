#include "riemannlab/nls_remainder.hpp"

#include <cmath>
#include <stdexcept>

namespace riemannlab {

namespace {

const cplx kSqrt4PiI = std::sqrt(cplx(0.0, 4.0 * kPi));

}  // namespace

double AlphaSequence::mass() const {
  double m = 0.0;
  for (const auto& a : values) m += std::norm(a);
  return m;
}

double curvature_from_angle(double theta) {
  const double sh = std::sin(0.5 * theta);
  if (!(sh > 0.0) || sh > 1.0 + 1e-15) throw std::invalid_argument("curvature_from_angle: invalid angle");
  return std::sqrt(std::max(0.0, -(2.0 / kPi) * std::log(std::min(sh, 1.0))));
}

AlphaSequence build_alpha(long long n, double nu, double Gamma, RationalTorsion torsion) {
  if (n < 1) throw std::invalid_argument("build_alpha: n must be >= 1");
  if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("build_alpha: nu must be in (0, 1]");
  if (!(Gamma >= 0.0) || Gamma / double(n) >= kPi)
    throw std::invalid_argument("build_alpha: Gamma/n must lie in [0, pi)");
  AlphaSequence a;
  a.n = n;
  a.nu = nu;
  a.Gamma = Gamma;
  a.torsion = torsion;
  a.theta_n = kPi - Gamma / double(n);
  a.c_n = curvature_from_angle(a.theta_n);
  a.J = static_cast<long long>(std::floor(std::pow(double(n), nu) + 1e-9));
  a.values.resize(static_cast<std::size_t>(2 * a.J + 1));
  const double w = torsion.omega0();
  for (long long k = -a.J; k <= a.J; ++k)
    a.values[static_cast<std::size_t>(k + a.J)] = a.c_n * std::polar(1.0, double(k) * w);
  return a;
}

Eigen::VectorXcd remainder_data(const AlphaSequence& alpha, long long halo) {
  if (halo < 0) throw std::invalid_argument("remainder_data: halo must be >= 0");
  const long long K = alpha.J + halo;
  Eigen::VectorXcd d = Eigen::VectorXcd::Zero(2 * K + 1);
  for (long long k = -alpha.J; k <= alpha.J; ++k) d(k + K) = kSqrt4PiI * alpha.at(k);
  return d;
}

ResonanceIndex build_resonance_index(const Eigen::VectorXcd& data) {
  ResonanceIndex idx;
  idx.K = (data.size() - 1) / 2;
  const long long K = idx.K;
  idx.by_k.resize(static_cast<std::size_t>(2 * K + 1));
  auto m2 = [&](long long j) { return std::norm(data(j + K)); };
  for (long long k = -K; k <= K; ++k) {
    auto& list = idx.by_k[static_cast<std::size_t>(k + K)];
    for (long long j1 = -K; j1 <= K; ++j1)
      for (long long j2 = -K; j2 <= K; ++j2) {
        const long long j3 = k - j1 + j2;
        if (j3 < -K || j3 > K) continue;
        const long long D = 2 * (j1 - j2) * (j3 - j2);
        if (D == 0) continue;
        ResonantTriple tr;
        tr.j1 = int(j1);
        tr.j2 = int(j2);
        tr.j3 = int(j3);
        tr.Delta = double(D);
        tr.omega = (m2(k) - m2(j1) + m2(j2) - m2(j3)) / (4.0 * kPi);
        list.push_back(tr);
      }
  }
  return idx;
}

cplx nonresonant_force(const ResonanceIndex& index, long long k, double t, const Eigen::VectorXcd& state) {
  if (!(t > 0.0)) throw std::invalid_argument("nonresonant_force: t must be > 0");
  const long long K = index.K;
  if (k < -K || k > K) return 0.0;
  const double s = 1.0 / (4.0 * t);
  const double ls = std::log(std::sqrt(t));
  cplx sum = 0.0;
  for (const auto& tr : index.triples(k)) {
    const cplx g = state(tr.j1 + K) * std::conj(state(tr.j2 + K)) * state(tr.j3 + K);
    sum += std::polar(1.0, -std::fmod(tr.Delta * s, 2.0 * kPi) - tr.omega * ls) * g;
  }
  return sum / (8.0 * kPi * t);
}

CubicForce::CubicForce(const Eigen::VectorXcd& data) {
  K_ = (data.size() - 1) / 2;
  const std::size_t L = static_cast<std::size_t>(2 * K_ + 1);
  fft_size_ = 1;
  while (fft_size_ < 3 * L) fft_size_ *= 2;
  data_mod2_ = data.cwiseAbs2().array();
  a_.assign(fft_size_, 0.0);
  b_.assign(fft_size_, 0.0);
  v_.resize(static_cast<Eigen::Index>(L));
  p_.resize(static_cast<Eigen::Index>(L));
}

void CubicForce::operator()(double t, const Eigen::VectorXcd& state, Eigen::VectorXcd& force) {
  const long long K = K_;
  const double s = 1.0 / (4.0 * t);
  const double L = std::log(t) / (8.0 * kPi);  // log sqrt t / (4 pi)
  // z_j = e^{i j^2 s} by z_{j+1} = z_j e^{i(2j+1)s}; symmetric in j
  z_.resize(K + 1);
  z_[0] = 1.0;
  cplx d = std::polar(1.0, s);
  const cplx d2 = d * d;
  for (long long j = 0; j < K; ++j) {
    z_[std::size_t(j + 1)] = z_[std::size_t(j)] * d;
    d *= d2;
  }
  // v_j = z_j e^{i |b_j|^2 L} g_j; the log phase is shared by equal moduli
  double last_m = -1.0;
  cplx last_p = 1.0;
  for (long long j = -K; j <= K; ++j) {
    const double m = data_mod2_(j + K);
    if (m != last_m) {
      last_m = m;
      last_p = std::polar(1.0, m * L);
    }
    p_(j + K) = last_p;
    v_(j + K) = z_[std::size_t(std::abs(j))] * last_p * state(j + K);
  }
  // index j + K for g_j1, g_j3 and K - j for conj(g_j2): output k + 3K
  for (long long j = -K; j <= K; ++j) {
    a_[std::size_t(j + K)] = v_(j + K);
    b_[std::size_t(K - j)] = std::conj(v_(j + K));
  }
  fft_.fwd(A_, a_);
  fft_.fwd(B_, b_);
  for (std::size_t i = 0; i < fft_size_; ++i) A_[i] = A_[i] * A_[i] * B_[i];
  fft_.inv(c_, A_);
  const double total = v_.squaredNorm();
  force.resize(v_.size());
  const double pref = 1.0 / (8.0 * kPi * t);
  for (long long k = -K; k <= K; ++k) {
    const cplx vk = v_(k + K);
    const cplx F = c_[std::size_t(k + 3 * K)] - (2.0 * total - std::norm(vk)) * vk;
    force(k + K) = pref * std::conj(z_[std::size_t(std::abs(k))] * p_(k + K)) * F;
  }
}

void remainder_rhs(CubicForce& force, const Eigen::VectorXcd& data, double t, const Eigen::VectorXcd& R,
                   Eigen::VectorXcd& dR) {
  const Eigen::VectorXcd g = data + R;
  force(t, g, dR);
  const double pref = 1.0 / (8.0 * kPi * t);
  const cplx I(0.0, 1.0);
  for (Eigen::Index k = 0; k < g.size(); ++k)
    dR(k) = -I * dR(k) + I * pref * (std::norm(g(k)) - std::norm(data(k))) * g(k);
}

namespace {

RemainderTrajectory run_remainder(const AlphaSequence& alpha, const RemainderOptions& opt, double eps,
                                  double gamma) {
  if (!(eps > 0.0 && eps < opt.T && opt.T <= 1.0))
    throw std::invalid_argument("integrate_remainder: need 0 < eps < T <= 1");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("integrate_remainder: tol must be > 0");
  if (opt.samples < 2) throw std::invalid_argument("integrate_remainder: samples must be >= 2");
  RemainderTrajectory tr;
  tr.data = remainder_data(alpha, opt.halo);
  tr.K = (tr.data.size() - 1) / 2;
  tr.eps = eps;
  tr.mass0 = tr.data.squaredNorm();
  const Eigen::VectorXcd& data = tr.data;
  const long long K = tr.K;

  std::vector<double> t_out(static_cast<std::size_t>(opt.samples));
  for (int i = 0; i < opt.samples; ++i)
    t_out[std::size_t(i)] = eps * std::pow(opt.T / eps, double(i) / double(opt.samples - 1));
  t_out.back() = opt.T;
  std::vector<double> stops;
  for (std::size_t i = 1; i < t_out.size(); ++i) stops.push_back(0.25 / t_out[i]);

  Eigen::VectorXcd R = Eigen::VectorXcd::Zero(data.size());
  tr.t.push_back(eps);
  tr.R.push_back(R);
  CubicForce force(data);
  if (tr.mass0 == 0.0) {
    for (std::size_t i = 1; i < t_out.size(); ++i) {
      tr.t.push_back(t_out[i]);
      tr.R.push_back(R);
    }
    return tr;
  }
  if (opt.keep_dense) {
    Eigen::VectorXcd d0;
    remainder_rhs(force, data, eps, R, d0);
    tr.dense_s.push_back(0.25 / eps);
    tr.dense_R.push_back(R);
    tr.dense_dRds.push_back(-4.0 * eps * eps * d0);
  }

  // dR/ds = dR/dt * dt/ds, dt/ds = -4 t^2
  auto rhs = [&](double s, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
    const double t = 0.25 / s;
    remainder_rhs(force, data, t, y, dy);
    dy *= -4.0 * t * t;
  };
  auto obs = [&](double s, const Eigen::VectorXcd& y, const Eigen::VectorXcd& dy, int stop) {
    const double t = 0.25 / s;
    const double mass = (data + y).squaredNorm();
    tr.max_mass_drift = std::max(tr.max_mass_drift, std::abs(mass - tr.mass0) / tr.mass0);
    double l1 = 0.0, l11 = 0.0;
    for (long long k = -K; k <= K; ++k) {
      const double a = std::abs(y(k + K));
      l1 += a;
      l11 += (1.0 + double(std::abs(k))) * a;
    }
    const double tg = std::pow(t, -gamma);
    tr.sup_l1 = std::max(tr.sup_l1, tg * l1);
    tr.sup_l11 = std::max(tr.sup_l11, tg * l11);
    // dR/dt = dR/ds / (-4 t^2)
    tr.sup_deriv_l1 = std::max(tr.sup_deriv_l1, dy.cwiseAbs().sum() / (4.0 * t));
    if (opt.keep_dense) {
      tr.dense_s.push_back(s);
      tr.dense_R.push_back(y);
      tr.dense_dRds.push_back(dy);
    }
    if (stop >= 0) {
      tr.t.push_back(t_out[std::size_t(stop) + 1]);
      tr.R.push_back(y);
    }
  };
  // R is generated by the cubic term, so local errors are measured against
  // max|beta|^3; this keeps the relative accuracy of R uniform in n.
  const double cubic = std::pow(data.cwiseAbs().maxCoeff(), 3);
  OdeOptions oo;
  oo.rtol = opt.tol;
  oo.atol = opt.tol * cubic;
  oo.max_steps = opt.max_steps;
  try {
    tr.stats = dopri5(rhs, 0.25 / eps, R, stops, oo, obs);
  } catch (const OdeFailure& e) {
    throw OdeFailure(std::string(e.what()) + " at t = " + std::to_string(0.25 / e.t_reached),
                     0.25 / e.t_reached);
  }
  return tr;
}

}  // namespace

RemainderTrajectory integrate_remainder(const AlphaSequence& alpha, const RemainderOptions& opt, double gamma) {
  RemainderTrajectory tr = run_remainder(alpha, opt, opt.eps, gamma);
  if (opt.startup_check) {
    const RemainderTrajectory half = run_remainder(alpha, opt, 0.5 * opt.eps, gamma);
    tr.startup_change = (tr.R.back() - half.R.back()).cwiseAbs().maxCoeff();
  }
  return tr;
}

namespace {

// Cubic Hermite data on one step [s0, s1].
struct HermiteStep {
  double s0, s1;
  const Eigen::VectorXcd *R0, *R1, *d0, *d1;

  void eval(double s, Eigen::VectorXcd& R, Eigen::VectorXcd& dRds) const {
    const double h = s1 - s0, u = (s - s0) / h;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    R = h00 * *R0 + h * h10 * *d0 + h01 * *R1 + h * h11 * *d1;
    const double g00 = 6 * u * u - 6 * u, g10 = 3 * u * u - 4 * u + 1;
    const double g01 = -g00, g11 = 3 * u * u - 2 * u;
    dRds = (g00 / h) * *R0 + g10 * *d0 + (g01 / h) * *R1 + g11 * *d1;
  }
};

}  // namespace

PicardMap picard_map(const RemainderTrajectory& traj, double t) {
  if (traj.dense_s.size() < 2) throw std::invalid_argument("picard_map: trajectory has no dense steps");
  const double s_end = 0.25 / t;
  if (!(s_end <= traj.dense_s.front() * (1 + 1e-14) && s_end >= traj.dense_s.back() * (1 - 1e-14)))
    throw std::invalid_argument("picard_map: t outside the trajectory range");
  const long long K = traj.K;
  const Eigen::VectorXcd& data = traj.data;
  const ResonanceIndex index = build_resonance_index(data);
  const Eigen::Index M = data.size();
  const cplx I(0.0, 1.0);
  double max_delta = 1.0;
  for (const auto& list : index.by_k)
    for (const auto& tr : list) max_delta = std::max(max_delta, std::abs(tr.Delta));

  PicardMap out;
  out.nonresonant_ibp = Eigen::VectorXcd::Zero(M);
  out.nonresonant_direct = Eigen::VectorXcd::Zero(M);
  out.resonant = Eigen::VectorXcd::Zero(M);
  out.R_at_t = traj.dense_R.front();

  // boundary term B_k(tau) = tau sum e^{-i Delta/4tau} e^{-i omega log sqrt tau} P / (2 pi Delta)
  auto boundary = [&](double tau, const Eigen::VectorXcd& g) {
    Eigen::VectorXcd B = Eigen::VectorXcd::Zero(M);
    const double ls = std::log(std::sqrt(tau));
    const double s = 0.25 / tau;
    for (long long k = -K; k <= K; ++k) {
      cplx acc = 0.0;
      for (const auto& tr : index.triples(k)) {
        const cplx P = g(tr.j1 + K) * std::conj(g(tr.j2 + K)) * g(tr.j3 + K);
        acc += std::polar(1.0, -std::fmod(tr.Delta * s, 2 * kPi) - tr.omega * ls) * P / (2 * kPi * tr.Delta);
      }
      B(k + K) = tau * acc;
    }
    return B;
  };

  Eigen::VectorXcd R, dRds, g, dg, w(M), v(M), dv(M);
  const auto& gl = gauss_legendre(12);
  for (std::size_t i = 0; i + 1 < traj.dense_s.size(); ++i) {
    const double a = traj.dense_s[i];
    if (a <= s_end) break;
    HermiteStep hs{a, traj.dense_s[i + 1], &traj.dense_R[i], &traj.dense_R[i + 1], &traj.dense_dRds[i],
                   &traj.dense_dRds[i + 1]};
    const double b = std::max(hs.s1, s_end);
    // at most about six radians of the fastest phase per 12-node panel
    const int panels = 1 + static_cast<int>(std::abs(a - b) * max_delta / 6.0);
    for (int p = 0; p < panels; ++p) {
      const double pa = a + (b - a) * p / panels, pb = a + (b - a) * (p + 1) / panels;
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double s = 0.5 * (pa + pb) + 0.5 * (pb - pa) * gl.nodes[q];
        // d tau = -ds/(4 s^2); integrating from eps upward means s descending
        const double wq = 0.5 * (pa - pb) * gl.weights[q] * 0.25 / (s * s);
        const double tau = 0.25 / s;
        hs.eval(s, R, dRds);
        g = data + R;
        dg = -4.0 * s * s * dRds;  // d/dtau
        // e^{-i Delta s} e^{-i omega log sqrt tau} = conj(w_k) w_j1 conj(w_j2) w_j3
        const double L = std::log(tau) / (8 * kPi);
        for (long long j = -K; j <= K; ++j) {
          const long double ph = std::fmod(static_cast<long double>(s) * (long double)(j * j), kTwoPiL);
          w(j + K) = std::polar(1.0, double(ph) + std::norm(data(j + K)) * L);
        }
        v = w.cwiseProduct(g);
        dv = w.cwiseProduct(dg);
        for (long long k = -K; k <= K; ++k) {
          cplx ibp = 0.0, direct = 0.0;
          for (const auto& tr : index.triples(k)) {
            const cplx g1 = v(tr.j1 + K), g2 = std::conj(v(tr.j2 + K)), g3 = v(tr.j3 + K);
            const cplx P = g1 * g2 * g3;
            const cplx dP = dv(tr.j1 + K) * g2 * g3 + g1 * std::conj(dv(tr.j2 + K)) * g3 + g1 * g2 * dv(tr.j3 + K);
            direct += P;
            // d/dtau (e^{-i omega log sqrt tau} tau P) = e^{..} ((1 - i omega/2) P + tau P')
            ibp += ((1.0 - 0.5 * I * tr.omega) * P + tau * dP) / tr.Delta;
          }
          const cplx ek = std::conj(w(k + K));
          out.nonresonant_direct(k + K) += wq * (-I) * ek * direct / (8 * kPi * tau);
          out.nonresonant_ibp(k + K) += wq * ek * ibp / (2 * kPi);
          out.resonant(k + K) += wq * I * (std::norm(g(k + K)) - std::norm(data(k + K))) * g(k + K) / (8 * kPi * tau);
        }
      }
    }
    if (b == s_end) {
      hs.eval(s_end, R, dRds);
      out.R_at_t = R;
    }
  }
  // -i int f = -(B(t) - B(eps)) + int of the by-parts integrand
  out.nonresonant_ibp -= boundary(t, data + out.R_at_t) - boundary(traj.eps, data + traj.dense_R.front());
  return out;
}

double picard_verify(const RemainderTrajectory& traj, double t) {
  const PicardMap m = picard_map(traj, t);
  return (m.nonresonant_ibp + m.resonant - m.R_at_t).cwiseAbs().maxCoeff();
}

DecayTable decay_study(const std::vector<long long>& n_list, double nu, double Gamma, RationalTorsion torsion,
                       double gamma, double q, const RemainderOptions& opt) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("decay_study: gamma must be in (0, 1)");
  if (!(q > 1.0)) throw std::invalid_argument("decay_study: q must be > 1");
  DecayTable tab;
  std::vector<double> ns, l1, dv, l11;
  for (long long n : n_list) {
    const AlphaSequence a = build_alpha(n, nu, Gamma, torsion);
    const RemainderTrajectory tr = integrate_remainder(a, opt, gamma);
    DecayRow row;
    row.n = n;
    row.sup_l1 = tr.sup_l1;
    row.sup_deriv_l1 = tr.sup_deriv_l1;
    row.sup_l11 = tr.sup_l11;
    row.mass_drift = tr.max_mass_drift;
    tab.rows.push_back(row);
    if (row.sup_l1 > 0.0 && row.sup_deriv_l1 > 0.0 && row.sup_l11 > 0.0) {
      ns.push_back(double(n));
      l1.push_back(row.sup_l1);
      dv.push_back(row.sup_deriv_l1);
      l11.push_back(row.sup_l11);
    }
  }
  if (ns.size() >= 2) {
    tab.slope_l1 = fit_loglog(ns, l1).slope;
    tab.slope_deriv = fit_loglog(ns, dv).slope;
    tab.slope_l11 = fit_loglog(ns, l11).slope;
  }
  tab.predicted_l1 = -(2.0 - 2.0 / q);
  tab.predicted_deriv = 0.0;
  tab.predicted_l11 = -(1.0 - 2.0 / q);
  return tab;
}

FilamentValue evaluate_u(double t, double x, const AlphaSequence& alpha, const Eigen::VectorXcd& R) {
  if (!(t > 0.0)) throw std::invalid_argument("evaluate_u: t must be > 0");
  const long long K = R.size() > 0 ? (R.size() - 1) / 2 : alpha.J;
  if (R.size() > 0 && K < alpha.J) throw std::invalid_argument("evaluate_u: R must cover the support");
  const double total = alpha.mass();
  const double ls = std::log(std::sqrt(t));
  const double rt = std::sqrt(t);
  FilamentValue out{0.0, 0.0};
  for (long long j = -K; j <= K; ++j) {
    cplx g = alpha.at(j);
    if (R.size() > 0) g += R(j + K) / kSqrt4PiI;
    if (g == 0.0) continue;
    const double dx = x - double(j);
    const cplx term = std::polar(1.0, -(std::norm(alpha.at(j)) - total) * ls + dx * dx / (4.0 * t)) * g / rt;
    out.u += term;
    out.u_x += term * cplx(0.0, dx / (2.0 * t));
  }
  return out;
}

}  // namespace riemannlab
