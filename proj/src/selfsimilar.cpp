#include "riemannlab/selfsimilar.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace riemannlab {

namespace {

// Rows of F are T, n, b; F' = A(s) F.
Mat3 frenet_generator(double c, double s) {
  Mat3 A;
  A << 0.0, c, 0.0,
      -c, 0.0, 0.5 * s,
      0.0, -0.5 * s, 0.0;
  return A;
}

Mat3 skew_exp(const Mat3& K) {
  const Vec3 w(K(2, 1), K(0, 2), K(1, 0));
  const double th = w.norm();
  if (th < 1e-300) return Mat3::Identity();
  const double a = std::sin(th) / th;
  const double b = th < 1e-4 ? 0.5 - th * th / 24.0 : (1.0 - std::cos(th)) / (th * th);
  return Mat3::Identity() + a * K + b * K * K;
}

// Fourth-order Magnus step over [s, s + h].
Mat3 magnus_step(double c, double s, double h) {
  const double r = std::sqrt(3.0) / 6.0;
  const Mat3 A1 = frenet_generator(c, s + (0.5 - r) * h);
  const Mat3 A2 = frenet_generator(c, s + (0.5 + r) * h);
  const Mat3 Om = 0.5 * h * (A1 + A2) + (std::sqrt(3.0) / 12.0) * h * h * (A2 * A1 - A1 * A2);
  return skew_exp(Om);
}

double orthonormalize(Mat3& F) {
  const double drift = (F * F.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  Vec3 T = F.row(0).transpose().normalized();
  Vec3 n = F.row(1).transpose();
  n = (n - n.dot(T) * T).normalized();
  const Vec3 b = T.cross(n);
  F.row(0) = T.transpose();
  F.row(1) = n.transpose();
  F.row(2) = b.transpose();
  return drift;
}

FrenetState make_state(double s, const Vec3& G, const Mat3& F) {
  FrenetState st;
  st.s = s;
  st.G = G;
  st.T = F.row(0).transpose();
  st.n = F.row(1).transpose();
  st.b = F.row(2).transpose();
  return st;
}

// One direction of integration from s = 0; returns samples ordered away from 0.
std::vector<FrenetState> integrate_half(double c, double S_max, double h, int every, double& drift) {
  const long long steps = static_cast<long long>(std::ceil(S_max / std::abs(h) - 1e-9));
  std::vector<FrenetState> out;
  Mat3 F = Mat3::Identity();
  Vec3 G(0.0, 0.0, 2.0 * c);
  double s = 0.0;
  for (long long k = 1; k <= steps; ++k) {
    const Mat3 half = magnus_step(c, s, 0.5 * h);
    const Mat3 full = magnus_step(c, s, h);
    const Vec3 T0 = F.row(0).transpose();
    const Vec3 Tm = (half * F).row(0).transpose();
    F = full * F;
    drift = std::max(drift, orthonormalize(F));
    const Vec3 T1 = F.row(0).transpose();
    G += h / 6.0 * (T0 + 4.0 * Tm + T1);
    s = k * h;
    if (k % every == 0 || k == steps) out.push_back(make_state(s, G, F));
  }
  return out;
}

double phase_of(double s, double c) { return 0.25 * s * s + c * c * std::log(std::abs(s)); }

}  // namespace

Profile integrate_profile(double c, double S_max, double step, int output_every) {
  if (!(step > 0.0)) throw std::invalid_argument("integrate_profile: step must be > 0");
  if (step > 1e-2) throw std::invalid_argument("integrate_profile: step must be <= 1e-2");
  if (!(S_max > 0.0)) throw std::invalid_argument("integrate_profile: S_max must be > 0");
  if (c < 0.0) throw std::invalid_argument("integrate_profile: c must be >= 0");
  if (output_every < 1) throw std::invalid_argument("integrate_profile: output_every must be >= 1");
  Profile p;
  p.c = c;
  p.step = step;
  double drift = 0.0;
  auto neg = integrate_half(c, S_max, -step, output_every, drift);
  auto pos = integrate_half(c, S_max, step, output_every, drift);
  p.samples.reserve(neg.size() + pos.size() + 1);
  for (auto it = neg.rbegin(); it != neg.rend(); ++it) p.samples.push_back(*it);
  p.samples.push_back(make_state(0.0, Vec3(0.0, 0.0, 2.0 * c), Mat3::Identity()));
  for (auto& st : pos) p.samples.push_back(st);
  p.orthonormality_drift = drift;
  return p;
}

double profile_residual(const Profile& profile) {
  double worst = 0.0;
  for (const auto& st : profile.samples) {
    // G' ^ G'' = T ^ (c n) = c b
    const Vec3 r = 0.5 * st.G - 0.5 * st.s * st.T - profile.c * st.T.cross(st.n);
    worst = std::max(worst, r.norm());
  }
  return worst;
}

double corner_angle(double c) { return 2.0 * std::asin(std::exp(-0.5 * kPi * c * c)); }

namespace {

struct WindowFit {
  Vec3 constant;
  double rms = 0.0;
};

WindowFit fit_tangent_window(const Profile& p, double sign) {
  const double S = std::abs(sign > 0 ? p.samples.back().s : p.samples.front().s);
  std::vector<const FrenetState*> rows;
  for (const auto& st : p.samples) {
    const double u = sign * st.s;
    if (u >= 0.5 * S && u <= S) rows.push_back(&st);
  }
  if (rows.size() < 16) throw std::runtime_error("asymptotic_tangents: tail window has too few samples");
  Eigen::MatrixXd X(rows.size(), 8);
  Eigen::MatrixXd Y(rows.size(), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double u = std::abs(rows[i]->s);
    const double ph = phase_of(u, p.c);
    const double cs = std::cos(ph), sn = std::sin(ph);
    const double c2 = std::cos(2.0 * ph), s2 = std::sin(2.0 * ph);
    X.row(i) << 1.0, cs / u, sn / u, 1.0 / (u * u), cs / (u * u), sn / (u * u), c2 / (u * u), s2 / (u * u);
    Y.row(i) = rows[i]->T.transpose();
  }
  const Eigen::MatrixXd coef = X.colPivHouseholderQr().solve(Y);
  const Eigen::MatrixXd res = X * coef - Y;
  WindowFit f;
  f.constant = coef.row(0).transpose();
  f.rms = std::sqrt(res.squaredNorm() / double(rows.size()));
  return f;
}

}  // namespace

TangentFit asymptotic_tangents(const Profile& profile) {
  if (profile.samples.empty()) throw std::invalid_argument("asymptotic_tangents: empty profile");
  const double S = profile.samples.back().s;
  TangentFit out;
  const WindowFit plus = fit_tangent_window(profile, 1.0);
  const WindowFit minus = fit_tangent_window(profile, -1.0);
  out.A_plus = plus.constant.normalized();
  out.A_minus = minus.constant.normalized();
  out.residual_plus = plus.rms;
  out.residual_minus = minus.rms;
  out.predicted_amplitude = 2.0 * profile.c / (0.5 * S);
  const double cap = 10.0 * out.predicted_amplitude + 1e-12;
  if (plus.rms > cap || minus.rms > cap)
    throw std::runtime_error("asymptotic_tangents: fit residual exceeds 10x the oscillation amplitude");
  return out;
}

NormalFit asymptotic_normal(const Profile& profile, double c) {
  if (profile.samples.empty()) throw std::invalid_argument("asymptotic_normal: empty profile");
  const double S = profile.samples.back().s;
  std::vector<const FrenetState*> rows;
  for (const auto& st : profile.samples)
    if (st.s >= 0.5 * S && st.s <= S) rows.push_back(&st);
  if (rows.size() < 16) throw std::runtime_error("asymptotic_normal: tail window has too few samples");
  const cplx I(0.0, 1.0);
  Eigen::MatrixXcd X(rows.size(), 8);
  Eigen::MatrixXcd Y(rows.size(), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double s = rows[i]->s;
    const double ph = phase_of(s, c);
    const cplx e1 = std::polar(1.0, ph), e2 = std::polar(1.0, 2.0 * ph);
    X.row(i) << 1.0, e1 / s, std::conj(e1) / s, 1.0 / (s * s), e1 / (s * s), std::conj(e1) / (s * s),
        e2 / (s * s), std::conj(e2) / (s * s);
    // e^{i c^2 log s} N(s), N = e^{i s^2/4}(n + i b)
    const CVec3 Z = std::polar(1.0, ph) * (rows[i]->n.cast<cplx>() + I * rows[i]->b.cast<cplx>());
    Y.row(i) = Z.transpose();
  }
  const Eigen::MatrixXcd coef = X.colPivHouseholderQr().solve(Y);
  const Eigen::MatrixXcd res = X * coef - Y;
  NormalFit out;
  out.B_plus = coef.row(0).transpose();
  out.residual = std::sqrt(res.squaredNorm() / double(rows.size()));
  const double cap = 10.0 * 2.0 * c / (0.5 * S) + 1e-12;
  if (out.residual > cap)
    throw std::runtime_error("asymptotic_normal: fit residual exceeds 10x the oscillation amplitude");
  return out;
}

ProfileAsymptotics profile_asymptotics(double c, double S_max, double step) {
  const int every = std::max(1, static_cast<int>(std::lround(0.01 / step)));
  const Profile p = integrate_profile(c, S_max, step, every);
  const TangentFit tf = asymptotic_tangents(p);
  const NormalFit nf = asymptotic_normal(p, c);
  ProfileAsymptotics a;
  a.c = c;
  a.A_plus = tf.A_plus;
  a.A_minus = tf.A_minus;
  a.B_plus = nf.B_plus;
  a.profile_normal0 = Vec3::UnitY();
  a.profile_binormal0 = Vec3::UnitZ();
  return a;
}

ProfileAsymptotics to_reference_convention(const ProfileAsymptotics& own) {
  const Vec3 m(1.0, -1.0, 1.0);
  ProfileAsymptotics r = own;
  r.A_plus = own.A_plus.cwiseProduct(m);
  r.A_minus = own.A_minus.cwiseProduct(m);
  r.B_plus = own.B_plus.cwiseProduct(m.cast<cplx>()).conjugate();
  r.profile_normal0 = own.profile_normal0.cwiseProduct(m);
  r.profile_binormal0 = own.profile_binormal0.cwiseProduct(m);
  return r;
}

Mat3 rotation_to_corner(const Vec3& A_plus, const Vec3& A_minus, double theta, double tol) {
  const double sh = std::sin(0.5 * theta), ch = std::cos(0.5 * theta);
  const Vec3 tp(sh, ch, 0.0), tm(sh, -ch, 0.0);
  const double ang_src = std::acos(std::clamp(A_plus.normalized().dot(A_minus.normalized()), -1.0, 1.0));
  const double ang_dst = std::acos(std::clamp(tp.dot(tm), -1.0, 1.0));
  if (std::abs(ang_src - ang_dst) > tol)
    throw std::invalid_argument("rotation_to_corner: angle between A+ and A- does not match theta");
  const Vec3 s = A_plus + A_minus, d = A_plus - A_minus;
  if (s.norm() < 1e-14 || d.norm() < 1e-14)
    throw std::invalid_argument("rotation_to_corner: degenerate tangent pair");
  Mat3 U, V;
  U.col(0) = s.normalized();
  U.col(1) = (d - d.dot(U.col(0)) * U.col(0)).normalized();
  U.col(2) = U.col(0).cross(U.col(1));
  V.col(0) = (tp + tm).normalized();
  V.col(1) = (tp - tm).normalized();
  V.col(2) = V.col(0).cross(V.col(1));
  return V * U.transpose();
}

LimitNormal limit_normal(const ProfileAsymptotics& ref, double theta, cplx prefactor) {
  const double c = ref.c;
  if (!(c > 0.0)) throw std::invalid_argument("limit_normal: c must be > 0");
  if (std::abs(std::sin(0.5 * theta) - std::exp(-0.5 * kPi * c * c)) > 1e-9)
    throw std::invalid_argument("limit_normal: theta inconsistent with c");
  const double e = std::exp(-kPi * c * c);
  const double eh = std::exp(0.5 * kPi * c * c);
  const double root = std::sqrt(1.0 - e);
  const Vec3 ReB = ref.B_plus.real(), ImB = ref.B_plus.imag();
  const Vec3& A = ref.A_plus;
  LimitNormal out;
  // first coordinates and orthogonality to A+
  out.a2 = ReB(0) * eh / (2.0 * (1.0 - e));
  out.a1 = out.a2 * (1.0 - 2.0 * e);
  out.b2 = ImB(0) * eh / (2.0 * (1.0 - e));
  out.b1 = out.b2 * (1.0 - 2.0 * e);
  // second coordinates
  out.a3 = (ReB(1) - (out.a1 - out.a2) * A(1)) * root / A(2);
  out.b3 = (ImB(1) - (out.b1 - out.b2) * A(1)) * root / A(2);
  const double sh = std::sin(0.5 * theta), ch = std::cos(0.5 * theta);
  const Vec3 re((out.a1 + out.a2) * sh, (out.a1 - out.a2) * ch, out.a3);
  const Vec3 im((out.b1 + out.b2) * sh, (out.b1 - out.b2) * ch, out.b3);
  out.N = prefactor * (re.cast<cplx>() + cplx(0.0, 1.0) * im.cast<cplx>());
  return out;
}

LimitNormal limit_normal(double c, double theta, cplx prefactor) {
  if (!(c > 0.0)) throw std::invalid_argument("limit_normal: c must be > 0");
  if (std::abs(std::sin(0.5 * theta) - std::exp(-0.5 * kPi * c * c)) > 1e-9)
    throw std::invalid_argument("limit_normal: theta inconsistent with c");
  return limit_normal(to_reference_convention(profile_asymptotics(c, 200.0, 1e-3)), theta, prefactor);
}

}  // namespace riemannlab
