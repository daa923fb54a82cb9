// Self-similar binormal-flow profile: constant curvature c, torsion s/2.
// Integrates the Frenet system, extracts the asymptotic tangents A+- and
// the asymptotic normal B+, and builds the corner rotation and the limit
// normal vector.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "riemannlab/numerics.hpp"

namespace riemannlab {

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;

struct FrenetState {
  double s = 0.0;
  Vec3 G, T, n, b;
};

struct Profile {
  double c = 0.0;
  double step = 0.0;
  std::vector<FrenetState> samples;  // ascending in s
  double orthonormality_drift = 0.0; // max |F F^T - I| before re-orthonormalisation
};

// Frenet system T' = c n, n' = -c T + (s/2) b, b' = -(s/2) n from the
// canonical frame at s = 0 with G(0) = (0, 0, 2c), G' = T. Fourth-order
// Magnus steps (two Gauss nodes, Rodrigues exponential); G by Simpson.
// Every output_every-th step is stored.
Profile integrate_profile(double c, double S_max, double step, int output_every = 1);

// max over samples of |G/2 - (s/2) G' - G' ^ G''|.
double profile_residual(const Profile& profile);

// Angle theta with sin(theta/2) = e^{-pi c^2/2}.
double corner_angle(double c);

struct TangentFit {
  Vec3 A_plus, A_minus;
  double residual_plus = 0.0, residual_minus = 0.0;  // rms fit residuals
  double predicted_amplitude = 0.0;                  // 2c/s at the window start
};

// Least-squares fit of T over [S_max/2, S_max] (and the mirror window)
// against {1, cos phi/s, sin phi/s, 1/s^2, cos phi/s^2, sin phi/s^2,
// cos 2phi/s^2, sin 2phi/s^2}, phi = s^2/4 + c^2 log s.
TangentFit asymptotic_tangents(const Profile& profile);

struct NormalFit {
  CVec3 B_plus;
  double residual = 0.0;
};

// B+ = lim e^{i c^2 log s} N(s) for the parallel normal N = e^{i s^2/4}(n + i b),
// by a modulated tail fit.
NormalFit asymptotic_normal(const Profile& profile, double c);

struct ProfileAsymptotics {
  double c = 0.0;
  Vec3 A_plus, A_minus;
  CVec3 B_plus;
  Vec3 profile_normal0;   // n(0)
  Vec3 profile_binormal0; // b(0)
};

// Integrates the profile and extracts all asymptotic data in the frame
// produced by integrate_profile.
ProfileAsymptotics profile_asymptotics(double c, double S_max = 200.0, double step = 1e-3);

// Same data in the convention of the limit-normal formulas:
// A -> M A, B -> conj(M B), M = diag(1, -1, 1).
ProfileAsymptotics to_reference_convention(const ProfileAsymptotics& own);

// Proper rotation taking A+- to (sin theta/2, +-cos theta/2, 0). Maps
// (A+ ^ A-)/|A+ ^ A-| to (0, 0, -1), the cross product of the targets.
Mat3 rotation_to_corner(const Vec3& A_plus, const Vec3& A_minus, double theta, double tol = 1e-6);

struct LimitNormal {
  CVec3 N;
  double a1 = 0, a2 = 0, a3 = 0, b1 = 0, b2 = 0, b3 = 0;
};

// Limit normal from the decomposition of B+ on {A+, A-, A+^A-/|.|},
// using the reference-convention asymptotics. prefactor carries the
// caller's log-phase and arg(alpha_0) factors.
LimitNormal limit_normal(double c, double theta, cplx prefactor = 1.0);
LimitNormal limit_normal(const ProfileAsymptotics& reference, double theta, cplx prefactor = 1.0);

}  // namespace riemannlab
