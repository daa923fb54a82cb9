// Parallel frame (T, N) and position chi at the corner x = 0, evolved
// together with the remainder system of the polygonal-line ansatz.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "riemannlab/nls_remainder.hpp"
#include "riemannlab/selfsimilar.hpp"

namespace riemannlab {

struct FramePoint {
  double t = 0.0;
  Vec3 T = Vec3::UnitX();
  CVec3 N = CVec3(0.0, 1.0, cplx(0.0, 1.0));  // e1 + i e2
};

// max entry of |F F^T - I| for F = (T, Re N, Im N).
double frame_defect(const FramePoint& f);

// Data fixed by the central corner: the rotation Theta taking the profile
// tangents A+- of curvature c = |alpha_0| to the corner directions, the
// reference normal and the modulation phase Phi.
struct CornerGauge {
  double c = 0.0;
  double theta = kPi;
  Mat3 Theta = Mat3::Identity();
  CVec3 N_ref;        // lim e^{i Phi(t)} N(t, 0) for the unperturbed corner
  double weighted_log = 0.0;  // sum_{j != 0} |alpha_j|^2 log|j|
  double side_mass = 0.0;     // sum_{j != 0} |alpha_j|^2
  double Phi(double t) const { return weighted_log - side_mass * std::log(std::sqrt(t)); }
};
CornerGauge corner_gauge(const AlphaSequence& alpha);

// T(eps, 0) = Theta e1 and N(eps, 0) = e^{-i Phi(eps)} N_ref, with
// N_ref = e^{i arg alpha_0} e^{i sum |alpha_j|^2 log|j|} Theta (e2 + i e3).
FramePoint init_frame(const AlphaSequence& alpha, double eps);
FramePoint init_frame(const CornerGauge& gauge, double eps);

struct FrameOptions {
  double eps = 1e-4;
  double T_end = 0.25;
  double tol = 1e-10;
  int samples = 64;         // geometric output grid on [max(eps, sample_min), T_end]
  double sample_min = 1e-3;
  std::vector<double> times;  // explicit increasing output times in (eps, 1], replaces the grid
  long long halo = 0;
  long long max_steps = 400000000;
};

struct FrameRun {
  AlphaSequence alpha;
  CornerGauge gauge;
  double eps = 0.0;
  std::vector<double> t;
  std::vector<FramePoint> frames;
  std::vector<Vec3> chi;               // chi(t, 0), anchored at the origin for t -> 0
  std::vector<CVec3> gn;               // int_0^t sum_j e^{-i j^2/4tau} tau^{-1/2} g_n dtau
  std::vector<Eigen::VectorXcd> R;     // remainder on -K..K
  double startup_budget = 0.0;         // 2 c sqrt(eps), the self-similar start-up piece
  double orthonormality_drift = 0.0;   // largest defect before re-orthonormalisation
  double max_mass_drift = 0.0;
  OdeStats stats;
};

// Integrates the remainder system, T_t = Im(conj(u_x) N),
// N_t = -i u_x T + i(|u|^2/2 - sum|alpha|^2/(2t)) N, chi_t = Im(conj(u) N)
// and the g_n integral jointly in s = 1/(4t), with u and u_x at x = 0
// taken from the ansatz. Re-orthonormalises after every accepted step.
// Integrator failures are rethrown with the time reached.
FrameRun evolve_frame(const AlphaSequence& alpha, const FrameOptions& opt = {});

struct CornerTrajectory {
  std::vector<double> t;
  std::vector<Vec3> chi;
  long long n = 0;
  double Gamma = 0.0;
  RationalTorsion torsion;
  double startup_budget = 0.0;
};
CornerTrajectory corner_trajectory(const FrameRun& run);

// Comparison target (0, Re R~(t), Im R~(t)) and the same vector under the
// orientation of this code's corner frame, (0, -Im R~(t), -Re R~(t)).
Vec3 theorem1_target(double t, double Gamma, RationalTorsion torsion, bool reflected = false);

struct Theorem1Error {
  double e_n = 0.0;            // against (0, Re R~, Im R~)
  double e_n_reflected = 0.0;  // against (0, -Im R~, -Re R~)
  double max_first = 0.0;      // max_t |n chi_1(t, 0)|
  double target_scale = 0.0;   // max_t |R~(t)|
  double gn_at_end = 0.0;      // |gn_diagnostic| at T_end
  FrameRun run;
};

Theorem1Error theorem1_study(long long n, double nu, double Gamma, RationalTorsion torsion,
                             const FrameOptions& opt = {});

// max over the sample grid of |n chi_n(t, 0) - (0, Re R~(t), Im R~(t))|.
double theorem1_error(long long n, double nu, double Gamma, RationalTorsion torsion, double T_end,
                      int t_samples = 64);

// int_0^t sum_{|j|<=n^nu} e^{-i j^2/4 tau} tau^{-1/2} g_n(tau) d tau with
// g_n = e^{i Phi_n} N_n(tau, 0) - N_ref, a complex 3-vector.
CVec3 gn_diagnostic(long long n, double nu, double Gamma, RationalTorsion torsion, double t,
                    const FrameOptions& opt = {});

}  // namespace riemannlab
