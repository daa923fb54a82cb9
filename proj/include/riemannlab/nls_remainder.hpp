// Corner data alpha_k for a polygonal line and the remainder system for
// R_k(t) in the cubic Schroedinger ansatz built on it.
//
// The remainder system is stated for data beta_k. The filament function u
// uses beta_k = sqrt(4 pi i) alpha_k, so integrate_remainder runs on that
// data and evaluate_u divides the remainders by sqrt(4 pi i).
#pragma once

#include <Eigen/Dense>
#ifndef EIGEN_FFTW_DEFAULT
#define EIGEN_FFTW_DEFAULT
#endif
#include <unsupported/Eigen/FFT>
#include <vector>

#include "riemannlab/numerics.hpp"
#include "riemannlab/ode.hpp"
#include "riemannlab/theta_sums.hpp"

namespace riemannlab {

struct AlphaSequence {
  long long n = 1;
  double nu = 1.0;
  double Gamma = 0.0;
  RationalTorsion torsion;
  double c_n = 0.0;
  double theta_n = kPi;
  long long J = 0;              // support is -J..J
  std::vector<cplx> values;     // alpha_{-J..J}

  cplx at(long long k) const {
    return (k < -J || k > J) ? cplx(0.0) : values[static_cast<std::size_t>(k + J)];
  }
  double mass() const;  // sum |alpha_k|^2
};

// theta_n = pi - Gamma/n, c_n = sqrt(-(2/pi) ln sin(theta_n/2)),
// alpha_k = c_n e^{i k omega_0} for |k| <= floor(n^nu).
AlphaSequence build_alpha(long long n, double nu, double Gamma, RationalTorsion torsion);

// c from the angle law sin(theta/2) = e^{-pi c^2/2}.
double curvature_from_angle(double theta);

// Data beta on -K..K, K = J + halo: beta_k = sqrt(4 pi i) alpha_k.
Eigen::VectorXcd remainder_data(const AlphaSequence& alpha, long long halo = 0);

struct ResonantTriple {
  int j1 = 0, j2 = 0, j3 = 0;
  double Delta = 0.0;  // k^2 - j1^2 + j2^2 - j3^2 = 2(j1-j2)(j3-j2)
  double omega = 0.0;  // (|b_k|^2 - |b_j1|^2 + |b_j2|^2 - |b_j3|^2)/(4 pi)
};

// Non-resonant triples j1 - j2 + j3 = k, Delta != 0, all indices in -K..K.
struct ResonanceIndex {
  long long K = 0;
  std::vector<std::vector<ResonantTriple>> by_k;  // index k + K

  const std::vector<ResonantTriple>& triples(long long k) const {
    return by_k[static_cast<std::size_t>(k + K)];
  }
};

ResonanceIndex build_resonance_index(const Eigen::VectorXcd& data);

// f_k(t) = (1/8 pi t) sum_{NR_k} e^{-i Delta/4t} e^{-i omega log sqrt t}
//          g_j1 conj(g_j2) g_j3,   g = data + R on -K..K.
cplx nonresonant_force(const ResonanceIndex& index, long long k, double t,
                       const Eigen::VectorXcd& state);

// All f_k at once: full cubic convolution by FFT minus the resonant part
// (2 sum |v|^2 - |v_k|^2) v_k.
class CubicForce {
 public:
  explicit CubicForce(const Eigen::VectorXcd& data);
  void operator()(double t, const Eigen::VectorXcd& state, Eigen::VectorXcd& force);
  long long K() const { return K_; }

 private:
  long long K_;
  std::size_t fft_size_;
  Eigen::ArrayXd data_mod2_;
  std::vector<cplx> a_, b_, c_, A_, B_, z_;
  Eigen::VectorXcd v_, p_;
  Eigen::FFT<double> fft_;
};

// dR/dt for the remainder system.
void remainder_rhs(CubicForce& force, const Eigen::VectorXcd& data, double t,
                   const Eigen::VectorXcd& R, Eigen::VectorXcd& dR);

struct RemainderOptions {
  double eps = 1e-4;
  double T = 0.25;
  double tol = 1e-10;
  long long halo = 0;
  int samples = 64;             // geometric output grid on [eps, T]
  bool startup_check = false;   // rerun from eps/2 and compare R(T)
  bool keep_dense = false;      // store every accepted step for picard_verify
  long long max_steps = 200000000;
};

struct RemainderTrajectory {
  long long K = 0;
  double eps = 0.0;
  Eigen::VectorXcd data;
  std::vector<double> t;
  std::vector<Eigen::VectorXcd> R;   // on -K..K, one per t
  OdeStats stats;
  double mass0 = 0.0;
  double max_mass_drift = 0.0;       // relative, over every accepted step
  double sup_l1 = 0.0;               // sup_t t^{-gamma} |R|_l1 (gamma in options of decay_study)
  double sup_deriv_l1 = 0.0;         // sup_t t |R'|_l1
  double sup_l11 = 0.0;              // sup_t t^{-gamma} sum (1+|k|)|R_k|
  double startup_change = -1.0;      // max_k |R_eps(T) - R_{eps/2}(T)|, -1 if not run
  // every accepted step in s = 1/(4t), descending, when keep_dense is set
  std::vector<double> dense_s;
  std::vector<Eigen::VectorXcd> dense_R, dense_dRds;
};

// Integrates from R(eps) = 0 in the variable s = 1/(4t), where every
// non-resonant phase e^{-i Delta s} has constant frequency. gamma only
// weights the sup norms. Throws OdeFailure with the reached time in t.
RemainderTrajectory integrate_remainder(const AlphaSequence& alpha, const RemainderOptions& opt,
                                        double gamma = 0.6);

// Fixed-point map evaluated on a stored trajectory from its start time eps
// (where R = 0) to t, with Hermite interpolation between accepted steps.
struct PicardMap {
  Eigen::VectorXcd nonresonant_ibp;     // -i int f_k, integrated by parts
  Eigen::VectorXcd nonresonant_direct;  // -i int f_k, plain quadrature
  Eigen::VectorXcd resonant;            // i int (|g_k|^2 - |b_k|^2) g_k / (8 pi tau)
  Eigen::VectorXcd R_at_t;
};
PicardMap picard_map(const RemainderTrajectory& traj, double t);

// max_k |Phi_k(R)(t) - R_k(t)| with the by-parts form of the map.
double picard_verify(const RemainderTrajectory& traj, double t);

struct DecayRow {
  long long n = 0;
  double sup_l1 = 0.0, sup_deriv_l1 = 0.0, sup_l11 = 0.0;
  double mass_drift = 0.0;
};

struct DecayTable {
  std::vector<DecayRow> rows;
  double slope_l1 = 0.0, slope_deriv = 0.0, slope_l11 = 0.0;
  double predicted_l1 = 0.0, predicted_deriv = 0.0, predicted_l11 = 0.0;
};

DecayTable decay_study(const std::vector<long long>& n_list, double nu, double Gamma,
                       RationalTorsion torsion, double gamma, double q,
                       const RemainderOptions& opt);

// u(t, x) = sum_j e^{-i(|alpha_j|^2 - sum|alpha|^2) log sqrt t}
//           (alpha_j + R_j/sqrt(4 pi i)) e^{i(x-j)^2/4t}/sqrt t and u_x.
// R is on -K..K (K >= J); pass an empty vector for R = 0.
struct FilamentValue {
  cplx u, u_x;
};
FilamentValue evaluate_u(double t, double x, const AlphaSequence& alpha, const Eigen::VectorXcd& R);

}  // namespace riemannlab
