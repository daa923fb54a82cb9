// Riemann-function family, Gauss sums, Talbot coefficients and the
// corner integrals they govern. Every series evaluator returns its value
// together with a proven bound on the omitted tail.
#pragma once

#include <vector>

#include "riemannlab/numerics.hpp"

namespace riemannlab {

struct TruncatedSum {
  cplx value{0.0, 0.0};
  double tail_bound = 0.0;
  long long terms_used = 1;
};

// omega_0 = a*pi/b; a = 0 is the torsion-free case.
struct RationalTorsion {
  long long a = 0;
  long long b = 1;

  double omega0() const { return kPi * double(a) / double(b); }
};

// Validates gcd(a, b) = 1, a >= 0, b >= 1.
RationalTorsion make_torsion(long long a, long long b);

struct ThetaFamilyParams {
  long long n = 0;
  long long m = 1;
};

// r(t) = t + sum_{1<=|j|<=N} (e^{itj^2} - 1)/(ij^2), tail 4/N.
TruncatedSum riemann_R(double t, long long N);

// phi_D(t) = sum_{j=1}^N e^{itj^2}/(ij^2), tail 1/N.
TruncatedSum duistermaat_phi(double t, long long N);

// r_{n,m}(t) = sum_{|j|<=N} (e^{2 pi i t (mj-n)^2} - 1)/(mj-n)^2,
// with the term 2 pi i t where mj = n.
TruncatedSum riemann_nm(double t, ThetaFamilyParams params, long long N);

// -Gamma sum_{|j|<=N} (e^{i 4pi^2 t (j-a/2b)^2} - 1)/(i 4pi^2 (j-a/2b)^2).
TruncatedSum r_tilde(double t, double Gamma, RationalTorsion torsion, long long N);

// sum_{r=0}^{q-1} e^{2 pi i p (mr-n)^2 / q}, exact modular phases.
cplx gauss_sum(long long p, long long q, long long m, long long n);

// tau_k = (1/q) sum_r e^{-2 pi i (p r^2 - r k)/q}, k = 0..q-1.
std::vector<cplx> talbot_coefficients(long long p, long long q);

// |sum_{|j|<=N} e^{-z j^2} - sqrt(pi/z) sum_{|j|<=N'} e^{-pi^2 j^2/z}|,
// z = eps - 4 pi^2 i t, N' picked so the dual tail is below 1e-12.
double poisson_dual_check(double t, double eps, long long N);

// Certified bound on the omitted tail of sum_{|j|>N} e^{-eps j^2}.
double gaussian_tail_bound(double eps, long long N);

// I_j(t) = int_0^t e^{-i j^2/(4 tau)} tau^{-1/2} d tau.
cplx corner_term(double t, long long j);

// sum_{|j|<=floor(n^nu)} I_j(t).
cplx corner_integral(double t, long long n, double nu);

// e^{-i pi/4} r(4 pi^2 t) / (2 pi sqrt(pi)), the N -> infinity limit of
// corner_integral.
cplx corner_limit(double t, long long N = 1000000);

// Closed form (2b^2/(pi sqrt pi)) e^{-i pi/4}
//   sum_{|j|<=N} (e^{i pi^2 (t/b^2)(2bj-a)^2} - 1)/(i (2bj-a)^2).
cplx helix_integral(double t, RationalTorsion torsion, long long N);

// Direct evaluation of int_0^t e^{i tau w^2} sum_{|j|<=J} e^{-i(j+2 tau w)^2/(4 tau)}
// tau^{-1/2} d tau term by term in j.
cplx helix_integral_quadrature(double t, RationalTorsion torsion, long long J);

// sqrt(-(M^2/4pi^2) ln cos(pi/M)), M >= 3.
double polygon_coefficient(long long M);

}  // namespace riemannlab
