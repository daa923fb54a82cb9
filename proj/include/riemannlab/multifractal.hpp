// Multifractal diagnostics of the Riemann-function family: smoothed
// exponential sums, structure functions, the Frisch-Parisi transform,
// continued fractions and pointwise Holder fits.
#pragma once

#include <functional>
#include <vector>

#include "riemannlab/theta_sums.hpp"

namespace riemannlab {

// Smooth cutoff: 1 on 1 <= |x| <= 2, 0 for |x| <= 1/2 and |x| >= 4.
double smooth_cutoff(double x);

// sum_j sigma(j/N) e^{2 pi i (t j^2 - x j)}.
cplx smoothed_sum(long long N, double t, double x);

// sum_j sigma(j/N) and sum_j sigma(j/N)^2 over all integers j.
double cutoff_mass(long long N);
double cutoff_energy(long long N);

struct StructureFunctionTable {
  std::vector<long long> N;
  std::vector<double> p;
  std::vector<std::vector<double>> I;  // I[iN][ip]
  long long t_resolution = 256;        // t step is 1/(t_resolution N^2)
};

// I_{N,p} = int_0^1 |smoothed_sum(N, t, 2nt/m)|^p dt for every p in ps,
// Riemann sum with step 1/(resolution N^2).
std::vector<double> structure_functions(long long N, const std::vector<double>& ps,
                                        ThetaFamilyParams params, long long resolution = 256);
double structure_function(long long N, double p, ThetaFamilyParams params);

StructureFunctionTable structure_table(const std::vector<long long>& Ns,
                                       const std::vector<double>& ps,
                                       ThetaFamilyParams params, long long resolution = 256);

struct EtaFit {
  double fitted_slope = 0.0;
  double predicted_slope = 0.0;
  double eta_predicted = 0.0;
};

double predicted_slope(double p);
double eta_analytic(double p);  // min(1 + p/2, 3p/4)
EtaFit eta_fit(double p, const std::vector<long long>& Ns, ThetaFamilyParams params);
EtaFit eta_fit_from_table(const StructureFunctionTable& table, std::size_t ip);

// inf over p in {0.01, 0.02, ..., 40} of beta p - eta(p) + 1.
double frisch_parisi(const std::function<double(double)>& eta, double beta);

struct SpectrumResult {
  std::vector<double> beta;
  std::vector<double> d;
};
SpectrumResult spectrum(const std::function<double(double)>& eta, const std::vector<double>& betas);

struct ContinuedFractionExpansion {
  double x = 0.0;
  std::vector<long long> digits;  // a_1, a_2, ...
  std::vector<long long> p, q;    // convergents p_k/q_k, k = 1..
  std::vector<double> r;          // -log|x - p_k/q_k| / log q_k (NaN for q_k = 1)
  bool terminated_early = false;  // x numerically rational
  bool overflow = false;          // q_k would exceed int64
};

ContinuedFractionExpansion continued_fraction(double x, int K);

// Builds x with digits a_{k+1} = max(1, ceil(q_k^{r-2})), bumping a digit by
// one whenever q_{k+1} would be even. Exponents r_k come from the exact
// tail |x - p_k/q_k| = 1/(q_k (q_k x_{k+1} + q_{k-1})).
struct IrrationalityTarget {
  ContinuedFractionExpansion expansion;
  int depth = 0;
};
IrrationalityTarget irrationality_target(double r, int K, bool force_odd = true);

using SumEvaluator = std::function<TruncatedSum(double)>;

// Slope of log sup_{|h'|<=h}|f(x+h') - f(x)| against log h over n_scales
// geometric scales in [h_min, h_max]. Offsets are sampled geometrically
// (per_decade per decade, both signs) and the sup is a running max.
double holder_estimate(const SumEvaluator& f, double x, double h_min, double h_max,
                       int n_scales, int per_decade = 24);

struct IncrementFit {
  double amplitude = 0.0;
  double exponent = 0.0;
  double predicted_amplitude = 0.0;  // |J(0)| |tau_0| / (m q)
  double residual_constant = 0.0;    // max residual / min(h sqrt q, (hq)^{3/2})
  bool amplitude_law_applies = true; // false for even q
};

// Fits |r_{n,m}(p/q + h) - r_{n,m}(p/q)| ~ A h^e over h_list.
IncrementFit rational_increment_fit(ThetaFamilyParams params, long long p, long long q,
                                    const std::vector<double>& h_list, long long N = 2000000);

// r_{n,m}(p/q + h) - r_{n,m}(p/q) with exact modular phases at p/q.
cplx rational_increment(ThetaFamilyParams params, long long p, long long q, double h, long long N);

// J(x) = int (e^{2 pi i s^2} - 1)/s^2 e^{-isx} ds.
cplx J_function(double x);

}  // namespace riemannlab
