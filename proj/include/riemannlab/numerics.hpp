// Shared numerical kernels: Gauss-Legendre rules, Fresnel-type tails,
// the sine integral, log-log line fits and a small deterministic
// parallel-for.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace riemannlab {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

struct QuadratureRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule (Newton on P_n). Cached per n.
const QuadratureRule& gauss_legendre(int n);

// Composite Gauss-Legendre of a complex integrand on [a, b] with `panels`
// equal panels of `order` nodes each.
cplx integrate_panels(const std::function<cplx(double)>& f, double a, double b,
                      int panels, int order = 16);
double integrate_panels_real(const std::function<double(double)>& f, double a,
                             double b, int panels, int order = 16);

// F(X) = int_X^inf e^{-i v^2} dv for X >= 0.
cplx fresnel_tail(double X);

// Si(z) = int_0^z sin(u)/u du.
double sine_integral(double z);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};

// Ordinary least squares y = intercept + slope * x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Least-squares slope of log y against log x.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

// Worker count: RIEMANNLAB_THREADS if set, else hardware concurrency.
unsigned worker_count();

// Runs body(begin, end, chunk_index) over a static partition of [0, n).
// Chunks are fixed by n and the worker count, so reductions done per chunk
// and combined in chunk order are reproducible.
void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body,
                     unsigned workers = 0);

// Pairwise (cascade) summation.
double pairwise_sum(const double* v, std::size_t n);

long long gcd_ll(long long a, long long b);

inline constexpr long double kTwoPiL = 6.283185307179586476925286766559005768L;

// e^{i theta k^2} with the phase reduced in extended precision.
inline cplx quad_phase(double theta, long long k) {
  const long double kk = static_cast<long double>(k) * static_cast<long double>(k);
  const long double ph = std::fmod(static_cast<long double>(theta) * kk, kTwoPiL);
  return std::polar(1.0, static_cast<double>(ph));
}

// Calls f(k, e^{i theta k^2}) for k = k0, k0 + d, ... (count terms). The
// exponential advances by a two-level multiplicative recurrence and is
// resynchronised every 128 terms.
template <class F>
void for_each_quadratic_phase(double theta, long long k0, long long d, long long count, F&& f) {
  constexpr long long kResync = 128;
  const cplx step2 = quad_phase(theta, d) * quad_phase(theta, d);  // e^{2 i theta d^2}
  long long k = k0;
  for (long long s = 0; s < count;) {
    cplx z = quad_phase(theta, k);
    const long double lin =
        std::fmod(static_cast<long double>(theta) *
                      (2.0L * d * static_cast<long double>(k) + 1.0L * d * d),
                  kTwoPiL);
    cplx r = std::polar(1.0, static_cast<double>(lin));
    const long long stop = std::min(count, s + kResync);
    for (; s < stop; ++s) {
      f(k, z);
      z *= r;
      r *= step2;
      k += d;
    }
  }
}

}  // namespace riemannlab
