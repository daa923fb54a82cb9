#include "doctest.h"

#include <cmath>

#include "riemannlab/multifractal.hpp"

using namespace riemannlab;

namespace {

// Riemann sum of |S|^p straight from smoothed_sum, no recurrences.
double brute_structure(long long N, double p, long long n, long long m, long long res) {
  const long long M = res * N * N;
  double s = 0.0;
  for (long long k = 0; k < M; ++k) {
    const double t = double(k) / double(M);
    s += std::pow(std::abs(smoothed_sum(N, t, 2.0 * n * t / m)), p);
  }
  return s / double(M);
}

}  // namespace

TEST_CASE("smooth cutoff shape") {
  for (double x : {1.0, 1.3, 1.5, 2.0, -1.7}) CHECK(smooth_cutoff(x) == doctest::Approx(1.0));
  for (double x : {0.0, 0.2, 0.5, 4.0, 5.0, -4.5}) CHECK(smooth_cutoff(x) == 0.0);
  for (double x : {0.7, 2.5, 3.3}) CHECK(smooth_cutoff(x) == doctest::Approx(smooth_cutoff(-x)));
  CHECK(smooth_cutoff(0.75) == doctest::Approx(0.5));
  CHECK(smooth_cutoff(3.0) == doctest::Approx(0.5));
}

TEST_CASE("smoothed_sum") {
  const cplx s0 = smoothed_sum(64, 0.0, 0.0);
  CHECK(std::abs(s0.imag()) < 1e-9);
  CHECK(s0.real() == doctest::Approx(cutoff_mass(64)).epsilon(1e-12));
  const double integral = integrate_panels_real([](double x) { return smooth_cutoff(x); }, -4.0, 4.0, 400, 16);
  CHECK(s0.real() == doctest::Approx(64.0 * integral).epsilon(1e-6));

  const long long N = 256;
  const double ratio = std::abs(smoothed_sum(N, 0.2, 0.0)) / (N / std::sqrt(5.0));
  CHECK(ratio > 0.2);
  CHECK(ratio < 5.0);

  // Away from a/q the modulus is capped by the factor (1 + N sqrt|t - a/q|)^{-1}
  // = 1/3. The measured drop is far stronger (about 3e-3): the stationary
  // point of the phase lies outside the support of sigma.
  const double drop = std::abs(smoothed_sum(N, 0.2 + 4.0 / (N * N), 0.0)) / std::abs(smoothed_sum(N, 0.2, 0.0));
  CHECK(drop <= 3.0 * (1.0 / 3.0));

  for (double t : {0.013, 0.31, 0.77})
    CHECK(std::abs(smoothed_sum(32, t, 0.4)) <= cutoff_mass(32) + 1e-9);
}

TEST_CASE("structure functions match the direct Riemann sum") {
  const auto I = structure_functions(16, {2.0, 3.0, 6.0}, {0, 1}, 64);
  CHECK(I[0] == doctest::Approx(brute_structure(16, 2.0, 0, 1, 64)).epsilon(1e-10));
  CHECK(I[1] == doctest::Approx(brute_structure(16, 3.0, 0, 1, 64)).epsilon(1e-10));
  CHECK(I[2] == doctest::Approx(brute_structure(16, 6.0, 0, 1, 64)).epsilon(1e-10));
  const auto J = structure_functions(16, {2.5}, {1, 3}, 32);
  CHECK(J[0] == doctest::Approx(brute_structure(16, 2.5, 1, 3, 32)).epsilon(1e-10));
}

TEST_CASE("structure function Parseval") {
  // j and -j share the frequency j^2, so the orthogonal expansion has
  // coefficients 2 sigma(j/N) for j > 0: I_{N,2} = 2 sum_j sigma(j/N)^2.
  for (long long N : {32, 64}) {
    const double I2 = structure_function(N, 2.0, {0, 1});
    CHECK(std::abs(I2 / (2.0 * cutoff_energy(N)) - 1.0) < 1e-6);
  }
  CHECK(structure_function(32, 2.0, {0, 1}) > structure_function(16, 2.0, {0, 1}));
  CHECK_THROWS_AS(structure_function(8, 2.0, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(structure_function(16, 9.0, {0, 1}), std::invalid_argument);
}

TEST_CASE("eta predictions") {
  auto f6 = eta_fit(6.0, {16, 32, 64}, {0, 1});
  CHECK(f6.predicted_slope == 4.0);
  CHECK(f6.eta_predicted == 4.0);
  CHECK(f6.fitted_slope == doctest::Approx(4.0).epsilon(0.1));
  auto f2 = eta_fit(2.0, {16, 32, 64}, {0, 1});
  CHECK(f2.predicted_slope == 1.0);
  CHECK(f2.eta_predicted == 1.5);
  CHECK(f2.fitted_slope == doctest::Approx(1.0).epsilon(0.05));
  CHECK_THROWS_AS(eta_fit(2.0, {16, 24, 64}, {0, 1}), std::invalid_argument);
}

TEST_CASE("frisch_parisi") {
  CHECK(std::abs(frisch_parisi(eta_analytic, 0.5)) < 1e-12);
  CHECK(std::abs(frisch_parisi(eta_analytic, 0.75) - 1.0) < 1e-12);
  CHECK(std::abs(frisch_parisi(eta_analytic, 0.625) - 0.5) < 1e-12);
  for (int k = 0; k <= 250; ++k) {
    const double b = 0.5 + k * 0.001;
    CHECK(std::abs(frisch_parisi(eta_analytic, b) - (4.0 * b - 2.0)) < 1e-6);
    CHECK(frisch_parisi(eta_analytic, b) <= 1.0 + 1e-12);
  }
}

TEST_CASE("continued fractions") {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  auto cf = continued_fraction(g, 10);
  REQUIRE(cf.digits.size() == 10);
  long long fa = 1, fb = 1;  // Fibonacci
  for (int k = 0; k < 10; ++k) {
    CHECK(cf.digits[k] == 1);
    CHECK(cf.p[k] == fa);
    CHECK(cf.q[k] == fb);
    long long fc = fa + fb;
    fa = fb;
    fb = fc;
  }
  auto third = continued_fraction(1.0 / 3.0, 10);
  CHECK(third.terminated_early);
  CHECK(third.p.back() == 1);
  CHECK(third.q.back() == 3);

  auto s2 = continued_fraction(std::sqrt(2.0) - 1.0, 10);
  REQUIRE(s2.digits.size() == 10);
  for (auto a : s2.digits) CHECK(a == 2);
  CHECK(!s2.terminated_early);

  for (double x : {g, std::sqrt(2.0) - 1.0, kPi - 3.0, 0.123456789}) {
    auto c = continued_fraction(x, 12);
    for (std::size_t k = 0; k + 1 < c.q.size(); ++k) {
      CHECK(c.q[k] < c.q[k + 1]);
      const long double err = std::fabs(static_cast<long double>(x) - static_cast<long double>(c.p[k]) / c.q[k]);
      CHECK(err <= 1.0L / (static_cast<long double>(c.q[k]) * c.q[k + 1]) * (1.0L + 1e-9L));
      // alternate sides
      const double side = x - double(c.p[k]) / double(c.q[k]);
      CHECK((side > 0) == (k % 2 == 1));
    }
  }
  CHECK_THROWS_AS(continued_fraction(1.5, 3), std::invalid_argument);
}

TEST_CASE("irrationality_target") {
  auto r2 = irrationality_target(2.0, 30);
  CHECK(r2.depth == 30);
  for (auto a : r2.expansion.digits) CHECK(a <= 2);

  auto r3 = irrationality_target(3.0, 40);
  CHECK(r3.expansion.overflow);
  CHECK(r3.depth >= 5);
  double last = std::nan("");
  for (double r : r3.expansion.r)
    if (std::isfinite(r)) last = r;
  CHECK(std::abs(last - 3.0) < 0.1);
  for (auto q : r3.expansion.q) CHECK(q % 2 == 1);
  CHECK_THROWS_AS(irrationality_target(1.5, 3), std::invalid_argument);
}

TEST_CASE("holder_estimate") {
  SumEvaluator lin = [](double x) { return TruncatedSum{cplx(x, 0.0), 0.0, 1}; };
  CHECK(holder_estimate(lin, 0.3, 1e-6, 1e-2, 12) == doctest::Approx(1.0).epsilon(1e-9));
  SumEvaluator sloppy = [](double x) { return TruncatedSum{cplx(x, 0.0), 1e-2, 1}; };
  CHECK_THROWS_AS(holder_estimate(sloppy, 0.3, 1e-6, 1e-2, 12), std::invalid_argument);

  const double hmin = 1e-6;
  const long long N = static_cast<long long>(std::ceil(4.0 / std::pow(hmin, 0.75))) + 1;
  SumEvaluator r01 = [N](double t) { return riemann_nm(t, {0, 1}, N); };
  CHECK(std::abs(holder_estimate(r01, 1.0 / 3.0, hmin, 1e-2, 20) - 0.5) < 0.05);
  CHECK(std::abs(holder_estimate(r01, (std::sqrt(5.0) - 1.0) / 2.0, hmin, 1e-2, 20) - 0.75) < 0.07);
}

TEST_CASE("J_function") {
  const cplx J0 = J_function(0.0);
  const cplx closed = 2.0 * std::sqrt(2.0) * kPi * std::polar(1.0, 3.0 * kPi / 4.0);
  CHECK(std::abs(J0 - closed) < 1e-6);
  for (double x : {0.5, 3.0, 11.0}) CHECK(std::abs(J_function(-x) - J_function(x)) < 1e-12);
  CHECK(std::abs(J_function(20.0)) / std::abs(J_function(10.0)) <= 0.35);

  // Independent route at x = 3: trapezoid on [0, 120] plus leading-order tails.
  const double x = 3.0, L = 120.0;
  const long long n = 4000000;
  const double h = L / n;
  cplx s = 0.0;
  for (long long i = 0; i <= n; ++i) {
    const double v = i * h;
    const cplx k = v == 0.0 ? cplx(0.0, 2.0 * kPi)
                            : (std::polar(1.0, 2.0 * kPi * v * v) - 1.0) / (v * v);
    s += (i == 0 || i == n ? 0.5 : 1.0) * k * std::cos(v * x);
  }
  s *= 2.0 * h;
  // -2 int_L^inf cos(vx)/v^2 dv and the oscillatory tail (leading IBP term).
  s += -2.0 * (std::cos(x * L) / L - x * (kPi / 2.0 - sine_integral(x * L)));
  for (double sg : {1.0, -1.0}) {
    const double d1 = 4.0 * kPi * L + sg * x;
    s += -std::polar(1.0, 2.0 * kPi * L * L + sg * x * L) / (cplx(0.0, d1) * L * L);
  }
  CHECK(std::abs(J_function(x) - s) < 1e-5);
}

TEST_CASE("rational increments") {
  std::vector<double> hs;
  for (int i = 0; i <= 12; ++i) hs.push_back(1e-8 * std::pow(1e4, i / 12.0));
  auto f1 = rational_increment_fit({0, 1}, 0, 1, hs, 400000);
  CHECK(std::abs(f1.amplitude / std::abs(J_function(0.0)) - 1.0) < 0.1);
  CHECK(std::abs(f1.exponent - 0.5) < 0.02);
  auto f3 = rational_increment_fit({0, 1}, 1, 3, hs, 400000);
  CHECK(std::abs(f3.exponent - 0.5) < 0.02);
  CHECK(std::abs(f3.amplitude / (std::abs(J_function(0.0)) / std::sqrt(3.0)) - 1.0) < 0.15);
  CHECK(f3.residual_constant < 100.0);
  auto f5 = rational_increment_fit({1, 2}, 2, 5, hs, 400000);
  CHECK(f5.exponent > 0.45);
  CHECK(f5.exponent < 0.55);
  auto f4 = rational_increment_fit({0, 1}, 1, 4, hs, 400000);
  CHECK(!f4.amplitude_law_applies);

  // The tail-corrected increment agrees with differencing two truncated sums.
  const double h = 1e-3;
  const long long N = 200000;
  const cplx direct = riemann_nm(1.0 / 3.0 + h, {0, 1}, N).value - riemann_nm(1.0 / 3.0, {0, 1}, N).value;
  CHECK(std::abs(rational_increment({0, 1}, 1, 3, h, N) - direct) < 1e-5);
}
