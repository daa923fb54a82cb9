#include "doctest.h"

#include <cmath>
#include <random>

#include "riemannlab/nls_remainder.hpp"

using namespace riemannlab;

namespace {

// Plain triple loop over all (j1, j2, j3) with the Delta != 0 filter.
cplx brute_force(long long k, double t, const Eigen::VectorXcd& data, const Eigen::VectorXcd& g) {
  const long long K = (g.size() - 1) / 2;
  cplx s = 0.0;
  for (long long j1 = -K; j1 <= K; ++j1)
    for (long long j2 = -K; j2 <= K; ++j2)
      for (long long j3 = -K; j3 <= K; ++j3) {
        if (j1 - j2 + j3 != k) continue;
        const double D = double(k * k - j1 * j1 + j2 * j2 - j3 * j3);
        if (D == 0.0) continue;
        const double om = (std::norm(data(k + K)) - std::norm(data(j1 + K)) + std::norm(data(j2 + K)) -
                           std::norm(data(j3 + K))) / (4 * kPi);
        s += std::exp(cplx(0.0, -D / (4 * t) - om * std::log(std::sqrt(t)))) * g(j1 + K) *
             std::conj(g(j2 + K)) * g(j3 + K);
      }
  return s / (8 * kPi * t);
}

AlphaSequence custom_alpha(std::vector<cplx> values) {
  AlphaSequence a;
  a.J = (long long)(values.size() - 1) / 2;
  a.values = std::move(values);
  return a;
}

}  // namespace

TEST_CASE("build_alpha values and the curvature law") {
  const AlphaSequence a = build_alpha(4, 1.0, 1.0, RationalTorsion{});
  CHECK(a.J == 4);
  CHECK(a.values.size() == 9);
  const double c4 = std::sqrt(-(2 / kPi) * std::log(std::cos(1.0 / 8.0)));
  for (const auto& v : a.values) {
    CHECK(std::abs(v - cplx(c4, 0.0)) < 1e-15);
    CHECK(v.real() > 0.0);
  }
  CHECK(std::sin(a.theta_n / 2) == doctest::Approx(std::exp(-kPi * a.c_n * a.c_n / 2)).epsilon(1e-14));

  const AlphaSequence big = build_alpha(1000, 1.0, 1.0, RationalTorsion{});
  CHECK(std::abs(1000 * big.c_n / (1.0 / (2 * std::sqrt(kPi))) - 1) < 1e-3);

  const AlphaSequence tw = build_alpha(6, 0.5, 1.0, make_torsion(1, 3));
  CHECK(tw.J == 2);
  CHECK(std::abs(tw.at(2) - tw.c_n * std::polar(1.0, 2 * kPi / 3)) < 1e-15);
  CHECK(tw.at(3) == cplx(0.0));

  CHECK_THROWS_AS(build_alpha(1, 1.0, 4.0, RationalTorsion{}), std::invalid_argument);
  CHECK_THROWS_AS(build_alpha(0, 1.0, 1.0, RationalTorsion{}), std::invalid_argument);
}

TEST_CASE("resonance index stores the factored phase") {
  std::mt19937 rng(3);
  std::uniform_int_distribution<long long> U(-1000000, 1000000);
  for (int i = 0; i < 10000; ++i) {
    const long long j1 = U(rng), j2 = U(rng), j3 = U(rng);
    const long long k = j1 - j2 + j3;
    CHECK(k * k - j1 * j1 + j2 * j2 - j3 * j3 == 2 * (j1 - j2) * (j3 - j2));
  }
  const Eigen::VectorXcd data = remainder_data(build_alpha(3, 1.0, 1.0, RationalTorsion{}), 1);
  const ResonanceIndex idx = build_resonance_index(data);
  for (long long k = -idx.K; k <= idx.K; ++k)
    for (const auto& tr : idx.triples(k)) {
      CHECK(tr.Delta != 0.0);
      CHECK(tr.Delta == double(k * k - tr.j1 * tr.j1 + tr.j2 * tr.j2 - tr.j3 * tr.j3));
    }
}

TEST_CASE("nonresonant force against the brute-force triple loop") {
  std::mt19937 rng(11);
  std::normal_distribution<double> N;
  // support {0}: NR_k is empty
  {
    const Eigen::VectorXcd data = Eigen::VectorXcd::Constant(1, cplx(0.3, 0.1));
    const ResonanceIndex idx = build_resonance_index(data);
    CHECK(nonresonant_force(idx, 0, 0.1, data) == cplx(0.0));
    CubicForce F(data);
    Eigen::VectorXcd f;
    F(0.1, data, f);
    CHECK(std::abs(f(0)) < 1e-15);
  }
  double worst = 0.0, worst_fft = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const long long K = 1 + trial % 4;  // supports of size 3..9
    Eigen::VectorXcd data(2 * K + 1), g(2 * K + 1);
    for (long long j = 0; j < 2 * K + 1; ++j) {
      data(j) = 0.2 * cplx(N(rng), N(rng));
      g(j) = data(j) + 0.05 * cplx(N(rng), N(rng));
    }
    if (trial % 5 == 0) data(0) = 0.0;  // unequal moduli
    const double t = 0.01 + 0.3 * std::abs(N(rng));
    const ResonanceIndex idx = build_resonance_index(data);
    CubicForce F(data);
    Eigen::VectorXcd f;
    F(t, g, f);
    for (long long k = -K; k <= K; ++k) {
      const cplx ref = brute_force(k, t, data, g);
      worst = std::max(worst, std::abs(nonresonant_force(idx, k, t, g) - ref));
      worst_fft = std::max(worst_fft, std::abs(f(k + K) - ref));
    }
  }
  CHECK(worst < 1e-12);
  CHECK(worst_fft < 1e-12);
}

TEST_CASE("trivial remainder runs") {
  RemainderOptions o;
  o.eps = 1e-3;
  const RemainderTrajectory zero = integrate_remainder(build_alpha(8, 1.0, 0.0, RationalTorsion{}), o);
  for (const auto& R : zero.R) CHECK(R.cwiseAbs().maxCoeff() == 0.0);

  // a single corner is the exact self-similar solution; only FFT rounding remains
  const RemainderTrajectory one = integrate_remainder(custom_alpha({cplx(0.2, 0.0)}), o);
  for (const auto& R : one.R) CHECK(R.cwiseAbs().maxCoeff() < 1e-15);
  CHECK(one.t.front() == doctest::Approx(1e-3));
  CHECK(one.t.back() == doctest::Approx(0.25));

  o.eps = 0.3;
  CHECK_THROWS_AS(integrate_remainder(build_alpha(8, 1.0, 1.0, RationalTorsion{}), o), std::invalid_argument);
}

TEST_CASE("mass conservation and start-up convergence at n = 8") {
  RemainderOptions o;
  o.eps = 1e-3;
  o.startup_check = true;
  const RemainderTrajectory tr = integrate_remainder(build_alpha(8, 1.0, 1.0, RationalTorsion{}), o);
  CHECK(tr.max_mass_drift < 1e-7);
  CHECK(tr.max_mass_drift < 100 * o.tol);
  CHECK(tr.R.front().cwiseAbs().maxCoeff() == 0.0);
  // halving eps moves R(T) by a small fraction of its size
  const double size = tr.R.back().cwiseAbs().maxCoeff();
  CHECK(tr.startup_change < 0.05 * size);
  // frozen from this run
  CHECK(size == doctest::Approx(6.33e-5).epsilon(0.02));
}

TEST_CASE("fixed-point residual on a computed trajectory") {
  // support {0, 1}: by-parts and direct quadrature of int f_k agree
  {
    RemainderOptions o;
    o.eps = 1e-3;
    o.keep_dense = true;
    const RemainderTrajectory tr = integrate_remainder(custom_alpha({0.0, 0.03, 0.03}), o);
    const PicardMap m = picard_map(tr, 0.2);
    CHECK((m.nonresonant_ibp - m.nonresonant_direct).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(picard_verify(tr, 0.2) < 10 * o.tol);
  }
  RemainderOptions o;
  o.eps = 1e-3;
  o.keep_dense = true;
  const RemainderTrajectory tr = integrate_remainder(build_alpha(8, 1.0, 1.0, RationalTorsion{}), o);
  CHECK(picard_verify(tr, 0.1) < 10 * o.tol);
  CHECK_THROWS_AS(picard_verify(tr, 0.5), std::invalid_argument);
}

TEST_CASE("decay study bookkeeping") {
  RemainderOptions o;
  o.eps = 1e-3;
  const DecayTable zero = decay_study({4, 8}, 1.0, 0.0, RationalTorsion{}, 0.6, 2.0, o);
  for (const auto& r : zero.rows) {
    CHECK(r.sup_l1 == 0.0);
    CHECK(r.sup_deriv_l1 == 0.0);
    CHECK(r.sup_l11 == 0.0);
  }
  CHECK(zero.predicted_l1 == doctest::Approx(-1.0));
  CHECK(zero.predicted_l11 == doctest::Approx(0.0));
  const DecayTable tab = decay_study({4, 8}, 1.0, 1.0, RationalTorsion{}, 0.6, 100.0, o);
  CHECK(tab.slope_l1 < -1.0);
  CHECK(std::abs(tab.slope_deriv) < 0.2);
}

TEST_CASE("evaluate_u") {
  const double c = 0.3, t = 0.07, x = 0.4;
  const AlphaSequence one = custom_alpha({cplx(c, 0.0)});
  const FilamentValue f = evaluate_u(t, x, one, Eigen::VectorXcd());
  const cplx expect = c * std::exp(cplx(0.0, x * x / (4 * t))) / std::sqrt(t);
  CHECK(std::abs(f.u - expect) < 1e-14);
  CHECK(std::abs(f.u_x - expect * cplx(0.0, x / (2 * t))) < 1e-13);

  // linear in alpha + R/sqrt(4 pi i)
  const AlphaSequence a = build_alpha(3, 1.0, 1.0, RationalTorsion{});
  Eigen::VectorXcd R1 = Eigen::VectorXcd::Zero(7), R2 = Eigen::VectorXcd::Zero(7);
  R1(2) = cplx(1e-3, 2e-3);
  R2(5) = cplx(-4e-3, 1e-3);
  const cplx u0 = evaluate_u(t, x, a, Eigen::VectorXcd::Zero(7)).u;
  const cplx u1 = evaluate_u(t, x, a, R1).u - u0;
  const cplx u2 = evaluate_u(t, x, a, R2).u - u0;
  const cplx u12 = evaluate_u(t, x, a, R1 + R2).u - u0;
  CHECK(std::abs(u12 - u1 - u2) < 1e-12);

  // symmetric real data: the j and -j terms coincide at x = 0
  const AlphaSequence pair = custom_alpha({0.0, 0.0, 0.1, 0.0, 0.0});
  AlphaSequence left = pair, right = pair;
  left.values[1] = 0.1;
  right.values[3] = 0.1;
  const cplx ul = evaluate_u(t, 0.0, left, Eigen::VectorXcd()).u;
  const cplx ur = evaluate_u(t, 0.0, right, Eigen::VectorXcd()).u;
  CHECK(std::abs(ul - ur) < 1e-14);
  CHECK_THROWS_AS(evaluate_u(0.0, 0.0, a, Eigen::VectorXcd()), std::invalid_argument);
}
