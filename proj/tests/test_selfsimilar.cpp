#include "doctest.h"

#include <cmath>
#include <random>

#include "riemannlab/selfsimilar.hpp"

using namespace riemannlab;

TEST_CASE("zero curvature gives a straight line") {
  const Profile p = integrate_profile(0.0, 20.0, 1e-3, 100);
  for (const auto& st : p.samples) {
    CHECK(std::abs(st.G(0) - st.s) < 1e-10);
    CHECK(std::abs(st.G(1)) < 1e-12);
    CHECK(std::abs(st.G(2)) < 1e-12);
  }
  const TangentFit tf = asymptotic_tangents(integrate_profile(0.0, 200.0, 1e-3, 10));
  CHECK((tf.A_plus - Vec3::UnitX()).norm() < 1e-10);
  CHECK((tf.A_minus - Vec3::UnitX()).norm() < 1e-10);
}

TEST_CASE("profile ODE residual, frame determinant and drift") {
  const Profile p = integrate_profile(0.5, 200.0, 1e-3, 10);
  CHECK(p.samples.front().s == doctest::Approx(-200.0));
  CHECK(p.samples.back().s == doctest::Approx(200.0));
  CHECK(profile_residual(p) < 1e-6);
  CHECK(p.orthonormality_drift < 1e-8);
  double worst_det = 0.0;
  for (const auto& st : p.samples) {
    Mat3 F;
    F << st.T, st.n, st.b;
    worst_det = std::max(worst_det, std::abs(F.determinant() - 1.0));
  }
  CHECK(worst_det < 1e-10);
}

TEST_CASE("integrate_profile rejects bad steps") {
  CHECK_THROWS_AS(integrate_profile(0.5, 10.0, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(integrate_profile(0.5, 10.0, -1e-3, 1), std::invalid_argument);
  CHECK_THROWS_AS(integrate_profile(0.5, 10.0, 0.05, 1), std::invalid_argument);
}

TEST_CASE("asymptotic tangents follow the angle law") {
  for (double c : {0.3, 0.5, 0.8}) {
    CAPTURE(c);
    const TangentFit tf = asymptotic_tangents(integrate_profile(c, 200.0, 1e-3, 10));
    CHECK(std::abs(tf.A_plus(0) - std::exp(-kPi * c * c / 2.0)) < 5e-3);
    CHECK(std::abs(tf.A_plus.dot(tf.A_minus) - (2.0 * std::exp(-kPi * c * c) - 1.0)) < 1e-2);
    // reflection symmetry
    CHECK(std::abs(tf.A_minus(0) - tf.A_plus(0)) < 1e-8);
    CHECK(std::abs(tf.A_minus(1) + tf.A_plus(1)) < 1e-8);
    CHECK(std::abs(tf.A_minus(2) + tf.A_plus(2)) < 1e-8);
    CHECK(tf.residual_plus < 10.0 * tf.predicted_amplitude);
    const double sh = std::sin(corner_angle(c) / 2.0);
    CHECK(std::abs(tf.A_plus.dot(tf.A_minus) - (2.0 * sh * sh - 1.0)) < 1e-2);
  }
  // frozen extraction at c = 0.5
  const TangentFit tf = asymptotic_tangents(integrate_profile(0.5, 200.0, 1e-3, 10));
  CHECK(tf.A_plus(0) == doctest::Approx(0.675232).epsilon(1e-5));
  CHECK(tf.A_plus(1) == doctest::Approx(0.474804).epsilon(1e-5));
  CHECK(tf.A_plus(2) == doctest::Approx(0.564467).epsilon(1e-5));
}

TEST_CASE("asymptotic normal structure and small-c value") {
  const double c = 0.1;
  const Profile p = integrate_profile(c, 200.0, 1e-3, 10);
  const TangentFit tf = asymptotic_tangents(p);
  const NormalFit nf = asymptotic_normal(p, c);
  const Vec3 re = nf.B_plus.real(), im = nf.B_plus.imag();
  CHECK(std::abs(re.norm() - 1.0) < 1e-6);
  CHECK(std::abs(im.norm() - 1.0) < 1e-6);
  CHECK(std::abs(re.dot(im)) < 1e-6);
  CHECK(std::abs(re.dot(tf.A_plus)) < 1e-6);
  CHECK(std::abs(im.dot(tf.A_plus)) < 1e-6);
  const double delta = c * std::sqrt(kPi / 2.0);
  CHECK(std::abs(re(0) / (-delta) - 1.0) < 0.05);

  // in the reference orientation B+ ~ (-d, -1, 0) + i(d, 0, -1)
  ProfileAsymptotics own;
  own.c = c;
  own.A_plus = tf.A_plus;
  own.A_minus = tf.A_minus;
  own.B_plus = nf.B_plus;
  const ProfileAsymptotics ref = to_reference_convention(own);
  const CVec3 expect = Vec3(-delta, -1.0, 0.0).cast<cplx>() + cplx(0.0, 1.0) * Vec3(delta, 0.0, -1.0).cast<cplx>();
  CHECK((ref.B_plus - expect).norm() < 5.0 * c * c);
  CHECK(std::abs(ref.B_plus.real().dot(ref.A_plus)) < 1e-6);
}

TEST_CASE("rotation_to_corner") {
  const double theta = 1.1;
  const Vec3 tp(std::sin(theta / 2), std::cos(theta / 2), 0.0), tm(std::sin(theta / 2), -std::cos(theta / 2), 0.0);
  CHECK((rotation_to_corner(tp, tm, theta) - Mat3::Identity()).norm() < 1e-12);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const Mat3 Q = Eigen::Quaterniond(U(rng), U(rng), U(rng), U(rng)).normalized().toRotationMatrix();
    const Mat3 R = rotation_to_corner(Q * tp, Q * tm, theta);
    CHECK(std::abs(R.determinant() - 1.0) < 1e-12);
    CHECK((R.transpose() * R - Mat3::Identity()).norm() < 1e-12);
    CHECK((R * Q * tp - tp).norm() < 1e-10);
    CHECK((R * Q * tm - tm).norm() < 1e-10);
  }

  const ProfileAsymptotics a = profile_asymptotics(0.5);
  const Mat3 R = rotation_to_corner(a.A_plus, a.A_minus, corner_angle(0.5));
  const double th = corner_angle(0.5);
  CHECK((R * a.A_plus - Vec3(std::sin(th / 2), std::cos(th / 2), 0.0)).norm() < 1e-6);
  CHECK((R * a.A_minus - Vec3(std::sin(th / 2), -std::cos(th / 2), 0.0)).norm() < 1e-6);
  // a proper rotation sends the normalised cross product to the targets' cross product
  CHECK((R * a.A_plus.cross(a.A_minus).normalized() - Vec3(0.0, 0.0, -1.0)).norm() < 1e-6);

  CHECK_THROWS_AS(rotation_to_corner(tp, tm, theta + 0.1), std::invalid_argument);
}

TEST_CASE("limit normal tends to the small-c limit") {
  const double s2 = 1.0 / std::sqrt(2.0);
  const CVec3 lim(cplx(0.0, 0.0), cplx(s2, -s2), cplx(-s2, -s2));
  double prev = 1e9;
  for (double c : {0.1, 1e-2, 1e-3}) {
    CAPTURE(c);
    const LimitNormal L = limit_normal(c, corner_angle(c));
    const double d = (L.N - lim).norm();
    CHECK(d < prev);
    prev = d;
    CHECK(std::abs(L.N.real().norm() - 1.0) < 1e-6);
    CHECK(std::abs(L.N.imag().norm() - 1.0) < 1e-6);
  }
  CHECK(prev < 5e-3);
  CHECK_THROWS_AS(limit_normal(0.3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(limit_normal(0.0, kPi), std::invalid_argument);
}
