#include "riemannlab/theta_sums.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace riemannlab {

namespace {

void require_positive_N(long long N) {
  if (N < 1) throw std::invalid_argument("truncation N must be >= 1");
}

}  // namespace

RationalTorsion make_torsion(long long a, long long b) {
  if (b < 1) throw std::invalid_argument("torsion: b must be >= 1");
  if (a < 0) throw std::invalid_argument("torsion: a must be >= 0");
  if (gcd_ll(a, b) != 1 && !(a == 0 && b == 1))
    throw std::invalid_argument("torsion: gcd(a, b) must be 1");
  return {a, b};
}

TruncatedSum riemann_R(double t, long long N) {
  require_positive_N(N);
  const cplx mi(0.0, -1.0);  // 1/i
  cplx s = 0.0;
  for_each_quadratic_phase(t, N, -1, N, [&](long long j, cplx z) {
    s += (z - 1.0) * mi / double(j * j);
  });
  return {t + 2.0 * s, 4.0 / double(N), N};
}

TruncatedSum duistermaat_phi(double t, long long N) {
  require_positive_N(N);
  cplx s = 0.0;
  for_each_quadratic_phase(t, N, -1, N, [&](long long j, cplx z) {
    s += z / double(j * j);
  });
  return {s * cplx(0.0, -1.0), 1.0 / double(N), N};
}

TruncatedSum riemann_nm(double t, ThetaFamilyParams params, long long N) {
  require_positive_N(N);
  if (params.m < 1) throw std::invalid_argument("riemann_nm: m must be >= 1");
  const long long m = params.m, n = params.n;
  const double theta = 2.0 * kPi * t;
  cplx s = 0.0;
  auto term = [&](long long k, cplx z) {
    if (k == 0)
      s += cplx(0.0, theta);
    else
      s += (z - 1.0) / double(k * k);
  };
  // Each side walks from the far end inward so small terms go first.
  for_each_quadratic_phase(theta, m * N - n, -m, N + 1, term);   // j = N..0
  for_each_quadratic_phase(theta, -m * N - n, m, N, term);       // j = -N..-1
  TruncatedSum out;
  out.value = s;
  out.terms_used = 2 * N + 1;
  const double shift = double(n) / double(m);
  out.tail_bound = (double(N) > shift)
                       ? 4.0 / (double(m) * double(m) * (double(N) - shift))
                       : std::numeric_limits<double>::infinity();
  return out;
}

TruncatedSum r_tilde(double t, double Gamma, RationalTorsion torsion, long long N) {
  require_positive_N(N);
  // Frequencies (j - a/2b) = (2bj - a)/(2b); phase 4pi^2 t (2bj-a)^2/(4b^2).
  const long long a = torsion.a, b = torsion.b;
  const double scale = 1.0 / (4.0 * double(b) * double(b));
  const double theta = 4.0 * kPi * kPi * t * scale;
  const double c = 4.0 * kPi * kPi;
  cplx s = 0.0;
  auto term = [&](long long k, cplx z) {
    if (k == 0) {
      s += t;
    } else {
      double x = double(k) * double(k) * scale;
      s += (z - 1.0) / (cplx(0.0, c) * x);
    }
  };
  for_each_quadratic_phase(theta, 2 * b * N - a, -2 * b, N + 1, term);
  for_each_quadratic_phase(theta, -2 * b * N - a, 2 * b, N, term);
  TruncatedSum out;
  out.value = -Gamma * s;
  out.terms_used = 2 * N + 1;
  const double shift = double(a) / (2.0 * double(b));
  out.tail_bound = (double(N) > shift)
                       ? std::abs(Gamma) / c * 4.0 / (double(N) - shift)
                       : std::numeric_limits<double>::infinity();
  return out;
}

cplx gauss_sum(long long p, long long q, long long m, long long n) {
  if (q < 1) throw std::invalid_argument("gauss_sum: q must be >= 1");
  if (gcd_ll(p, q) != 1) throw std::invalid_argument("gauss_sum: gcd(p, q) must be 1");
  const __int128 Q = q;
  __int128 P = p % q;
  if (P < 0) P += Q;
  cplx s = 0.0;
  for (long long r = 0; r < q; ++r) {
    __int128 k = (static_cast<__int128>(m) * r - n) % Q;
    if (k < 0) k += Q;
    __int128 idx = (P * ((k * k) % Q)) % Q;
    s += std::polar(1.0, 2.0 * kPi * double(static_cast<long long>(idx)) / double(q));
  }
  return s;
}

std::vector<cplx> talbot_coefficients(long long p, long long q) {
  if (q < 1) throw std::invalid_argument("talbot_coefficients: q must be >= 1");
  if (gcd_ll(p, q) != 1)
    throw std::invalid_argument("talbot_coefficients: gcd(p, q) must be 1");
  long long P = p % q;
  if (P < 0) P += q;
  std::vector<cplx> tau(q);
  for (long long k = 0; k < q; ++k) {
    cplx s = 0.0;
    for (long long r = 0; r < q; ++r) {
      __int128 e = (static_cast<__int128>(P) * r % q * r - static_cast<__int128>(r) * k) % q;
      if (e < 0) e += q;
      s += std::polar(1.0, -2.0 * kPi * double(static_cast<long long>(e)) / double(q));
    }
    tau[k] = s / double(q);
  }
  return tau;
}

double gaussian_tail_bound(double eps, long long N) {
  // 2 sum_{j>N} e^{-eps j^2} <= 2 int_N^inf e^{-eps x^2} dx <= e^{-eps N^2}/(eps N)
  if (N < 1) return std::numeric_limits<double>::infinity();
  return std::exp(-eps * double(N) * double(N)) / (eps * double(N));
}

double poisson_dual_check(double t, double eps, long long N) {
  if (!(eps > 0.0)) throw std::invalid_argument("poisson_dual_check: eps must be > 0");
  require_positive_N(N);
  const cplx z(eps, -4.0 * kPi * kPi * t);
  // e^{-z j^2} = e^{-eps j^2} e^{i 4pi^2 t j^2}
  cplx lhs = 1.0;
  const double theta = 4.0 * kPi * kPi * t;
  for_each_quadratic_phase(theta, N, -1, N, [&](long long j, cplx w) {
    lhs += 2.0 * std::exp(-eps * double(j) * double(j)) * w;
  });

  const cplx w = kPi * kPi / z;
  const double a = w.real();  // > 0
  const cplx pref = std::sqrt(kPi / z);
  long long Nd = 1;
  while (std::abs(pref) * std::exp(-a * double(Nd) * double(Nd)) / (a * double(Nd)) >= 1e-12) {
    Nd *= 2;
    if (Nd > (1LL << 40)) throw std::runtime_error("poisson_dual_check: dual side does not converge");
  }
  cplx rhs = 1.0;
  for (long long j = Nd; j >= 1; --j) rhs += 2.0 * std::exp(-w * double(j) * double(j));
  rhs *= pref;
  return std::abs(lhs - rhs);
}

cplx corner_term(double t, long long j) {
  if (!(t > 0.0)) throw std::invalid_argument("corner_term: t must be > 0");
  const double st = std::sqrt(t);
  if (j == 0) return 2.0 * st;
  const double aj = std::abs(double(j));
  const double X = aj / (2.0 * st);
  const double U = X * X;
  if (X >= 6.0) {
    // 2 sqrt(t) e^{-iU} * sum_{k>=1} (-1)^{k+1} (2k-1)!! / (2iU)^k
    const cplx z = 1.0 / cplx(0.0, 2.0 * U);
    cplx term = z, sum = z;
    for (int k = 2; k < 100; ++k) {
      cplx next = -term * z * double(2 * k - 1);
      if (std::abs(next) > std::abs(term)) break;
      term = next;
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return 2.0 * st * std::polar(1.0, -std::fmod(U, 2.0 * kPi)) * sum;
  }
  return 2.0 * st * std::polar(1.0, -U) - cplx(0.0, 2.0 * aj) * fresnel_tail(X);
}

cplx corner_integral(double t, long long n, double nu) {
  if (!(t > 0.0)) throw std::invalid_argument("corner_integral: t must be > 0");
  if (n < 1) throw std::invalid_argument("corner_integral: n must be >= 1");
  const long long J = static_cast<long long>(std::floor(std::pow(double(n), nu) + 1e-9));
  cplx s = 0.0;
  for (long long j = J; j >= 1; --j) s += 2.0 * corner_term(t, j);
  return s + corner_term(t, 0);
}

cplx corner_limit(double t, long long N) {
  const cplx r = riemann_R(4.0 * kPi * kPi * t, N).value;
  return std::polar(1.0, -kPi / 4.0) * r / (2.0 * kPi * std::sqrt(kPi));
}

cplx helix_integral(double t, RationalTorsion torsion, long long N) {
  require_positive_N(N);
  const long long a = torsion.a, b = torsion.b;
  const double bb = double(b) * double(b);
  const double theta = kPi * kPi * t / bb;
  cplx s = 0.0;
  auto term = [&](long long k, cplx z) {
    if (k == 0)
      s += theta;
    else
      s += (z - 1.0) / (cplx(0.0, 1.0) * (double(k) * double(k)));
  };
  for_each_quadratic_phase(theta, 2 * b * N - a, -2 * b, N + 1, term);
  for_each_quadratic_phase(theta, -2 * b * N - a, 2 * b, N, term);
  return 2.0 * bb / (kPi * std::sqrt(kPi)) * std::polar(1.0, -kPi / 4.0) * s;
}

cplx helix_integral_quadrature(double t, RationalTorsion torsion, long long J) {
  if (t == 0.0) return 0.0;
  // (j + 2 tau w)^2/(4 tau) = j^2/(4 tau) + j w + tau w^2, so the integrand is
  // sum_j e^{-ijw} e^{-ij^2/(4 tau)} tau^{-1/2}.
  const double w = torsion.omega0();
  cplx s = 0.0;
  for (long long j = J; j >= 1; --j) {
    const cplx Ij = corner_term(t, j);
    s += Ij * (std::polar(1.0, -double(j) * w) + std::polar(1.0, double(j) * w));
  }
  return s + corner_term(t, 0);
}

double polygon_coefficient(long long M) {
  if (M < 3) throw std::invalid_argument("polygon_coefficient: M must be >= 3");
  const double sh = std::sin(kPi / (2.0 * double(M)));
  const double lncos = std::log1p(-2.0 * sh * sh);
  return std::sqrt(-(double(M) * double(M)) / (4.0 * kPi * kPi) * lncos);
}

}  // namespace riemannlab
