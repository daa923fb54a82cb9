#include "riemannlab/multifractal.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace riemannlab {

namespace {

double ramp(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / u), b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

// Integer support of sigma(j/N): N/2 < |j| < 4N.
long long support_lo(long long N) { return N / 2 + 1; }
long long support_hi(long long N) { return 4 * N - 1; }

}  // namespace

double smooth_cutoff(double x) {
  const double ax = std::abs(x);
  return ramp((ax - 0.5) / 0.5) * ramp((4.0 - ax) / 2.0);
}

cplx smoothed_sum(long long N, double t, double x) {
  if (N < 2) throw std::invalid_argument("smoothed_sum: N must be >= 2");
  cplx s = 0.0;
  for (long long a = support_lo(N); a <= support_hi(N); ++a) {
    const double w = smooth_cutoff(double(a) / double(N));
    if (w == 0.0) continue;
    for (long long j : {a, -a}) {
      const long double ph = static_cast<long double>(t) * j * j - static_cast<long double>(x) * j;
      const long double fr = ph - std::floor(ph);
      s += w * std::polar(1.0, 2.0 * kPi * static_cast<double>(fr));
    }
  }
  return s;
}

double cutoff_mass(long long N) {
  double s = 0.0;
  for (long long a = support_hi(N); a >= support_lo(N); --a) s += 2.0 * smooth_cutoff(double(a) / N);
  return s;
}

double cutoff_energy(long long N) {
  double s = 0.0;
  for (long long a = support_hi(N); a >= support_lo(N); --a) {
    const double w = smooth_cutoff(double(a) / N);
    s += 2.0 * w * w;
  }
  return s;
}

std::vector<double> structure_functions(long long N, const std::vector<double>& ps,
                                        ThetaFamilyParams params, long long resolution) {
  if (N < 16) throw std::invalid_argument("structure_function: N must be >= 16");
  if (params.m < 1) throw std::invalid_argument("structure_function: m must be >= 1");
  for (double p : ps)
    if (!(p >= 1.0 && p <= 8.0)) throw std::invalid_argument("structure_function: p must lie in [1, 8]");
  if (resolution < 1) throw std::invalid_argument("structure_function: resolution must be >= 1");

  const long long n = params.n, m = params.m;
  const long long M = resolution * N * N;  // number of t samples on [0, 1)
  // Frequencies f_j = j^2 - 2nj/m = (m j^2 - 2 n j)/m. At t = k/M the phase
  // is 2 pi k (m j^2 - 2 n j) / (m M), reduced with integer arithmetic.
  std::vector<long long> js;
  std::vector<double> wts;
  for (long long a = support_lo(N); a <= support_hi(N); ++a) {
    const double w = smooth_cutoff(double(a) / N);
    if (w == 0.0) continue;
    if (n == 0) {
      js.push_back(a);
      wts.push_back(2.0 * w);  // j and -j share the frequency j^2
    } else {
      js.push_back(a);
      wts.push_back(w);
      js.push_back(-a);
      wts.push_back(w);
    }
  }
  const std::size_t J = js.size();
  const __int128 mod = static_cast<__int128>(m) * M;
  auto phase = [&](long long k, long long j) {
    __int128 num = static_cast<__int128>(k) * (static_cast<__int128>(m) * j * j - 2 * static_cast<__int128>(n) * j);
    num %= mod;
    if (num < 0) num += mod;
    return 2.0 * kPi * static_cast<double>(static_cast<long double>(num) / static_cast<long double>(mod));
  };

  Eigen::ArrayXcd mult(J);
  for (std::size_t i = 0; i < J; ++i) mult[i] = std::polar(1.0, phase(1, js[i]));

  constexpr long long kBlock = 2048;
  const long long nblocks = (M + kBlock - 1) / kBlock;
  const std::size_t P = ps.size();
  std::vector<std::vector<double>> block_sums(P, std::vector<double>(nblocks, 0.0));

  // Blocks restart from exact phases, so the result does not depend on
  // how blocks are spread over workers.
  parallel_chunks(static_cast<std::size_t>(nblocks), [&](std::size_t b0, std::size_t b1, std::size_t) {
    Eigen::ArrayXcd a(J);
    std::vector<double> acc(P);
    for (std::size_t b = b0; b < b1; ++b) {
      const long long k0 = static_cast<long long>(b) * kBlock;
      const long long k1 = std::min(M, k0 + kBlock);
      for (std::size_t i = 0; i < J; ++i) a[i] = wts[i] * std::polar(1.0, phase(k0, js[i]));
      std::fill(acc.begin(), acc.end(), 0.0);
      for (long long k = k0; k < k1; ++k) {
        const double s2 = std::norm(a.sum());
        for (std::size_t ip = 0; ip < P; ++ip) {
          const double p = ps[ip];
          if (p == 2.0)
            acc[ip] += s2;
          else if (p == 4.0)
            acc[ip] += s2 * s2;
          else if (p == 6.0)
            acc[ip] += s2 * s2 * s2;
          else
            acc[ip] += std::pow(s2, 0.5 * p);
        }
        a *= mult;
      }
      for (std::size_t ip = 0; ip < P; ++ip) block_sums[ip][b] = acc[ip];
    }
  });

  std::vector<double> out(P);
  for (std::size_t ip = 0; ip < P; ++ip)
    out[ip] = pairwise_sum(block_sums[ip].data(), block_sums[ip].size()) / double(M);
  return out;
}

double structure_function(long long N, double p, ThetaFamilyParams params) {
  return structure_functions(N, {p}, params)[0];
}

StructureFunctionTable structure_table(const std::vector<long long>& Ns,
                                       const std::vector<double>& ps,
                                       ThetaFamilyParams params, long long resolution) {
  StructureFunctionTable t;
  t.N = Ns;
  t.p = ps;
  t.t_resolution = resolution;
  for (long long N : Ns) t.I.push_back(structure_functions(N, ps, params, resolution));
  return t;
}

double predicted_slope(double p) {
  if (p > 4.0) return p - 2.0;
  if (p < 4.0) return p / 2.0;
  return 2.0;
}

double eta_analytic(double p) { return std::min(1.0 + p / 2.0, 3.0 * p / 4.0); }

EtaFit eta_fit_from_table(const StructureFunctionTable& table, std::size_t ip) {
  if (table.N.size() < 3) throw std::invalid_argument("eta_fit: need at least three N values");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < table.N.size(); ++i) {
    x.push_back(double(table.N[i]));
    y.push_back(table.I[i][ip]);
  }
  const double p = table.p[ip];
  EtaFit f;
  f.fitted_slope = fit_loglog(x, y).slope;
  f.predicted_slope = predicted_slope(p);
  f.eta_predicted = p >= 4.0 ? 1.0 + p / 2.0 : 3.0 * p / 4.0;
  return f;
}

EtaFit eta_fit(double p, const std::vector<long long>& Ns, ThetaFamilyParams params) {
  for (long long N : Ns)
    if (N <= 0 || (N & (N - 1)) != 0) throw std::invalid_argument("eta_fit: N values must be dyadic");
  return eta_fit_from_table(structure_table(Ns, {p}, params), 0);
}

double frisch_parisi(const std::function<double(double)>& eta, double beta) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 4000; ++k) {
    const double p = k / 100.0;
    best = std::min(best, beta * p - eta(p) + 1.0);
  }
  return best;
}

SpectrumResult spectrum(const std::function<double(double)>& eta, const std::vector<double>& betas) {
  SpectrumResult s;
  s.beta = betas;
  for (double b : betas) s.d.push_back(frisch_parisi(eta, b));
  return s;
}

ContinuedFractionExpansion continued_fraction(double x, int K) {
  if (!(x > 0.0 && x < 1.0)) throw std::invalid_argument("continued_fraction: x must lie in (0, 1)");
  if (K < 1) throw std::invalid_argument("continued_fraction: K must be >= 1");
  ContinuedFractionExpansion cf;
  cf.x = x;
  const long double X = x;
  __int128 pm1 = 1, qm1 = 0, p0 = 0, q0 = 1;  // p_{-1}/q_{-1}, p_0/q_0
  long double rem = X;                        // fractional remainder
  const __int128 lim = std::numeric_limits<long long>::max();
  for (int k = 1; k <= K; ++k) {
    if (rem == 0.0L) {
      cf.terminated_early = true;
      break;
    }
    const long double inv = 1.0L / rem;
    const long double fl = std::floor(inv);
    if (fl > 9.0e18L) {
      cf.overflow = true;
      break;
    }
    const __int128 a = static_cast<__int128>(fl);
    const __int128 p1 = a * p0 + pm1, q1 = a * q0 + qm1;
    if (p1 > lim || q1 > lim) {
      cf.overflow = true;
      break;
    }
    cf.digits.push_back(static_cast<long long>(a));
    cf.p.push_back(static_cast<long long>(p1));
    cf.q.push_back(static_cast<long long>(q1));
    const long double err = std::fabs(X - static_cast<long double>(p1) / static_cast<long double>(q1));
    if (q1 == 1)
      cf.r.push_back(std::numeric_limits<double>::quiet_NaN());
    else if (err == 0.0L)
      cf.r.push_back(std::numeric_limits<double>::infinity());
    else
      cf.r.push_back(static_cast<double>(-std::log(err) / std::log(static_cast<long double>(q1))));
    pm1 = p0;
    qm1 = q0;
    p0 = p1;
    q0 = q1;
    rem = inv - fl;
    // Convergent agrees with x to working precision: x is numerically rational.
    if (err <= 4.0L * std::numeric_limits<double>::epsilon() * X) {
      cf.terminated_early = true;
      break;
    }
  }
  return cf;
}

IrrationalityTarget irrationality_target(double r, int K, bool force_odd) {
  if (!(r >= 2.0)) throw std::invalid_argument("irrationality_target: r must be >= 2");
  if (K < 1) throw std::invalid_argument("irrationality_target: K must be >= 1");
  IrrationalityTarget out;
  auto& cf = out.expansion;
  const __int128 lim = std::numeric_limits<long long>::max();
  __int128 pm1 = 1, qm1 = 0, p0 = 0, q0 = 1;
  for (int k = 1; k <= K; ++k) {
    const long double want = std::ceil(std::pow(static_cast<long double>(q0), static_cast<long double>(r) - 2.0L));
    if (want > 9.0e18L) {
      cf.overflow = true;
      break;
    }
    __int128 a = std::max<__int128>(1, static_cast<__int128>(want));
    __int128 q1 = a * q0 + qm1;
    if (force_odd && q1 % 2 == 0) {
      ++a;
      q1 = a * q0 + qm1;
    }
    const __int128 p1 = a * p0 + pm1;
    if (q1 > lim || p1 > lim || a > lim) {
      cf.overflow = true;
      break;
    }
    cf.digits.push_back(static_cast<long long>(a));
    cf.p.push_back(static_cast<long long>(p1));
    cf.q.push_back(static_cast<long long>(q1));
    pm1 = p0;
    qm1 = q0;
    p0 = p1;
    q0 = q1;
  }
  out.depth = static_cast<int>(cf.digits.size());
  const std::size_t D = cf.digits.size();
  if (D == 0) return out;

  // Tails x_{k+1} = [a_{k+1}; a_{k+2}, ...] evaluated backwards.
  std::vector<long double> tail(D + 1, 0.0L);  // tail[k] = x_{k+1} for 0-based digit k
  tail[D] = std::numeric_limits<long double>::infinity();
  for (std::size_t k = D; k-- > 0;)
    tail[k] = static_cast<long double>(cf.digits[k]) + (std::isinf(tail[k + 1]) ? 0.0L : 1.0L / tail[k + 1]);
  // x = 1/x_1
  cf.x = static_cast<double>(1.0L / tail[0]);
  cf.r.assign(D, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k + 1 < D; ++k) {
    const long double qk = static_cast<long double>(cf.q[k]);
    const long double qkm1 = k == 0 ? 1.0L : static_cast<long double>(cf.q[k - 1]);
    if (cf.q[k] <= 1) continue;
    // |x - p_k/q_k| = 1/(q_k (q_k x_{k+1} + q_{k-1}))
    const long double err = 1.0L / (qk * (qk * tail[k + 1] + qkm1));
    cf.r[k] = static_cast<double>(-std::log(err) / std::log(qk));
  }
  // q_0 = 1 precedes q_1; fix the first entry's q_{k-1}.
  if (D >= 2 && cf.q[0] > 1) {
    const long double qk = static_cast<long double>(cf.q[0]);
    const long double err = 1.0L / (qk * (qk * tail[1] + 1.0L));
    cf.r[0] = static_cast<double>(-std::log(err) / std::log(qk));
  }
  return out;
}

double holder_estimate(const SumEvaluator& f, double x, double h_min, double h_max,
                       int n_scales, int per_decade) {
  if (!(h_min > 0.0 && h_min < h_max)) throw std::invalid_argument("holder_estimate: need 0 < h_min < h_max");
  if (n_scales < 2) throw std::invalid_argument("holder_estimate: need at least two scales");
  const TruncatedSum f0 = f(x);
  const double budget = std::pow(h_min, 0.75);
  if (f0.tail_bound > budget)
    throw std::invalid_argument("holder_estimate: evaluator tail bound exceeds h_min^{3/4}");

  // Offsets refine the scale grid, so every scale is itself an offset.
  const double decades = std::log10(h_max / h_min);
  const int sub = std::max(1, static_cast<int>(std::ceil(decades * per_decade / (n_scales - 1))));
  const int n_off = (n_scales - 1) * sub + 1;
  std::vector<double> offs(n_off), incs(n_off, 0.0);
  for (int i = 0; i < n_off; ++i) offs[i] = h_min * std::pow(h_max / h_min, double(i) / (n_off - 1));
  for (int i = 0; i < n_off; ++i) {
    for (double sgn : {1.0, -1.0}) {
      const TruncatedSum fi = f(x + sgn * offs[i]);
      if (fi.tail_bound > budget)
        throw std::invalid_argument("holder_estimate: evaluator tail bound exceeds h_min^{3/4}");
      incs[i] = std::max(incs[i], std::abs(fi.value - f0.value));
    }
  }
  for (int i = 1; i < n_off; ++i) incs[i] = std::max(incs[i], incs[i - 1]);

  std::vector<double> hs, sups;
  for (int s = 0; s < n_scales; ++s) {
    hs.push_back(offs[s * sub]);
    sups.push_back(incs[s * sub]);
  }
  return fit_loglog(hs, sups).slope;
}

namespace {

// G(Y) = int_Y^inf (e^{2 pi i h s^2} - 1)/s^2 ds.
cplx quadratic_tail(double Y, double h) {
  const double sh = std::sqrt(h);
  const double W = std::sqrt(2.0 * kPi) * Y * sh;
  cplx inner;
  if (W >= 6.0) {
    // int_W^inf e^{iw^2}/w^2 dw = e^{iW^2}/W * sum_{k>=1} (-1)^{k+1}(2k-1)!!/(-2iW^2)^k
    const cplx z = 1.0 / cplx(0.0, -2.0 * W * W);
    cplx term = z, sum = z;
    for (int k = 2; k < 100; ++k) {
      cplx next = -term * z * double(2 * k - 1);
      if (std::abs(next) > std::abs(term)) break;
      term = next;
      sum += term;
    }
    inner = std::polar(1.0, std::fmod(W * W, 2.0 * kPi)) / W * sum - 1.0 / W;
  } else {
    inner = std::polar(1.0, W * W) / W + cplx(0.0, 2.0) * std::conj(fresnel_tail(W)) - 1.0 / W;
  }
  return sh * std::sqrt(2.0 * kPi) * inner;
}

}  // namespace

cplx rational_increment(ThetaFamilyParams params, long long p, long long q, double h, long long N) {
  const long long m = params.m, n = params.n;
  long long P = p % q;
  if (P < 0) P += q;
  const double theta = 2.0 * kPi * h;
  cplx s = 0.0;
  // k = mj - n; weight e^{2 pi i P k^2/q} exact, e^{2 pi i h k^2} by recurrence.
  std::vector<cplx> wq(q);
  for (long long r = 0; r < q; ++r) {
    const long long idx = static_cast<long long>(static_cast<__int128>(r) * r % q * P % q);
    wq[r] = std::polar(1.0, 2.0 * kPi * double(idx) / double(q));
  }
  auto term = [&](long long k, cplx z) {
    if (k == 0) {
      s += cplx(0.0, theta);
      return;
    }
    long long r = k % q;
    if (r < 0) r += q;
    s += wq[r] * (z - 1.0) / (double(k) * double(k));
  };
  for_each_quadratic_phase(theta, m * N - n, -m, N + 1, term);
  for_each_quadratic_phase(theta, -m * N - n, m, N, term);
  // Omitted |j| > N: residues average to tau_0/q, sum over k in steps of m.
  const cplx tau0 = gauss_sum(P, q, m, n);
  const double Kp = m * (N + 0.5) - n, Km = m * (N + 0.5) + n;
  s += tau0 / (double(q) * double(m)) * (quadratic_tail(Kp, h) + quadratic_tail(Km, h));
  return s;
}

IncrementFit rational_increment_fit(ThetaFamilyParams params, long long p, long long q,
                                    const std::vector<double>& h_list, long long N) {
  if (q < 1) throw std::invalid_argument("rational_increment_fit: q must be >= 1");
  if (gcd_ll(p, q) != 1) throw std::invalid_argument("rational_increment_fit: gcd(p, q) must be 1");
  if (h_list.size() < 2) throw std::invalid_argument("rational_increment_fit: need at least two h values");
  IncrementFit out;
  out.amplitude_law_applies = (q % 2 == 1);
  const cplx z0 = J_function(0.0);
  const cplx tau0 = gauss_sum(p, q, params.m, params.n);
  const cplx lead = z0 / double(params.m) * tau0 / double(q);
  out.predicted_amplitude = std::abs(lead);
  std::vector<double> mags;
  double worst = 0.0;
  for (double h : h_list) {
    const cplx d = rational_increment(params, p, q, h, N);
    mags.push_back(std::abs(d));
    const double env = std::min(h * std::sqrt(double(q)), std::pow(h * q, 1.5));
    worst = std::max(worst, std::abs(d - lead * std::sqrt(h)) / env);
  }
  const LineFit fit = fit_loglog(h_list, mags);
  out.exponent = fit.slope;
  out.amplitude = std::exp(fit.intercept);
  out.residual_constant = worst;
  return out;
}

cplx J_function(double x) {
  const double ax = std::abs(x);
  constexpr double L = 50.0;
  // (e^{2 pi i s^2} - 1)/s^2 without cancellation near s = 0.
  auto kernel = [](double s) -> cplx {
    if (s == 0.0) return cplx(0.0, 2.0 * kPi);
    const double th = 2.0 * kPi * s * s;
    const double sh = std::sin(0.5 * th);
    return cplx(-2.0 * sh * sh, std::sin(th)) / (s * s);
  };
  auto f = [&](double s) { return kernel(s) * std::cos(s * ax); };
  // Panels sized to the local frequency 2s + |x|/(2 pi).
  cplx body = 0.0;
  double a = 0.0;
  while (a < L) {
    const double freq = 2.0 * a + ax / (2.0 * kPi) + 1.0;
    const double w = std::min(L - a, 0.25 / freq);
    body += integrate_panels(f, a, a + w, 1, 16);
    a += w;
  }
  body *= 2.0;

  // int_L^inf e^{i phi(s)}/s^2 ds with phi = 2 pi s^2 +- x s, two integrations by parts.
  auto osc_tail = [&](double sgn) {
    const double ph = 2.0 * kPi * L * L + sgn * ax * L;
    const double d1 = 4.0 * kPi * L + sgn * ax;  // phi'
    const double d2 = 4.0 * kPi;                 // phi''
    const double g = 1.0 / (L * L), gp = -2.0 / (L * L * L);
    const cplx i(0.0, 1.0);
    const cplx h1 = g / (i * d1);
    const cplx h1p = (gp * d1 - g * d2) / (i * d1 * d1);
    return -std::polar(1.0, std::fmod(ph, 2.0 * kPi)) * (h1 - h1p / (i * d1));
  };
  const cplx t1 = osc_tail(1.0) + osc_tail(-1.0);
  // -2 int_L^inf cos(sx)/s^2 ds
  const double t2 = ax == 0.0 ? -2.0 / L
                              : -2.0 * (std::cos(ax * L) / L - ax * (kPi / 2.0 - sine_integral(ax * L)));
  return body + t1 + t2;
}

}  // namespace riemannlab
