#include "riemannlab/numerics.hpp"

#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace riemannlab {

const QuadratureRule& gauss_legendre(int n) {
  static std::map<int, QuadratureRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) { p1 = x; p0 = 1.0; }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) { p1 = x; p0 = 1.0; }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

cplx integrate_panels(const std::function<cplx(double)>& f, double a, double b,
                      int panels, int order) {
  const auto& gl = gauss_legendre(order);
  const double w = (b - a) / panels;
  cplx total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * w;
    const double mid = lo + 0.5 * w;
    cplx s = 0.0;
    for (int i = 0; i < order; ++i) s += gl.weights[i] * f(mid + 0.5 * w * gl.nodes[i]);
    total += 0.5 * w * s;
  }
  return total;
}

double integrate_panels_real(const std::function<double(double)>& f, double a,
                             double b, int panels, int order) {
  const auto& gl = gauss_legendre(order);
  const double w = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * w;
    double s = 0.0;
    for (int i = 0; i < order; ++i) s += gl.weights[i] * f(mid + 0.5 * w * gl.nodes[i]);
    total += 0.5 * w * s;
  }
  return total;
}

namespace {

// Asymptotic series for int_X^inf e^{-iv^2} dv, valid for large X:
// e^{-iX^2}/(2iX) * sum_k (-1)^k (2k-1)!! / (2iX^2)^k.
cplx fresnel_tail_asymptotic(double X) {
  const cplx z = 1.0 / (cplx(0.0, 2.0) * X * X);
  cplx term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    cplx next = -term * z * double(2 * k - 1);
    if (std::abs(next) > std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-18) break;
  }
  return std::exp(cplx(0.0, -X * X)) / (cplx(0.0, 2.0) * X) * sum;
}

constexpr double kFresnelSwitch = 6.0;

}  // namespace

cplx fresnel_tail(double X) {
  if (X < 0.0) throw std::invalid_argument("fresnel_tail: X must be >= 0");
  if (X >= kFresnelSwitch) return fresnel_tail_asymptotic(X);
  // Oscillation count on [X, 6] is at most 36/pi; 48 panels of 16 nodes
  // resolve it to round-off.
  auto f = [](double v) { return std::exp(cplx(0.0, -v * v)); };
  return integrate_panels(f, X, kFresnelSwitch, 48, 20) +
         fresnel_tail_asymptotic(kFresnelSwitch);
}

double sine_integral(double z) {
  if (z < 0.0) return -sine_integral(-z);
  if (z == 0.0) return 0.0;
  if (z <= 60.0) {
    auto f = [](double u) { return u == 0.0 ? 1.0 : std::sin(u) / u; };
    int panels = 4 + static_cast<int>(z);
    return integrate_panels_real(f, 0.0, z, panels, 20);
  }
  // Auxiliary functions f, g by their asymptotic series.
  double f = 0.0, g = 0.0, term = 1.0 / z;
  double z2 = z * z;
  double tf = 1.0 / z, tg = 1.0 / z2;
  f = tf;
  g = tg;
  for (int k = 1; k < 30; ++k) {
    double nf = -tf * (2.0 * k - 1.0) * (2.0 * k) / z2;
    double ng = -tg * (2.0 * k) * (2.0 * k + 1.0) / z2;
    if (std::abs(nf) > std::abs(tf)) break;
    tf = nf;
    tg = ng;
    f += tf;
    g += tg;
  }
  (void)term;
  return kPi / 2.0 - f * std::cos(z) - g * std::sin(z);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need at least two paired samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - out.intercept - out.slope * x[i];
    ss += r * r;
  }
  out.rms_residual = std::sqrt(ss / n);
  return out;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("fit_loglog: samples must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly);
}

unsigned worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("RIEMANNLAB_THREADS")) {
    try {
      long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(std::min<long>(v, 1024));
    } catch (...) {
    }
  }
  return hw;
}

void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body,
                     unsigned workers) {
  if (workers == 0) workers = worker_count();
  if (n == 0) return;
  const std::size_t chunks = std::min<std::size_t>(workers, n);
  if (chunks <= 1) {
    body(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    std::size_t b = n * c / chunks, e = n * (c + 1) / chunks;
    pool.emplace_back([&body, b, e, c] { body(b, e, c); });
  }
  for (auto& t : pool) t.join();
}

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

long long gcd_ll(long long a, long long b) {
  a = a < 0 ? -a : a;
  b = b < 0 ? -b : b;
  while (b != 0) {
    long long r = a % b;
    a = b;
    b = r;
  }
  return a;
}

}  // namespace riemannlab
