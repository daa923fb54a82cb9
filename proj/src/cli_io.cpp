#include "riemannlab/cli_io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "riemannlab/bf_simulator.hpp"
#include "riemannlab/frame_evolution.hpp"
#include "riemannlab/multifractal.hpp"
#include "riemannlab/nls_remainder.hpp"
#include "riemannlab/selfsimilar.hpp"

namespace riemannlab {

using json = nlohmann::ordered_json;

namespace {

ParamSpec real_p(std::string name, std::string def, std::string help) {
  return {std::move(name), ParamKind::Real, std::move(def), std::move(help), {}};
}
ParamSpec int_p(std::string name, std::string def, std::string help) {
  return {std::move(name), ParamKind::Integer, std::move(def), std::move(help), {}};
}
ParamSpec rat_p(std::string name, std::string def, std::string help) {
  return {std::move(name), ParamKind::Rational, std::move(def), std::move(help), {}};
}

std::vector<CommandSpec> build_table() {
  const ParamSpec n = int_p("n", "16", "polygon parameter n");
  const ParamSpec nu = real_p("nu", "1", "corners at |j| <= n^nu");
  const ParamSpec Gamma = real_p("Gamma", "1", "theta_n = pi - Gamma/n");
  const ParamSpec omega = rat_p("omega", "0/1", "torsion omega_0 = pi a/b, given as a/b");
  const ParamSpec eps = real_p("eps", "1e-4", "start time of the evolution");
  const ParamSpec tol = real_p("tol", "1e-10", "integrator tolerance");
  std::vector<CommandSpec> t;
  t.push_back({"theta", "eval", "Riemann-function family on a t grid",
               {{"function", ParamKind::Choice, "R", "R, phi, nm, tilde, corner or helix",
                 {"R", "phi", "nm", "tilde", "corner", "helix"}},
                real_p("t0", "0", "first t"), real_p("t1", "6.283185307179586", "last t"),
                int_p("steps", "2000", "number of intervals"), int_p("N", "100000", "truncation"),
                int_p("n", "0", "shift n of r_{n,m}"), int_p("m", "1", "scale m of r_{n,m}"),
                real_p("Gamma", "1", "amplitude of R~"), omega, int_p("corner_n", "16", "n of the corner integral"),
                nu},
               true});
  t.push_back({"gauss", "sum", "quadratic Gauss sum sum_r e^{2 pi i p (m r - n)^2/q}",
               {int_p("p", "1", "numerator"), int_p("q", "7", "modulus"), int_p("m", "1", "scale"),
                int_p("n", "0", "shift")},
               false});
  t.push_back({"gauss", "check", "max over p of ||tau_0| - sqrt q| for odd q",
               {int_p("qmax", "199", "largest odd q")}, false});
  t.push_back({"ss", "profile", "self-similar profile (G, T, n, b) on [0, S]",
               {real_p("c", "0.5", "curvature"), real_p("S", "20", "profile length"),
                real_p("step", "1e-3", "integration step"), int_p("every", "10", "output stride")},
               false});
  t.push_back({"ss", "asymptotics", "asymptotic tangents A+- and normal B+",
               {real_p("c", "0.5", "curvature"), real_p("S", "200", "profile length"),
                real_p("step", "1e-3", "integration step")},
               false});
  t.push_back({"nls", "remainder", "remainder R_k(t) of the polygonal-line ansatz",
               {n, nu, Gamma, omega, eps, real_p("T", "0.25", "end time"), tol, int_p("samples", "64", "output times")},
               false});
  t.push_back({"nls", "decay", "sup norms of the remainder over a ladder of n",
               {{"ns", ParamKind::IntegerList, "8,16,32", "comma-separated n values", {}}, nu, Gamma, omega, eps,
                real_p("T", "0.25", "end time"), tol, real_p("gamma", "0.6", "time weight exponent"),
                real_p("q", "100", "decay parameter q")},
               false});
  t.push_back({"frame", "trajectory", "corner trajectory chi(t, 0) from the frame evolution",
               {n, nu, Gamma, omega, real_p("T", "0.25", "end time"), eps, tol,
                int_p("samples", "64", "output times on [1e-3, T]")},
               true});
  t.push_back({"bf", "simulate", "Schroedinger-map simulation from a mollified polygonal line",
               {int_p("n", "8", "polygon parameter n"), nu, Gamma, omega, real_p("mu", "0", "rescale exponent"),
                int_p("cells", "64", "grid cells per edge"), int_p("w", "4", "mollification width in cells"),
                real_p("T", "0.05", "end time"), int_p("outputs", "10", "number of output times"),
                int_p("curves", "0", "also dump every curve to <out>.curve<k>.csv when 1")},
               true});
  t.push_back({"bf", "compare", "PDE against frame-evolution corner trajectories",
               {int_p("n", "8", "polygon parameter n"), nu, Gamma, omega, int_p("cells", "64", "grid cells per edge"),
                int_p("w", "4", "mollification width in cells"), real_p("T", "0.05", "end time"),
                int_p("outputs", "10", "number of output times"), eps},
               false});
  t.push_back({"mf", "structure", "structure functions I_{N,p} and fitted slopes",
               {{"Ns", ParamKind::IntegerList, "16,32,64,128", "comma-separated N values", {}},
                {"ps", ParamKind::RealList, "2,4,6", "comma-separated exponents p", {}}, int_p("n", "0", "shift n"),
                int_p("m", "1", "scale m"), int_p("resolution", "256", "t step is 1/(resolution N^2)")},
               false});
  t.push_back({"mf", "spectrum", "Frisch-Parisi spectrum from eta(p) = min(1 + p/2, 3p/4)",
               {real_p("beta0", "0.5", "first beta"), real_p("beta1", "0.75", "last beta"),
                int_p("points", "251", "number of beta values")},
               false});
  return t;
}

std::string usage_text() {
  std::ostringstream os;
  os << "usage: riemannlab <group> <verb> [--key value]... [--out path] [--svg path]\n\ncommands:\n";
  for (const auto& c : command_table()) {
    os << "  " << c.group << ' ' << c.verb << "  " << c.help << '\n';
    for (const auto& p : c.params) os << "      --" << p.name << " (" << p.default_value << ")  " << p.help << '\n';
    if (c.svg) os << "      --svg path  also write an SVG polyline\n";
  }
  os << "\nEvery command writes <out> (CSV) and <out>.meta.json.\n";
  return os.str();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool to_real(const std::string& s, double& v) {
  try {
    std::size_t pos = 0;
    v = std::stod(trim(s), &pos);
    return pos == trim(s).size() && std::isfinite(v);
  } catch (...) {
    return false;
  }
}

bool to_int(const std::string& s, long long& v) {
  try {
    std::size_t pos = 0;
    v = std::stoll(trim(s), &pos);
    return pos == trim(s).size();
  } catch (...) {
    return false;
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

void validate(const ParamSpec& p, const std::string& v) {
  const std::string flag = "--" + p.name;
  bool ok = true;
  double r;
  long long k;
  switch (p.kind) {
    case ParamKind::Real: ok = to_real(v, r); break;
    case ParamKind::Integer: ok = to_int(v, k); break;
    case ParamKind::Rational:
      try {
        parse_rational(v);
      } catch (const std::exception&) {
        ok = false;
      }
      break;
    case ParamKind::RealList: {
      const auto parts = split(v, ',');
      ok = !parts.empty();
      for (const auto& s : parts) ok = ok && to_real(s, r);
      break;
    }
    case ParamKind::IntegerList: {
      const auto parts = split(v, ',');
      ok = !parts.empty();
      for (const auto& s : parts) ok = ok && to_int(s, k);
      break;
    }
    case ParamKind::Choice:
      ok = std::find(p.choices.begin(), p.choices.end(), v) != p.choices.end();
      break;
  }
  if (!ok) throw UsageError("invalid value for " + flag + ": '" + v + "'", usage_text());
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Tracks files written by one command so that a failure removes them all.
class OutputSet {
 public:
  void add(const std::string& path) { paths_.push_back(path); }
  void remove_all() {
    for (const auto& p : paths_) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
  }
  const std::vector<std::string>& paths() const { return paths_; }

 private:
  std::vector<std::string> paths_;
};

struct CommandResult {
  Table table;
  json achieved = json::object();
  std::vector<std::pair<double, double>> curve;  // for --svg
  std::vector<std::pair<std::string, Table>> extra;  // suffix, table
};

double theta_n_from(const RunConfig& c) { return kPi - c.real("Gamma") / double(c.integer("n")); }

CommandResult run_theta_eval(const RunConfig& c) {
  CommandResult r;
  const std::string f = c.raw("function");
  const double t0 = c.real("t0"), t1 = c.real("t1");
  const long long steps = c.integer("steps"), N = c.integer("N");
  if (steps < 1) throw std::invalid_argument("theta eval: steps must be >= 1");
  r.table.columns = {"t"};
  r.table.add_complex_columns(f);
  r.table.columns.push_back("tail_bound");
  ThetaFamilyParams fam{c.integer("n"), c.integer("m")};
  double worst_tail = 0.0;
  for (long long i = 0; i <= steps; ++i) {
    const double t = t0 + (t1 - t0) * double(i) / double(steps);
    TruncatedSum s;
    if (f == "R") s = riemann_R(t, N);
    else if (f == "phi") s = duistermaat_phi(t, N);
    else if (f == "nm") s = riemann_nm(t, fam, N);
    else if (f == "tilde") s = r_tilde(t, c.real("Gamma"), c.rational("omega"), N);
    else if (f == "corner") s.value = corner_integral(t, c.integer("corner_n"), c.real("nu"));
    else s.value = helix_integral(t, c.rational("omega"), N);
    worst_tail = std::max(worst_tail, s.tail_bound);
    r.table.rows.push_back({t, s.value.real(), s.value.imag(), s.tail_bound});
    r.curve.emplace_back(s.value.real(), s.value.imag());
  }
  r.achieved["max_tail_bound"] = worst_tail;
  return r;
}

CommandResult run_gauss_sum(const RunConfig& c) {
  CommandResult r;
  const long long p = c.integer("p"), q = c.integer("q");
  const cplx g = gauss_sum(p, q, c.integer("m"), c.integer("n"));
  r.table.columns = {"p", "q"};
  r.table.add_complex_columns("tau");
  r.table.columns.push_back("abs");
  r.table.rows.push_back({double(p), double(q), g.real(), g.imag(), std::abs(g)});
  return r;
}

CommandResult run_gauss_check(const RunConfig& c) {
  CommandResult r;
  r.table.columns = {"q", "max_deviation"};
  double worst = 0.0;
  for (long long q = 1; q <= c.integer("qmax"); q += 2) {
    double dev = 0.0;
    for (long long p = 1; p < std::max<long long>(q, 2); ++p) {
      if (gcd_ll(p, q) != 1) continue;
      dev = std::max(dev, std::abs(std::abs(gauss_sum(p, q, 1, 0)) - std::sqrt(double(q))));
    }
    worst = std::max(worst, dev);
    r.table.rows.push_back({double(q), dev});
  }
  r.achieved["max_deviation"] = worst;
  return r;
}

CommandResult run_ss_profile(const RunConfig& c) {
  CommandResult r;
  const long long every = c.integer("every");
  if (every < 1 || every > 1000000) throw std::invalid_argument("ss profile: every must be in [1, 1e6]");
  const Profile p = integrate_profile(c.real("c"), c.real("S"), c.real("step"), int(every));
  r.table.columns = {"s", "G1", "G2", "G3", "T1", "T2", "T3", "n1", "n2", "n3", "b1", "b2", "b3"};
  for (const auto& st : p.samples)
    r.table.rows.push_back({st.s, st.G(0), st.G(1), st.G(2), st.T(0), st.T(1), st.T(2), st.n(0), st.n(1), st.n(2),
                            st.b(0), st.b(1), st.b(2)});
  r.achieved["profile_residual"] = profile_residual(p);
  r.achieved["orthonormality_drift"] = p.orthonormality_drift;
  return r;
}

CommandResult run_ss_asymptotics(const RunConfig& c) {
  CommandResult r;
  const double cc = c.real("c");
  const ProfileAsymptotics a = profile_asymptotics(cc, c.real("S"), c.real("step"));
  r.table.columns = {"c", "theta", "Ap1", "Ap2", "Ap3", "Am1", "Am2", "Am3"};
  for (int k = 1; k <= 3; ++k) r.table.add_complex_columns("Bp" + std::to_string(k));
  r.table.rows.push_back({cc, corner_angle(cc), a.A_plus(0), a.A_plus(1), a.A_plus(2), a.A_minus(0), a.A_minus(1),
                          a.A_minus(2), a.B_plus(0).real(), a.B_plus(0).imag(), a.B_plus(1).real(),
                          a.B_plus(1).imag(), a.B_plus(2).real(), a.B_plus(2).imag()});
  r.achieved["angle_law_A1_error"] = std::abs(a.A_plus(0) - std::exp(-kPi * cc * cc / 2));
  r.achieved["inner_product_error"] =
      std::abs(a.A_plus.dot(a.A_minus) - (2 * std::exp(-kPi * cc * cc) - 1));
  return r;
}

RemainderOptions remainder_options(const RunConfig& c) {
  RemainderOptions o;
  o.eps = c.real("eps");
  o.T = c.real("T");
  o.tol = c.real("tol");
  return o;
}

CommandResult run_nls_remainder(const RunConfig& c) {
  CommandResult r;
  RemainderOptions o = remainder_options(c);
  o.samples = int(c.integer("samples"));
  const AlphaSequence a = build_alpha(c.integer("n"), c.real("nu"), c.real("Gamma"), c.rational("omega"));
  const RemainderTrajectory tr = integrate_remainder(a, o);
  r.table.columns = {"t", "l1"};
  for (long long k = -tr.K; k <= tr.K; ++k) r.table.add_complex_columns("R" + std::to_string(k));
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    std::vector<double> row = {tr.t[i], tr.R[i].cwiseAbs().sum()};
    for (Eigen::Index k = 0; k < tr.R[i].size(); ++k) {
      row.push_back(tr.R[i](k).real());
      row.push_back(tr.R[i](k).imag());
    }
    r.table.rows.push_back(std::move(row));
  }
  r.achieved["max_mass_drift"] = tr.max_mass_drift;
  r.achieved["accepted_steps"] = tr.stats.accepted;
  r.achieved["rejected_steps"] = tr.stats.rejected;
  return r;
}

CommandResult run_nls_decay(const RunConfig& c) {
  CommandResult r;
  const DecayTable tab = decay_study(c.integers("ns"), c.real("nu"), c.real("Gamma"), c.rational("omega"),
                                     c.real("gamma"), c.real("q"), remainder_options(c));
  r.table.columns = {"n", "sup_l1", "sup_deriv_l1", "sup_l11", "mass_drift"};
  for (const auto& row : tab.rows)
    r.table.rows.push_back({double(row.n), row.sup_l1, row.sup_deriv_l1, row.sup_l11, row.mass_drift});
  r.achieved["slope_l1"] = tab.slope_l1;
  r.achieved["slope_deriv"] = tab.slope_deriv;
  r.achieved["slope_l11"] = tab.slope_l11;
  r.achieved["predicted_l1"] = tab.predicted_l1;
  r.achieved["predicted_deriv"] = tab.predicted_deriv;
  r.achieved["predicted_l11"] = tab.predicted_l11;
  return r;
}

CommandResult run_frame_trajectory(const RunConfig& c) {
  CommandResult r;
  FrameOptions o;
  o.eps = c.real("eps");
  o.T_end = c.real("T");
  o.tol = c.real("tol");
  o.samples = int(c.integer("samples"));
  const long long n = c.integer("n");
  const double Gamma = c.real("Gamma");
  const RationalTorsion tor = c.rational("omega");
  const Theorem1Error e = theorem1_study(n, c.real("nu"), Gamma, tor, o);
  r.table.columns = {"t", "chi1", "chi2", "chi3", "target2", "target3", "error", "error_reflected"};
  for (std::size_t i = 0; i < e.run.t.size(); ++i) {
    const double t = e.run.t[i];
    const Vec3& x = e.run.chi[i];
    const Vec3 tg = theorem1_target(t, Gamma, tor), tr = theorem1_target(t, Gamma, tor, true);
    const Vec3 v = double(n) * x;
    r.table.rows.push_back({t, x(0), x(1), x(2), tg(1), tg(2), (v - tg).norm(), (v - tr).norm()});
    r.curve.emplace_back(v(1), v(2));
  }
  r.achieved["e_n"] = e.e_n;
  r.achieved["e_n_reflected"] = e.e_n_reflected;
  r.achieved["orthonormality_drift"] = e.run.orthonormality_drift;
  r.achieved["max_mass_drift"] = e.run.max_mass_drift;
  r.achieved["startup_budget"] = e.run.startup_budget;
  return r;
}

PolygonalLineSpec polygon_spec(const RunConfig& c) {
  PolygonalLineSpec s;
  s.n = c.integer("n");
  s.nu = c.real("nu");
  s.theta = theta_n_from(c);
  s.torsion = c.rational("omega");
  s.cells_per_edge = int(c.integer("cells"));
  return s;
}

std::vector<double> output_times(const RunConfig& c) {
  const long long k = c.integer("outputs");
  if (k < 1) throw std::invalid_argument("outputs must be >= 1");
  std::vector<double> t;
  for (long long i = 1; i <= k; ++i) t.push_back(c.real("T") * double(i) / double(k));
  return t;
}

CommandResult run_bf_simulate(const RunConfig& c) {
  CommandResult r;
  PolygonalLineSpec s = polygon_spec(c);
  s.mu = c.real("mu");
  const GridCurve g = mollify(build_polygonal_line(s), int(c.integer("w")));
  const bool dump = c.integer("curves") == 1;
  std::vector<double> times = {0.0};
  for (double t : output_times(c)) times.push_back(t);
  const MapRun run = run_schrodinger_map_to(g, 0.25 * g.h * g.h, times, dump);
  r.table.columns = {"t", "chi1", "chi2", "chi3"};
  for (std::size_t i = 0; i < run.t.size(); ++i) {
    const Vec3& x = run.chi0[i];
    r.table.rows.push_back({run.t[i], x(0), x(1), x(2)});
    r.curve.emplace_back(x(1), x(2));
  }
  for (std::size_t k = 0; k < run.curves.size(); ++k) {
    Table ct;
    ct.columns = {"x", "chi1", "chi2", "chi3", "T1", "T2", "T3"};
    const GridCurve& cv = run.curves[k];
    for (Eigen::Index i = 0; i < cv.size(); ++i)
      ct.rows.push_back({cv.x(i), cv.chi(0, i), cv.chi(1, i), cv.chi(2, i), cv.T(0, i), cv.T(1, i), cv.T(2, i)});
    r.extra.emplace_back(".curve" + std::to_string(k) + ".csv", std::move(ct));
  }
  r.achieved["max_unit_defect"] = run.max_unit_defect;
  r.achieved["far_field_drift"] = run.far_field_drift;
  r.achieved["h"] = g.h;
  return r;
}

CommandResult run_bf_compare(const RunConfig& c) {
  CommandResult r;
  FrameOptions fo;
  fo.eps = c.real("eps");
  const FrameComparison cmp = compare_with_frame(polygon_spec(c), output_times(c), int(c.integer("w")), fo);
  r.table.columns = {"t", "pde1", "pde2", "pde3", "frame1", "frame2", "frame3"};
  for (std::size_t i = 0; i < cmp.t.size(); ++i)
    r.table.rows.push_back({cmp.t[i], cmp.pde[i](0), cmp.pde[i](1), cmp.pde[i](2), cmp.frame[i](0), cmp.frame[i](1),
                            cmp.frame[i](2)});
  r.achieved["normalized_distance"] = cmp.distance;
  r.achieved["diameter"] = cmp.diameter;
  return r;
}

CommandResult run_mf_structure(const RunConfig& c) {
  CommandResult r;
  const std::vector<long long> Ns = c.integers("Ns");
  const std::vector<double> ps = c.reals("ps");
  const StructureFunctionTable tab =
      structure_table(Ns, ps, ThetaFamilyParams{c.integer("n"), c.integer("m")}, c.integer("resolution"));
  r.table.columns = {"N"};
  for (double p : ps) r.table.columns.push_back("I_p" + fmt17(p));
  for (std::size_t i = 0; i < tab.N.size(); ++i) {
    std::vector<double> row = {double(tab.N[i])};
    for (double v : tab.I[i]) row.push_back(v);
    r.table.rows.push_back(std::move(row));
  }
  json slopes = json::object();
  for (std::size_t ip = 0; ip < ps.size(); ++ip) {
    const EtaFit f = eta_fit_from_table(tab, ip);
    slopes[fmt17(ps[ip])] = {{"fitted", f.fitted_slope}, {"predicted", f.predicted_slope}};
  }
  r.achieved["slopes"] = slopes;
  return r;
}

CommandResult run_mf_spectrum(const RunConfig& c) {
  CommandResult r;
  const long long k = c.integer("points");
  if (k < 2) throw std::invalid_argument("mf spectrum: points must be >= 2");
  std::vector<double> betas;
  for (long long i = 0; i < k; ++i)
    betas.push_back(c.real("beta0") + (c.real("beta1") - c.real("beta0")) * double(i) / double(k - 1));
  const SpectrumResult s = spectrum(eta_analytic, betas);
  r.table.columns = {"beta", "d", "d_expected"};
  double worst = 0.0;
  for (std::size_t i = 0; i < s.beta.size(); ++i) {
    const double ex = 4 * s.beta[i] - 2;
    r.table.rows.push_back({s.beta[i], s.d[i], ex});
    if (s.beta[i] >= 0.5 && s.beta[i] <= 0.75) worst = std::max(worst, std::abs(s.d[i] - ex));
  }
  r.achieved["max_error_on_half_to_three_quarters"] = worst;
  return r;
}

CommandResult dispatch(const RunConfig& c) {
  const std::string key = c.group + " " + c.verb;
  if (key == "theta eval") return run_theta_eval(c);
  if (key == "gauss sum") return run_gauss_sum(c);
  if (key == "gauss check") return run_gauss_check(c);
  if (key == "ss profile") return run_ss_profile(c);
  if (key == "ss asymptotics") return run_ss_asymptotics(c);
  if (key == "nls remainder") return run_nls_remainder(c);
  if (key == "nls decay") return run_nls_decay(c);
  if (key == "frame trajectory") return run_frame_trajectory(c);
  if (key == "bf simulate") return run_bf_simulate(c);
  if (key == "bf compare") return run_bf_compare(c);
  if (key == "mf structure") return run_mf_structure(c);
  if (key == "mf spectrum") return run_mf_spectrum(c);
  throw std::logic_error("unknown command " + key);
}

}  // namespace

const std::vector<CommandSpec>& command_table() {
  static const std::vector<CommandSpec> table = build_table();
  return table;
}

RationalTorsion parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  long long a = 0, b = 0;
  if (slash == std::string::npos || !to_int(text.substr(0, slash), a) || !to_int(text.substr(slash + 1), b))
    throw std::invalid_argument("expected a rational a/b, got '" + text + "'");
  return make_torsion(a, b);
}

const std::string& RunConfig::raw(const std::string& key) const {
  for (const auto& kv : params)
    if (kv.first == key) return kv.second;
  throw std::out_of_range("no parameter " + key);
}

double RunConfig::real(const std::string& key) const {
  double v;
  if (!to_real(raw(key), v)) throw std::invalid_argument("not a real: --" + key);
  return v;
}

long long RunConfig::integer(const std::string& key) const {
  long long v;
  if (!to_int(raw(key), v)) throw std::invalid_argument("not an integer: --" + key);
  return v;
}

RationalTorsion RunConfig::rational(const std::string& key) const { return parse_rational(raw(key)); }

std::vector<double> RunConfig::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : split(raw(key), ',')) {
    double v;
    if (!to_real(s, v)) throw std::invalid_argument("not a real list: --" + key);
    out.push_back(v);
  }
  return out;
}

std::vector<long long> RunConfig::integers(const std::string& key) const {
  std::vector<long long> out;
  for (const auto& s : split(raw(key), ',')) {
    long long v;
    if (!to_int(s, v)) throw std::invalid_argument("not an integer list: --" + key);
    out.push_back(v);
  }
  return out;
}

RunConfig parse_args(int argc, const char* const* argv) {
  CLI::App app{"riemannlab"};
  app.require_subcommand(1, 1);
  std::map<std::string, CLI::App*> groups;
  struct Bound {
    const CommandSpec* spec;
    CLI::App* app;
    std::vector<std::string> values;
    std::string out, svg;
  };
  std::vector<Bound> bound;
  bound.reserve(command_table().size());
  for (const auto& cs : command_table()) {
    CLI::App*& g = groups[cs.group];
    if (!g) {
      g = app.add_subcommand(cs.group, cs.group + " commands");
      g->require_subcommand(1, 1);
    }
    bound.push_back({&cs, g->add_subcommand(cs.verb, cs.help), {}, cs.group + "_" + cs.verb + ".csv", ""});
    Bound& b = bound.back();
    b.values.resize(cs.params.size());
    for (std::size_t i = 0; i < cs.params.size(); ++i) {
      b.values[i] = cs.params[i].default_value;
      b.app->add_option("--" + cs.params[i].name, b.values[i], cs.params[i].help)->capture_default_str();
    }
    b.app->add_option("--out", b.out, "CSV output path")->capture_default_str();
    if (cs.svg) b.app->add_option("--svg", b.svg, "SVG output path");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    RunConfig c;
    c.help = usage_text();
    return c;
  } catch (const CLI::CallForAllHelp&) {
    RunConfig c;
    c.help = usage_text();
    return c;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what(), usage_text());
  }
  for (auto& b : bound) {
    if (!b.app->parsed()) continue;
    RunConfig c;
    c.group = b.spec->group;
    c.verb = b.spec->verb;
    for (std::size_t i = 0; i < b.spec->params.size(); ++i) {
      validate(b.spec->params[i], b.values[i]);
      c.params.emplace_back(b.spec->params[i].name, b.values[i]);
    }
    if (b.out.empty()) throw UsageError("invalid value for --out: empty path", usage_text());
    c.out = b.out;
    c.svg = b.svg;
    return c;
  }
  throw UsageError("missing command", usage_text());
}

void write_csv(const Table& table, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  for (std::size_t i = 0; i < table.columns.size(); ++i) f << (i ? "," : "") << table.columns[i];
  f << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      f.close();
      std::error_code ec;
      std::filesystem::remove(path, ec);
      throw IoError("row width does not match the header while writing " + path);
    }
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << fmt17(row[i]);
    f << '\n';
  }
  f.flush();
  if (!f) {
    f.close();
    std::error_code ec;
    std::filesystem::remove(path, ec);
    throw IoError("write failed for " + path);
  }
}

Table read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  Table t;
  std::string line;
  if (!std::getline(f, line)) throw IoError("empty file " + path);
  t.columns = split(line, ',');
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& s : split(line, ',')) {
      double v;
      if (s == "nan") v = std::nan("");
      else if (s == "inf") v = HUGE_VAL;
      else if (s == "-inf") v = -HUGE_VAL;
      else if (!to_real(s, v)) throw IoError("bad number '" + s + "' in " + path);
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_json(const json& metadata, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << metadata.dump(2) << '\n';
  f.flush();
  if (!f) {
    f.close();
    std::error_code ec;
    std::filesystem::remove(path, ec);
    throw IoError("write failed for " + path);
  }
}

void write_svg_polyline(const std::vector<std::pair<double, double>>& points, const std::string& path) {
  double xmin = HUGE_VAL, xmax = -HUGE_VAL, ymin = HUGE_VAL, ymax = -HUGE_VAL;
  for (const auto& [x, y] : points) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  const double span = points.empty() ? 1.0 : std::max({xmax - xmin, ymax - ymin, 1e-300});
  const double margin = 0.02, scale = (1.0 - 2 * margin) / span;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1 1\" width=\"600\" height=\"600\">\n"
    << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"0.002\" points=\"";
  char buf[64];
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double x = margin + (points[i].first - xmin) * scale;
    const double y = 1.0 - (margin + (points[i].second - ymin) * scale);
    std::snprintf(buf, sizeof buf, "%s%.6f,%.6f", i ? " " : "", x, y);
    f << buf;
  }
  f << "\"/>\n</svg>\n";
  f.flush();
  if (!f) {
    f.close();
    std::error_code ec;
    std::filesystem::remove(path, ec);
    throw IoError("write failed for " + path);
  }
}

int run_command(const RunConfig& config, std::string& err) {
  OutputSet outputs;
  try {
    CommandResult r = dispatch(config);
    outputs.add(config.out);
    write_csv(r.table, config.out);
    for (const auto& [suffix, table] : r.extra) {
      outputs.add(config.out + suffix);
      write_csv(table, config.out + suffix);
    }
    if (!config.svg.empty()) {
      outputs.add(config.svg);
      write_svg_polyline(r.curve, config.svg);
    }
    json meta;
    meta["command"] = config.group + " " + config.verb;
    json params = json::object();
    for (const auto& [k, v] : config.params) params[k] = v;
    meta["parameters"] = params;
    meta["version"] = kVersion;
    meta["timestamp"] = timestamp();
    meta["threads"] = worker_count();
    meta["outputs"] = outputs.paths();
    meta["achieved"] = r.achieved;
    outputs.add(config.out + ".meta.json");
    write_json(meta, config.out + ".meta.json");
    return 0;
  } catch (const std::exception& e) {
    outputs.remove_all();
    json rep;
    rep["error"] = e.what();
    rep["command"] = config.group + " " + config.verb;
    if (const auto* o = dynamic_cast<const OdeFailure*>(&e)) rep["t_reached"] = o->t_reached;
    if (const auto* b = dynamic_cast<const BlowUp*>(&e)) rep["t_reached"] = b->t_reached;
    err = rep.dump();
    return 1;
  }
}

int cli_main(int argc, const char* const* argv) {
  RunConfig c;
  try {
    c = parse_args(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << e.usage;
    return 2;
  }
  if (!c.help.empty()) {
    std::cout << c.help;
    return 0;
  }
  std::string err;
  const int code = run_command(c, err);
  if (code != 0) std::cerr << err << '\n';
  return code;
}

}  // namespace riemannlab
