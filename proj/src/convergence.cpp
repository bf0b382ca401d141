#include "dirkwso/convergence.hpp"
#include "dirkwso/threads.hpp"

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <atomic>
#include <filesystem>
#include <functional>
#include <limits>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dirkwso {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class S>
ConvergenceRow run_row(const Tableau& t, const IvpProblem<S>& p, double dt, const SweepOptions& opt) {
  ConvergenceRow row;
  row.dt = dt;
  row.steps = step_count(p.t_end - p.t0, dt);
  try {
    Integrator<S> integ(t, p, opt.newton);
    integ.use_affine_fast_path(opt.affine_fast_path);
    auto res = integ.integrate(dt, row.steps);
    row.stats = res.state.stats;
    if (opt.reference) {
      if constexpr (std::is_same_v<S, double>) {
        row.err_u = max_norm<double>(Vector(res.state.u - *opt.reference));
      }
    } else {
      row.err_u = res.err_u;
    }
    row.err_ux = res.err_ux;
  } catch (const std::exception& e) {
    row.failure = e.what();
    row.err_u.reset();
    row.err_ux.reset();
  }
  return row;
}

bool in_window(double dt, double lo, double hi) {
  const double eps = 1e-12 * std::max(std::abs(lo), std::abs(hi));
  return dt >= lo - eps && dt <= hi + eps;
}

std::optional<double> pick_err(const ConvergenceRow& r, ErrorKind kind) {
  return kind == ErrorKind::u ? r.err_u : r.err_ux;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string FitWindow::label() const { return num(dt_lo) + ":" + num(dt_hi); }

long step_count(double span, double dt) {
  if (!(dt > 0.0) || !(span > 0.0)) throw std::invalid_argument("step size and span must be positive");
  const double ratio = span / dt;
  const double n = std::round(ratio);
  if (n < 1 || std::abs(ratio - n) > 1e-12 * ratio) {
    throw std::invalid_argument("dt = " + num(dt) + " does not divide the interval " + num(span));
  }
  return long(n);
}

ConvergenceTable sweep(const Tableau& t, const AnyProblem& problem, std::vector<double> dts,
                       const SweepOptions& opt) {
  ConvergenceTable table;
  table.scheme = t.label();
  table.error_floor = opt.error_floor;
  table.error_floor_ux = opt.error_floor_ux;
  std::sort(dts.begin(), dts.end(), std::greater<>());
  std::visit(
      [&](const auto& p) {
        table.problem = p.id;
        table.rows.resize(dts.size());
        std::atomic<std::size_t> next{0};
        auto work = [&] {
          for (std::size_t i; (i = next.fetch_add(1)) < dts.size();) table.rows[i] = run_row(t, p, dts[i], opt);
        };
        const int n = std::min<int>(opt.threads > 0 ? opt.threads : default_threads(), int(dts.size()));
        std::vector<std::thread> pool;
        for (int k = 1; k < n; ++k) pool.emplace_back(work);
        work();
        for (auto& th : pool) th.join();
      },
      problem);
  for (const auto& [lo, hi] : opt.windows) table.windows.push_back(FitWindow{lo, hi, {}, {}});
  fit_windows(table);
  return table;
}

double fit_slope(const std::vector<double>& dts, const std::vector<double>& errs) {
  if (dts.size() != errs.size()) throw FitError("dt and error lists differ in length");
  if (dts.size() < 3) throw FitError("need at least three points for a slope fit");
  double mx = 0;
  double my = 0;
  const double n = double(dts.size());
  for (std::size_t i = 0; i < dts.size(); ++i) {
    if (!(dts[i] > 0) || !(errs[i] > 0)) throw FitError("non-positive value in slope fit");
    mx += std::log(dts[i]);
    my += std::log(errs[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0;
  double sxx = 0;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const double dx = std::log(dts[i]) - mx;
    sxy += dx * (std::log(errs[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0) throw FitError("all step sizes coincide");
  return sxy / sxx;
}

double fit_slope(const ConvergenceTable& table, double lo, double hi, ErrorKind kind) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& r : table.rows) {
    const auto e = pick_err(r, kind);
    if (!e || !in_window(r.dt, lo, hi) || !(*e > 10 * table.floor_for(kind))) continue;
    x.push_back(r.dt);
    y.push_back(*e);
  }
  if (x.size() < 3) {
    throw FitError("only " + std::to_string(x.size()) + " rows above the error floor in window " +
                   num(lo) + ":" + num(hi));
  }
  return fit_slope(x, y);
}

double fit_slope_above_floor(const ConvergenceTable& table, ErrorKind kind) {
  return fit_slope(table, 0.0, std::numeric_limits<double>::infinity(), kind);
}

void fit_windows(ConvergenceTable& table) {
  for (auto& w : table.windows) {
    try {
      w.slope_u = fit_slope(table, w.dt_lo, w.dt_hi, ErrorKind::u);
    } catch (const FitError&) {
      w.slope_u.reset();
    }
    try {
      w.slope_ux = fit_slope(table, w.dt_lo, w.dt_hi, ErrorKind::ux);
    } catch (const FitError&) {
      w.slope_ux.reset();
    }
  }
}

std::string to_csv(const ConvergenceTable& table, bool plotdata) {
  auto cell = [&](std::optional<double> v) -> std::string {
    if (!v) return "";
    return num(plotdata ? std::log10(*v) : *v);
  };
  std::string out = plotdata ? "log10_dt,log10_err_u,log10_err_ux,slope_window\n"
                             : "dt,err_u,err_ux,slope_window\n";
  for (const auto& r : table.rows) {
    std::string label;
    for (const auto& w : table.windows) {
      if (in_window(r.dt, w.dt_lo, w.dt_hi)) {
        label = w.label();
        break;
      }
    }
    out += cell(r.dt) + "," + cell(r.err_u) + "," + cell(r.err_ux) + "," + label + "\n";
  }
  out += "# scheme " + table.scheme + "\n";
  out += "# problem " + table.problem + "\n";
  out += "# error_floor " + num(table.error_floor) + "\n";
  if (table.error_floor_ux >= 0.0) out += "# error_floor_ux " + num(table.error_floor_ux) + "\n";
  for (const auto& w : table.windows) {
    out += "# window " + w.label() + " slope_u " + (w.slope_u ? num(*w.slope_u) : "nan") +
           " slope_ux " + (w.slope_ux ? num(*w.slope_ux) : "nan") + "\n";
  }
  for (const auto& r : table.rows) {
    out += "# stats " + num(r.dt) + " steps " + std::to_string(r.steps) + " newton " +
           std::to_string(r.stats.newton_iterations) + " solves " +
           std::to_string(r.stats.linear_solves) + " factorizations " +
           std::to_string(r.stats.factorizations) + " rhs " +
           std::to_string(r.stats.rhs_evaluations);
    if (!r.failure.empty()) out += " failed " + r.failure;
    out += "\n";
  }
  return out;
}

ConvergenceTable parse_csv(const std::string& text) {
  ConvergenceTable table;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "dt,err_u,err_ux,slope_window") {
    throw std::invalid_argument("missing convergence CSV header");
  }
  auto parse_opt = [](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key;
      ls >> key;
      if (key == "scheme") {
        ls >> table.scheme;
      } else if (key == "problem") {
        ls >> table.problem;
      } else if (key == "error_floor") {
        ls >> table.error_floor;
      } else if (key == "error_floor_ux") {
        ls >> table.error_floor_ux;
      } else if (key == "window") {
        std::string label, k1, s1, k2, s2;
        ls >> label >> k1 >> s1 >> k2 >> s2;
        const auto colon = label.find(':');
        FitWindow w{std::stod(label.substr(0, colon)), std::stod(label.substr(colon + 1)), {}, {}};
        if (s1 != "nan") w.slope_u = std::stod(s1);
        if (s2 != "nan") w.slope_ux = std::stod(s2);
        table.windows.push_back(w);
      }
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 4) throw std::invalid_argument("malformed convergence CSV row: " + line);
    ConvergenceRow r;
    r.dt = std::stod(f[0]);
    r.err_u = parse_opt(f[1]);
    r.err_ux = parse_opt(f[2]);
    table.rows.push_back(r);
  }
  return table;
}

void emit(const ConvergenceTable& table, const std::string& path, bool plotdata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << to_csv(table, plotdata);
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

std::vector<double> halving(double base, int k_lo, int k_hi) {
  std::vector<double> out;
  for (int k = k_lo; k <= k_hi; ++k) out.push_back(std::ldexp(base, -k));
  return out;
}

Vector rk4(const IvpProblem<double>& p, long n) {
  const double dt = (p.t_end - p.t0) / double(n);
  Vector u = p.u0;
  for (long i = 0; i < n; ++i) {
    const double t = p.t0 + double(i) * dt;
    const Vector k1 = p.rhs(t, u);
    const Vector k2 = p.rhs(t + dt / 2, u + dt / 2 * k1);
    const Vector k3 = p.rhs(t + dt / 2, u + dt / 2 * k2);
    const Vector k4 = p.rhs(t + dt, u + dt * k3);
    u += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return u;
}

Vector van_der_pol_reference(double mu, double t_end, const std::string& cache_dir) {
  const double dt = 1e-6;
  const long n = step_count(t_end, dt);
  std::filesystem::path file;
  if (!cache_dir.empty()) {
    char name[128];
    std::snprintf(name, sizeof name, "van_der_pol_mu%.17g_T%.17g_rk4_dt1e-06.txt", mu, t_end);
    file = std::filesystem::path(cache_dir) / name;
    std::ifstream in(file);
    double x = 0;
    double y = 0;
    if (in >> x >> y) {
      Vector v(2);
      v << x, y;
      return v;
    }
  }
  const Vector ref = rk4(van_der_pol(mu, t_end), n);
  if (!cache_dir.empty()) {
    std::filesystem::create_directories(cache_dir);
    std::ofstream out(file);
    out << num(ref(0)) << " " << num(ref(1)) << "\n";
  }
  return ref;
}

}  // namespace dirkwso
