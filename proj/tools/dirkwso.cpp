#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dirkwso/conditions.hpp"
#include "dirkwso/convergence.hpp"
#include "dirkwso/problems.hpp"
#include "dirkwso/search.hpp"
#include "dirkwso/stability.hpp"
#include "dirkwso/tableau.hpp"
#include "dirkwso/threads.hpp"
#include "dirkwso/wso.hpp"

using namespace dirkwso;

namespace {

constexpr int kExitMismatch = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A built-in name or a path to a tableau text file.
Tableau load_scheme(const std::string& spec) {
  for (const auto& n : builtin_names()) {
    if (n == spec) return builtin(spec);
  }
  if (std::filesystem::exists(spec)) return from_text(slurp(spec));
  throw UsageError("unknown scheme '" + spec + "' (not a built-in name or an existing file)");
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad number '" + item + "' in list '" + s + "'");
    }
  }
  return out;
}

// "a,b,c" or "halving:base:klo:khi".
std::vector<double> parse_dts(const std::string& s) {
  if (s.rfind("halving:", 0) == 0) {
    const auto parts = parse_list([&] {
      std::string t = s.substr(8);
      for (auto& ch : t) {
        if (ch == ':') ch = ',';
      }
      return t;
    }());
    if (parts.size() != 3) throw UsageError("expected halving:base:klo:khi");
    return halving(parts[0], int(parts[1]), int(parts[2]));
  }
  auto v = parse_list(s);
  if (v.empty()) throw UsageError("empty step-size list");
  return v;
}

struct VerifyOutcome {
  std::string text;
  bool mismatch = false;
};

VerifyOutcome verify_scheme(const Tableau& t, std::optional<std::pair<int, int>> expect, bool pretty) {
  const auto ord = report(t);
  const auto w = wso_of(t);
  const auto st = check_a_stability(t, ScanMode::fine);
  const int q = w.q;
  const int qcheck = q == kInfiniteWso ? 0 : q;
  const auto mp = qcheck >= 1 ? verify_min_poly(t, std::min(qcheck, 5)) : MinPolyCheck{};
  std::string q_text = q == kInfiniteWso ? "inf" : std::to_string(q);
  double ord_res = 0.0;
  for (const auto& [p, r] : ord.residuals_by_order) {
    if (p <= ord.order) ord_res = std::max(ord_res, r);
  }
  double wso_scaled = 0.0;
  for (int k = 1; k <= std::min(qcheck, 12); ++k) wso_scaled = std::max(wso_scaled, scaled_orthogonality(t, k));

  std::vector<std::pair<std::string, std::string>> rows = {
      {"scheme", t.label()},
      {"stages", std::to_string(t.stages())},
      {"origin", to_string(t.origin())},
      {"order", std::to_string(ord.order)},
      {"stage_order", std::to_string(ord.stage_order)},
      {"wso", q_text},
      {"dim_Kq", std::to_string(w.dim_Kq)},
      {"min_poly_degree", std::to_string(w.min_poly_degree)},
      {"stiffly_accurate", t.stiffly_accurate() ? "true" : "false"},
      {"a_stable", st.a_stable ? "true" : "false"},
      {"l_stable", st.l_stable ? "true" : "false"},
      {"max_imag_axis_modulus", num(st.max_imag_axis_modulus)},
      {"r_at_minus_inf", num(st.r_at_minus_inf)},
      {"max_order_residual", num(ord_res)},
      {"max_scaled_wso_residual", num(wso_scaled)},
      {"min_poly_residual", num(mp.residual)},
      {"tol_order", num(kConditionTol)},
      {"tol_wso", num(kWsoTol)},
      {"tol_stability", num(kStabilitySlack)},
  };
  std::string roots;
  for (const auto& r : w.min_poly_roots) {
    if (!roots.empty()) roots += " ";
    roots += num(r.real());
    if (r.imag() != 0.0) roots += (r.imag() > 0 ? "+" : "") + num(r.imag()) + "i";
  }
  rows.insert(rows.begin() + 8, {"min_poly_roots", roots});
  for (int p = 1; p <= kMaxTreeOrder; ++p) {
    if (auto it = ord.residuals_by_order.find(p); it != ord.residuals_by_order.end()) {
      rows.push_back({"residual_order_" + std::to_string(p), num(it->second)});
    }
  }

  VerifyOutcome out;
  if (expect) {
    const bool ok_p = ord.order == expect->first;
    const bool ok_q = q == expect->second;
    out.mismatch = !(ok_p && ok_q);
    rows.push_back({"expect", std::to_string(expect->first) + "," + std::to_string(expect->second)});
    rows.push_back({"expect_match", out.mismatch ? "false" : "true"});
  }
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.first.size());
  for (const auto& [k, v] : rows) {
    if (pretty) {
      out.text += k + std::string(width + 2 - k.size(), ' ') + v + "\n";
    } else {
      out.text += k + " " + v + "\n";
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DIRK schemes with high weak stage order: verification, stability, convergence and search"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List built-in schemes and problems");

  auto* verify = app.add_subcommand("verify", "Report order, stage order, WSO and stability of a scheme");
  std::string v_scheme;
  std::string v_expect;
  bool v_pretty = false;
  verify->add_option("scheme", v_scheme, "Built-in name or tableau file")->required();
  verify->add_option("--expect", v_expect, "Expected order and WSO as p,q (exit 1 on mismatch)");
  verify->add_flag("--pretty", v_pretty, "Align the report columns");

  auto* stab = app.add_subcommand("stability", "Export the stability region boundary |R(z)| = 1");
  std::string s_scheme;
  std::string s_window = "-10,10,-10,10";
  std::string s_out;
  int s_res = 400;
  stab->add_option("scheme", s_scheme, "Built-in name or tableau file")->required();
  stab->add_option("--window", s_window, "re_min,re_max,im_min,im_max");
  stab->add_option("--resolution", s_res, "Grid cells per axis")->check(CLI::Range(8, 10000));
  stab->add_option("--out", s_out, "Output path; .svg gives SVG, anything else CSV");

  auto* conv = app.add_subcommand("converge", "Run a convergence sweep and write the CSV table");
  std::string c_scheme;
  std::string c_problem;
  std::string c_dts;
  std::string c_out;
  std::vector<std::string> c_windows;
  bool c_plot = false;
  bool c_newton = false;
  double c_floor = 0.0;
  double c_floor_ux = -1.0;
  ProblemOptions c_opt;
  std::string c_cache = "vdp_cache";
  conv->add_option("--scheme", c_scheme, "Built-in name or tableau file")->required();
  conv->add_option("--problem", c_problem, "Problem id (see list)")->required();
  conv->add_option("--dts", c_dts, "Comma list or halving:base:klo:khi")->required();
  conv->add_option("--out", c_out, "CSV output path (stdout when omitted)");
  conv->add_option("--n", c_opt.n, "Grid size (0 = problem default)");
  conv->add_option("--order", c_opt.order, "Stencil order (0 = problem default)");
  conv->add_option("--lambda", c_opt.lambda_re, "Prothero-Robinson stiffness");
  conv->add_option("--mu", c_opt.mu, "Van der Pol parameter");
  conv->add_option("--floor", c_floor, "Error floor for fits (u)");
  conv->add_option("--floor-ux", c_floor_ux, "Error floor for fits (u_x)");
  conv->add_option("--window", c_windows, "Fit window lo:hi (repeatable)");
  conv->add_option("--cache", c_cache, "Directory for cached reference solutions");
  conv->add_flag("--plotdata", c_plot, "Write log10 columns");
  conv->add_flag("--newton", c_newton, "Disable the affine fast path");
  int c_threads = default_threads();
  conv->add_option("--threads", c_threads, "Rows run concurrently (default DIRKWSO_THREADS or all cores)");

  auto* srch = app.add_subcommand("search", "Random-restart search for feasible and optimized schemes");
  SearchConfig cfg;
  cfg.threads = default_threads();
  std::string r_out;
  srch->add_option("--s", cfg.s, "Stages");
  srch->add_option("--p", cfg.p, "Order");
  srch->add_option("--q", cfg.q, "Weak stage order");
  srch->add_option("--restarts", cfg.restarts, "Restart budget");
  srch->add_option("--seed", cfg.rng_seed, "RNG seed");
  srch->add_option("--threads", cfg.threads, "Worker threads (default DIRKWSO_THREADS or all cores)");
  srch->add_option("--out", r_out, "Checkpoint directory (candidates and reports)");
  bool r_quiet = false;
  srch->add_flag("--quiet", r_quiet, "No per-restart progress");

  auto* exp = app.add_subcommand("export", "Print a scheme as tableau text or CSV");
  std::string e_scheme;
  std::string e_format = "text";
  std::string e_out;
  exp->add_option("scheme", e_scheme, "Built-in name or tableau file")->required();
  exp->add_option("--format", e_format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
  exp->add_option("--out", e_out, "Output path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*list) {
      std::cout << "schemes\n";
      for (const auto& n : builtin_names()) {
        try {
          const Tableau t = builtin(n);
          std::cout << "  " << n << " stages " << t.stages() << "  " << t.note() << "\n";
        } catch (const TableauError& e) {
          std::cout << "  " << n << " unavailable: " << e.what() << "\n";
        }
      }
      std::cout << "problems\n";
      for (const auto& p : problem_ids()) std::cout << "  " << p << "\n";
      return 0;
    }
    if (*verify) {
      std::optional<std::pair<int, int>> expect;
      if (!v_expect.empty()) {
        const auto v = parse_list(v_expect);
        if (v.size() != 2) throw UsageError("--expect takes p,q");
        expect = std::make_pair(int(v[0]), int(v[1]));
      }
      const auto out = verify_scheme(load_scheme(v_scheme), expect, v_pretty);
      std::cout << out.text;
      return out.mismatch ? kExitMismatch : 0;
    }
    if (*stab) {
      const auto w = parse_list(s_window);
      if (w.size() != 4 || !(w[0] < w[1]) || !(w[2] < w[3])) {
        throw UsageError("--window takes re_min,re_max,im_min,im_max with min < max");
      }
      const Window win{w[0], w[1], w[2], w[3], s_res, s_res};
      const auto lines = region_boundary(load_scheme(s_scheme), win);
      const bool svg = s_out.size() > 4 && s_out.substr(s_out.size() - 4) == ".svg";
      write_out(s_out, svg ? boundary_svg(lines, win) : boundary_csv(lines));
      return 0;
    }
    if (*conv) {
      const Tableau t = load_scheme(c_scheme);
      const AnyProblem problem = make_problem(c_problem, c_opt);
      SweepOptions so;
      so.affine_fast_path = !c_newton;
      so.threads = c_threads;
      so.error_floor = c_floor;
      so.error_floor_ux = c_floor_ux;
      for (const auto& w : c_windows) {
        const auto colon = w.find(':');
        if (colon == std::string::npos) throw UsageError("--window takes lo:hi");
        const auto v = parse_list(w.substr(0, colon) + "," + w.substr(colon + 1));
        so.windows.emplace_back(std::min(v[0], v[1]), std::max(v[0], v[1]));
      }
      if (c_problem == "van_der_pol") {
        const auto& p = std::get<IvpProblem<double>>(problem);
        so.reference = van_der_pol_reference(c_opt.mu, p.t_end, c_cache);
      }
      const auto table = sweep(t, problem, parse_dts(c_dts), so);
      if (c_out.empty()) {
        std::cout << to_csv(table, c_plot);
      } else {
        emit(table, c_out, c_plot);
      }
      return 0;
    }
    if (*srch) {
      cfg.validate();
      auto progress = [&](int r, const std::string& st) {
        if (!r_quiet) std::fprintf(stderr, "restart %d %s\n", r, st.c_str());
      };
      const auto res = run_search(cfg, r_out, progress);
      std::printf("restarts %d\nfeasible %zu\npareto %zu\n", res.restarts_run, res.pool.size(),
                  res.pareto.size());
      for (const auto& [k, v] : res.failures) std::printf("failed_%s %d\n", k.c_str(), v);
      for (const auto& c : res.pareto) {
        std::printf("pareto restart %d F %.17g max_coeff %.17g\n", c.restart, c.F_value, c.max_coeff());
      }
      return 0;
    }
    if (*exp) {
      const Tableau t = load_scheme(e_scheme);
      write_out(e_out, e_format == "csv" ? to_csv(t) : to_text(t));
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
