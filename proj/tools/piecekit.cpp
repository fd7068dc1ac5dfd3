// piecekit: fit, evaluate and transform piecewise functions from the shell.
//
// Exit codes: 0 ok, 2 usage, 3 computation, 4 I/O.

#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "piecekit/core.hpp"
#include "piecekit/demos.hpp"
#include "piecekit/fitting.hpp"
#include "piecekit/format.hpp"
#include "piecekit/hilbert.hpp"
#include "piecekit/oracle.hpp"
#include "piecekit/sampled.hpp"

using namespace piecekit;

namespace {

enum Exit { kOk = 0, kUsage = 2, kCompute = 3, kIo = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_real(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("invalid number '" + s + "' in " + what);
  }
}

std::vector<double> reals(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(to_real(part, what));
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write " + path);
}

PiecewiseFunction load(const std::string& path) { return deserialize(slurp(path)); }

// NAME[@left|@right|@X0][:s1[:s2...]]
Candidate parse_candidate(const std::string& spec) {
  auto parts = split(spec, ':');
  Candidate c;
  std::string head = parts[0];
  const auto at = head.find('@');
  c.formula = head.substr(0, at);
  if (at != std::string::npos) {
    const std::string where = head.substr(at + 1);
    if (where == "left") {
      c.anchor = Anchor::left;
    } else if (where == "right") {
      c.anchor = Anchor::right;
    } else {
      c.anchor = Anchor::fixed;
      c.anchor_value = to_real(where, "--formulas anchor");
    }
  }
  for (std::size_t i = 1; i < parts.size(); ++i) c.shape.push_back(to_real(parts[i], "--formulas shape"));
  find_formula(c.formula);
  return c;
}

std::vector<double> grid_points(const std::string& grid, const std::string& at) {
  if (!at.empty()) return reals(at, "--at");
  if (grid.empty()) throw UsageError("give --grid A,B,N or --at X1,X2,...");
  auto g = reals(grid, "--grid");
  if (g.size() != 3 || g[2] < 1 || g[2] != std::floor(g[2])) throw UsageError("--grid expects A,B,N");
  const auto n = static_cast<std::size_t>(g[2]);
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = n == 1 ? g[0] : g[0] + (g[1] - g[0]) * double(i) / double(n - 1);
  if (n > 1) xs.back() = g[1];
  return xs;
}

void print_report(const FitReport& r, std::ostream& os) {
  os << "pieces: " << r.pieces_produced << "\n";
  os << "max_observed_error: " << format_real(r.max_observed_error) << "\n";
  os << "target_evaluations: " << r.evaluations << "\n";
  for (const auto& p : r.pieces) {
    os << "piece [" << format_real(p.interval.lo) << ", " << format_real(p.interval.hi) << "]";
    for (const auto& t : p.terms) os << " " << t;
    if (p.poly_degree >= 0) os << " degree=" << p.poly_degree;
    os << " error=" << format_real(p.max_error) << " tolerance=" << format_real(p.tolerance) << "\n";
  }
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string target, interval, formulas = "POLY", parity = "none", subtract, out;
  double rtol = 1e-6, atol = 0.0;
  int max_degree = 12;
  std::uint64_t seed = 0;
  bool parallel = false;
};

int run_fit(const FitArgs& a) {
  auto iv = reals(a.interval, "--interval");
  if (iv.size() != 2) throw UsageError("--interval expects A,B");
  FitConfig cfg;
  cfg.rtol = a.rtol;
  cfg.atol = a.atol;
  cfg.max_poly_degree = a.max_degree;
  cfg.parallel = a.parallel;
  try {
    cfg.parity = parse_parity(a.parity);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  cfg.rng_seed = a.seed;
  if (const char* env = std::getenv("PIECEKIT_SEED")) {
    try {
      cfg.rng_seed = std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError(std::string("PIECEKIT_SEED is not an integer: ") + env);
    }
  }
  cfg.candidates.clear();
  for (const auto& spec : split(a.formulas, ',')) {
    try {
      cfg.candidates.push_back(parse_candidate(spec));
    } catch (const UnknownFormula& e) {
      throw UsageError(e.what());
    }
  }

  Target target;
  std::optional<SampledTarget> sampled;
  if (a.target == "builtin:square-lattice-dos") {
    target = demos::square_lattice_dos;
  } else if (a.target.rfind("csv:", 0) == 0) {
    std::ifstream in(a.target.substr(4));
    if (!in) throw IoError("cannot read " + a.target.substr(4));
    sampled.emplace(SampledTarget::from_csv(in));
    target = [&sampled](double x) { return (*sampled)(x); };
  } else {
    throw UsageError("--target must be builtin:square-lattice-dos or csv:PATH");
  }

  std::optional<PiecewiseFunction> subtract;
  Target fit_target = target;
  if (!a.subtract.empty()) {
    subtract = load(a.subtract);
    fit_target = [&target, &subtract](double x) { return target(x) - subtract->evaluate(x); };
  }

  auto finish = [&](FitResult& r) {
    PiecewiseFunction f = subtract ? add(r.function, *subtract) : r.function;
    spit(a.out, serialize(f));
    print_report(r.report, std::cout);
    std::cout << summary(f) << "\n";
  };

  try {
    auto r = piecewisefit(fit_target, {iv[0], iv[1]}, cfg);
    finish(r);
    return kOk;
  } catch (FitDidNotConverge& e) {
    FitResult partial = e.partial();
    finish(partial);
    std::cerr << "error: " << e.what() << "\n";
    return kCompute;
  }
}

int run_eval(const std::string& in, const std::string& grid, const std::string& at) {
  const auto f = load(in);
  for (double x : grid_points(grid, at)) std::cout << format_real(x) << "," << format_real(f(x)) << "\n";
  return kOk;
}

int run_moment(const std::string& in, int n) {
  if (n < 0) throw UsageError("--n must be nonnegative");
  const auto m = moments(load(in), n);
  for (int k = 0; k <= n; ++k) std::cout << k << "," << format_real(m[k]) << "\n";
  return kOk;
}

int run_hilbert(const std::string& in, const std::vector<std::string>& zs, bool real_axis, const std::string& grid,
                const std::string& at) {
  const auto f = load(in);
  if (!real_axis && zs.empty()) throw UsageError("give --z RE,IM or --real-axis");
  std::ostringstream os;
  for (const auto& s : zs) {
    auto v = reals(s, "--z");
    if (v.size() != 2) throw UsageError("--z expects RE,IM");
    const cplx z(v[0], v[1]);
    os << format_complex(z) << "," << format_complex(hilbert(f, z)) << "\n";
  }
  if (real_axis)
    for (double y : grid_points(grid, at)) os << format_real(y) << "," << format_complex(hilbert(f, cplx(y, 0.0))) << "\n";
  std::cout << os.str();
  return kOk;
}

int run_quad(const std::string& in, std::optional<int> n, const std::string& zs) {
  const auto f = load(in);
  if (n) {
    const double exact = moments(f, *n)[*n];
    const double q = quad_moment(f, *n).value;
    std::cout << "n,analytic,quadrature,difference\n";
    std::cout << *n << "," << format_real(exact) << "," << format_real(q) << "," << format_real(exact - q) << "\n";
    return kOk;
  }
  if (zs.empty()) throw UsageError("quad needs --n N or --z RE,IM");
  auto v = reals(zs, "--z");
  if (v.size() != 2 || v[1] == 0) throw UsageError("--z expects RE,IM with IM != 0");
  const cplx z(v[0], v[1]);
  const cplx exact = hilbert(f, z);
  const cplx q = quad_hilbert(f, z).value;
  std::cout << "z_re,z_im,analytic_re,analytic_im,quadrature_re,quadrature_im,abs_difference\n";
  std::cout << format_complex(z) << "," << format_complex(exact) << "," << format_complex(q) << ","
            << format_real(std::abs(exact - q)) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"piecekit: piecewise functions with closed-form moments and Hilbert transforms"};
  app.require_subcommand(1);

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "fit a piecewise function to a target");
  fit->add_option("--target", fa.target, "builtin:square-lattice-dos or csv:PATH")->required();
  fit->add_option("--interval", fa.interval, "A,B")->required();
  fit->add_option("--formulas", fa.formulas, "comma list of NAME[@left|@right|@X0][:shape...]");
  fit->add_option("--parity", fa.parity, "none, even or odd");
  fit->add_option("--rtol", fa.rtol);
  fit->add_option("--atol", fa.atol);
  fit->add_option("--max-degree", fa.max_degree);
  fit->add_option("--subtract", fa.subtract, "JSON function removed before fitting and added back after");
  fit->add_option("--seed", fa.seed);
  fit->add_flag("--parallel", fa.parallel, "fit bisected halves concurrently");
  fit->add_option("--out", fa.out, "output JSON path")->required();

  std::string in, grid, at, zq;
  std::vector<std::string> zs;
  int n = 0;
  bool real_axis = false;

  auto* eval = app.add_subcommand("eval", "evaluate on a grid");
  eval->add_option("--in", in)->required();
  eval->add_option("--grid", grid, "A,B,N");
  eval->add_option("--at", at, "X1,X2,...");

  auto* moment = app.add_subcommand("moment", "moments M_0..M_n");
  moment->add_option("--in", in)->required();
  moment->add_option("--n", n, "highest order")->required();

  auto* hil = app.add_subcommand("hilbert", "Hilbert transform int f(x)/(z - x) dx");
  hil->add_option("--in", in)->required();
  hil->add_option("--z", zs, "RE,IM (repeatable)");
  hil->add_flag("--real-axis", real_axis, "boundary value from above at real points");
  hil->add_option("--grid", grid, "A,B,N");
  hil->add_option("--at", at, "X1,X2,...");

  auto* sh = app.add_subcommand("show", "print constructor-style text");
  sh->add_option("--in", in)->required();

  std::optional<int> qn;
  auto* quad = app.add_subcommand("quad", "cross-check against adaptive quadrature (slow)");
  quad->add_option("--in", in)->required();
  quad->add_option("--n", qn, "moment order");
  quad->add_option("--z", zq, "RE,IM");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  std::cout.precision(17);
  try {
    if (*fit) return run_fit(fa);
    if (*eval) return run_eval(in, grid, at);
    if (*moment) return run_moment(in, n);
    if (*hil) return run_hilbert(in, zs, real_axis, grid, at);
    if (*sh) {
      const auto f = load(in);
      std::cout << show(f) << summary(f) << "\n";
      return kOk;
    }
    if (*quad) return run_quad(in, qn, zq);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCompute;
  }
  return kUsage;
}
