#include "piecekit/fitting.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <random>

#include "piecekit/format.hpp"

namespace piecekit {

FitDidNotConverge::FitDidNotConverge(Interval worst, double error, FitResult partial)
    : Error("fit did not converge on [" + format_real(worst.lo) + ", " + format_real(worst.hi) +
            "]: max error " + format_real(error)),
      worst_(worst),
      error_(error),
      partial_(std::move(partial)) {}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Householder least squares on a column-major rows x cols matrix. Columns are
// normalized first; a diagonal entry of R below rank_tol marks rank loss.
std::vector<double> least_squares(std::vector<double> a, std::size_t rows, std::size_t cols, std::vector<double> b,
                                  double rank_tol = 1e-12) {
  std::vector<double> norms(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += a[j * rows + i] * a[j * rows + i];
    s = std::sqrt(s);
    if (s == 0.0) throw RankDeficient(j);
    norms[j] = s;
    for (std::size_t i = 0; i < rows; ++i) a[j * rows + i] /= s;
  }
  std::vector<double> diag(cols);
  for (std::size_t k = 0; k < cols; ++k) {
    double* col = &a[k * rows];
    double alpha = 0.0;
    for (std::size_t i = k; i < rows; ++i) alpha += col[i] * col[i];
    alpha = std::sqrt(alpha);
    if (alpha <= rank_tol) throw RankDeficient(k);
    if (col[k] > 0) alpha = -alpha;
    // v = x - alpha e1, stored in place
    col[k] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < rows; ++i) vnorm2 += col[i] * col[i];
    for (std::size_t j = k + 1; j < cols; ++j) {
      double* cj = &a[j * rows];
      double dot = 0.0;
      for (std::size_t i = k; i < rows; ++i) dot += col[i] * cj[i];
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < rows; ++i) cj[i] -= f * col[i];
    }
    double dot = 0.0;
    for (std::size_t i = k; i < rows; ++i) dot += col[i] * b[i];
    const double f = 2.0 * dot / vnorm2;
    for (std::size_t i = k; i < rows; ++i) b[i] -= f * col[i];
    diag[k] = alpha;
  }
  std::vector<double> x(cols);
  for (std::size_t k = cols; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < cols; ++j) s -= a[j * rows + k] * x[j];
    x[k] = s / diag[k];
  }
  for (std::size_t j = 0; j < cols; ++j) x[j] /= norms[j];
  return x;
}

// coefficients of p(y + s) in y
std::vector<double> taylor_shift(std::vector<double> c, double s) {
  const std::size_t n = c.size() - 1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = n; k-- > i;) c[k] += s * c[k + 1];
  return c;
}

std::vector<double> chebyshev_nodes(Interval iv, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[n - 1 - i] = iv.mid() + 0.5 * iv.width() * std::cos(std::numbers::pi * (2.0 * i + 1.0) / (2.0 * n));
  return x;
}

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// A candidate resolved against the fit frame: formula plus base parameters
// with all linear slots zeroed.
struct Resolved {
  const Formula* formula;
  std::vector<double> base;
  std::vector<std::size_t> linear;
  std::optional<double> anchor;
  bool poly;
};

Resolved resolve(const Candidate& c, Interval frame) {
  const Formula& f = find_formula(c.formula);
  Resolved r{&f, {}, {}, std::nullopt, f.name() == "POLY"};
  if (r.poly) return r;
  std::vector<double> probe(f.arity(), 0.0);
  const bool anchored = f.anchor(probe).has_value();
  if (anchored) {
    const double x0 = c.anchor == Anchor::left ? frame.lo : c.anchor == Anchor::right ? frame.hi : c.anchor_value;
    r.base.push_back(x0);
    r.anchor = x0;
  }
  r.base.insert(r.base.end(), c.shape.begin(), c.shape.end());
  if (r.base.size() > f.arity() && !f.variadic())
    throw ArityMismatch(c.formula + ": too many shape parameters for candidate");
  r.base.resize(std::max(r.base.size(), f.arity()), 0.0);
  r.linear = f.linear_params(r.base.size());
  for (std::size_t i : r.linear) r.base[i] = 0.0;
  return r;
}

struct Column {
  std::size_t candidate;
  std::size_t param;  // linear slot, or POLY power
};

class Design {
public:
  Design(std::vector<Resolved> cands, Interval piece, int degree) : cands_(std::move(cands)), piece_(piece) {
    for (std::size_t c = 0; c < cands_.size(); ++c) {
      if (cands_[c].poly) {
        for (int k = 0; k <= degree; ++k) cols_.push_back({c, static_cast<std::size_t>(k)});
      } else {
        for (std::size_t i : cands_[c].linear) cols_.push_back({c, i});
      }
    }
  }

  std::size_t size() const { return cols_.size(); }
  void drop(std::size_t j) { cols_.erase(cols_.begin() + static_cast<std::ptrdiff_t>(j)); }

  double column(std::size_t j, double x) const {
    const auto& col = cols_[j];
    const auto& r = cands_[col.candidate];
    if (r.poly) return std::pow((x - piece_.mid()) / (0.5 * piece_.width()), static_cast<double>(col.param));
    auto p = r.base;
    p[col.param] = 1.0;
    return r.formula->eval(x, p);
  }

  // Terms in candidate order; POLY converted from the centered basis to monomials in x.
  std::vector<Term> terms(std::span<const double> coef) const {
    std::vector<Term> out;
    for (std::size_t c = 0; c < cands_.size(); ++c) {
      const auto& r = cands_[c];
      if (r.poly) {
        std::vector<double> t;
        for (std::size_t j = 0; j < cols_.size(); ++j)
          if (cols_[j].candidate == c) {
            if (t.size() <= cols_[j].param) t.resize(cols_[j].param + 1, 0.0);
            t[cols_[j].param] = coef[j];
          }
        if (t.empty()) continue;
        const double h = 0.5 * piece_.width();
        double hp = 1.0;
        for (auto& v : t) {
          v /= hp;
          hp *= h;
        }
        out.emplace_back(*r.formula, taylor_shift(std::move(t), -piece_.mid()));
      } else {
        auto p = r.base;
        bool any = false;
        for (std::size_t j = 0; j < cols_.size(); ++j)
          if (cols_[j].candidate == c) {
            p[cols_[j].param] = coef[j];
            any = true;
          }
        if (any) out.emplace_back(*r.formula, std::move(p));
      }
    }
    return out;
  }

private:
  std::vector<Resolved> cands_;
  Interval piece_;
  std::vector<Column> cols_;
};

struct Solve {
  std::vector<Term> terms;
  std::vector<double> nodes;
  std::vector<double> values;
};

template <class Eval>
Solve solve(const Eval& eval, Design& design, Interval piece, int oversample, bool drop_dependent) {
  while (true) {
    if (design.size() == 0) throw RankDeficient(0);
    const auto nodes = chebyshev_nodes(piece, design.size() + static_cast<std::size_t>(oversample));
    std::vector<double> values(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) values[i] = eval(nodes[i]);
    std::vector<double> a(nodes.size() * design.size());
    for (std::size_t j = 0; j < design.size(); ++j)
      for (std::size_t i = 0; i < nodes.size(); ++i) a[j * nodes.size() + i] = design.column(j, nodes[i]);
    try {
      auto coef = least_squares(std::move(a), nodes.size(), design.size(), values);
      return {design.terms(coef), nodes, values};
    } catch (const RankDeficient& e) {
      if (!drop_dependent) throw;
      design.drop(e.column());
    }
  }
}

double rule_value(const std::vector<Term>& terms, double x) {
  double s = 0.0;
  for (const auto& t : terms) s += t(x);
  return s;
}

// ---------------------------------------------------------------------------

struct Leaf {
  Piece piece;
  PieceSummary summary;
  bool converged;
};

class Fitter {
public:
  Fitter(const Target& target, Interval frame, const FitConfig& config)
      : target_(target), frame_(frame), config_(config) {
    for (const auto& c : config_.candidates) {
      auto r = resolve(c, frame_);
      has_poly_ = has_poly_ || r.poly;
      cands_.push_back(std::move(r));
    }
    min_width_ = config_.min_width > 0 ? config_.min_width : 1e-6 * frame_.width();
  }

  double eval(double x) const {
    ++evaluations_;
    const double y = target_(x);
    if (!std::isfinite(y)) throw TargetNotFinite(x);
    return y;
  }

  long evaluations() const { return evaluations_.load(); }

  std::vector<Leaf> fit(Interval iv, int depth, std::uint64_t path) const {
    auto leaf = attempt(iv, path);
    if (leaf.converged) return {std::move(leaf)};
    const double mid = iv.mid();
    if (depth >= config_.max_depth || 0.5 * iv.width() < min_width_ || !(iv.lo < mid && mid < iv.hi))
      return {std::move(leaf)};
    const Interval left{iv.lo, mid}, right{mid, iv.hi};
    std::vector<Leaf> a, b;
    if (config_.parallel && depth < 6) {
      auto fut = std::async(std::launch::async, [&] { return fit(right, depth + 1, 2 * path + 1); });
      a = fit(left, depth + 1, 2 * path);
      b = fut.get();
    } else {
      a = fit(left, depth + 1, 2 * path);
      b = fit(right, depth + 1, 2 * path + 1);
    }
    a.insert(a.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));
    return a;
  }

private:
  std::vector<double> validation_points(Interval iv, std::uint64_t path, const std::vector<double>& fit_nodes) const {
    const std::size_t total = static_cast<std::size_t>(std::max(config_.validation_points, 2));
    const std::size_t half = total / 2;
    std::vector<double> pts;
    const std::size_t gaps = fit_nodes.size() > 1 ? fit_nodes.size() - 1 : 0;
    const std::size_t nmid = std::min(half, gaps);
    for (std::size_t k = 0; k < nmid; ++k) {
      const std::size_t i = nmid == gaps ? k : (k * gaps) / nmid;
      pts.push_back(0.5 * (fit_nodes[i] + fit_nodes[i + 1]));
    }
    std::mt19937_64 rng(splitmix(config_.rng_seed ^ splitmix(path)));
    while (pts.size() < total) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      const double x = iv.lo + u * iv.width();
      if (iv.lo < x && x < iv.hi) pts.push_back(x);
    }
    return pts;
  }

  std::array<bool, 2> flags_for(Interval iv) const {
    std::array<bool, 2> flags{true, true};
    for (const auto& r : cands_) {
      if (!r.anchor) continue;
      auto p = r.base;
      for (std::size_t i : r.linear) p[i] = 1.0;
      if (!r.formula->singular_at_anchor(p)) continue;
      if (*r.anchor == iv.lo) flags[0] = false;
      if (*r.anchor == iv.hi) flags[1] = false;
    }
    return flags;
  }

  Leaf attempt(Interval iv, std::uint64_t path) const {
    const int lo_deg = has_poly_ ? std::min(config_.min_poly_degree, config_.max_poly_degree) : 0;
    const int hi_deg = has_poly_ ? config_.max_poly_degree : 0;
    const auto flags = flags_for(iv);
    auto evaluator = [this](double x) { return eval(x); };

    std::optional<Leaf> best;
    double best_ratio = std::numeric_limits<double>::infinity();
    std::vector<double> vpts, vvals;
    for (int degree = lo_deg; degree <= hi_deg; ++degree) {
      Design design(cands_, iv, degree);
      auto s = solve(evaluator, design, iv, config_.fit_oversample, true);
      if (vpts.empty()) {
        vpts = validation_points(iv, path, s.nodes);
        vvals.resize(vpts.size());
        for (std::size_t i = 0; i < vpts.size(); ++i) vvals[i] = eval(vpts[i]);
      }
      double scale = 0.0;
      for (double v : s.values) scale = std::max(scale, std::fabs(v));
      for (double v : vvals) scale = std::max(scale, std::fabs(v));
      const double tol = config_.atol + config_.rtol * scale;
      trim_poly(s.terms, iv, scale);
      double err = 0.0;
      for (std::size_t i = 0; i < vpts.size(); ++i)
        err = std::max(err, std::fabs(rule_value(s.terms, vpts[i]) - vvals[i]));

      const bool ok = err <= tol;
      const double ratio = tol > 0 ? err / tol : (err == 0 ? 0.0 : std::numeric_limits<double>::infinity());
      if (ok || ratio < best_ratio || !best) {
        PieceSummary sum{iv, -1, {}, err, tol};
        for (const auto& t : s.terms) {
          sum.terms.emplace_back(t.name());
          if (t.name() == "POLY") sum.poly_degree = static_cast<int>(t.params.size()) - 1;
        }
        best = Leaf{Piece(iv, flags, std::move(s.terms)), std::move(sum), ok};
        best_ratio = ratio;
      }
      if (ok) break;
    }
    return std::move(*best);
  }

  // Drop trailing POLY coefficients that are zero to rounding.
  static void trim_poly(std::vector<Term>& terms, Interval iv, double scale) {
    const double reach = std::max(std::fabs(iv.lo), std::fabs(iv.hi));
    for (auto& t : terms) {
      if (t.name() != "POLY") continue;
      while (t.params.size() > 1 &&
             std::fabs(t.params.back()) * std::pow(reach, double(t.params.size() - 1)) <= 64 * kEps * scale)
        t.params.pop_back();
    }
  }

  const Target& target_;
  Interval frame_;
  const FitConfig& config_;
  std::vector<Resolved> cands_;
  bool has_poly_ = false;
  double min_width_ = 0.0;
  mutable std::atomic<long> evaluations_{0};
};

}  // namespace

FitResult piecewisefit(const Target& target, Interval interval, const FitConfig& config) {
  if (!std::isfinite(interval.lo) || !std::isfinite(interval.hi) || !(interval.lo < interval.hi))
    throw Error("fit interval must be finite with x1 < x2");
  if (!(config.rtol > 0)) throw Error("rtol must be positive");
  if (config.atol < 0) throw Error("atol must be nonnegative");
  if (config.max_poly_degree < 0) throw Error("max poly degree must be nonnegative");
  if (config.candidates.empty()) throw Error("at least one candidate formula is required");
  if (config.parity != Parity::none && interval.lo < 0)
    throw Error("even or odd fits are done on an interval with x1 >= 0");

  // Split at fixed anchors that fall strictly inside the interval.
  std::vector<double> cuts{interval.lo, interval.hi};
  for (const auto& c : config.candidates)
    if (c.anchor == Anchor::fixed && interval.contains_open(c.anchor_value)) cuts.push_back(c.anchor_value);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  Fitter fitter(target, interval, config);
  std::vector<Leaf> leaves;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    auto part = fitter.fit(Interval{cuts[s], cuts[s + 1]}, 0, (static_cast<std::uint64_t>(s) << 48) | 1u);
    leaves.insert(leaves.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }

  FitResult result;
  std::vector<Piece> pieces;
  const Leaf* worst = nullptr;
  for (const auto& leaf : leaves) {
    pieces.push_back(leaf.piece);
    result.report.pieces.push_back(leaf.summary);
    result.report.max_observed_error = std::max(result.report.max_observed_error, leaf.summary.max_error);
    if (!leaf.converged && (!worst || leaf.summary.max_error > worst->summary.max_error)) worst = &leaf;
  }
  result.function = PiecewiseFunction(config.parity, std::move(pieces));
  result.report.pieces_produced = static_cast<int>(leaves.size());
  result.report.evaluations = fitter.evaluations();
  if (worst) throw FitDidNotConverge(worst->summary.interval, worst->summary.max_error, std::move(result));
  return result;
}

LinearFit fit_interval(const Target& target, Interval interval, std::span<const Candidate> candidates, int degree,
                       int oversample) {
  std::vector<Resolved> cands;
  for (const auto& c : candidates) cands.push_back(resolve(c, interval));
  Design design(std::move(cands), interval, degree);
  auto eval = [&](double x) {
    const double y = target(x);
    if (!std::isfinite(y)) throw TargetNotFinite(x);
    return y;
  };
  auto s = solve(eval, design, interval, oversample, false);
  LinearFit out{std::move(s.terms), 0.0};
  for (std::size_t i = 0; i < s.nodes.size(); ++i)
    out.residual = std::max(out.residual, std::fabs(rule_value(out.terms, s.nodes[i]) - s.values[i]));
  return out;
}

}  // namespace piecekit
