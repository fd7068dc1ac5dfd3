#include "piecekit/catalog.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "piecekit/errors.hpp"

namespace piecekit {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// ---------------------------------------------------------------------------

class Poly final : public Formula {
public:
  std::string_view name() const override { return "POLY"; }
  std::size_t arity() const override { return 1; }
  bool variadic() const override { return true; }

  double eval(double x, std::span<const double> c) const override {
    double r = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) r = r * x + c[k];
    return r;
  }

  std::vector<std::size_t> linear_params(std::size_t count) const override {
    std::vector<std::size_t> idx(count);
    for (std::size_t i = 0; i < count; ++i) idx[i] = i;
    return idx;
  }

  std::vector<double> reflect(std::span<const double> c) const override {
    std::vector<double> r(c.begin(), c.end());
    for (std::size_t k = 1; k < r.size(); k += 2) r[k] = -r[k];
    return r;
  }

  std::optional<std::string> violation(Interval, std::span<const double> c) const override {
    for (double v : c)
      if (!std::isfinite(v)) return "POLY coefficients must be finite";
    return std::nullopt;
  }

  double moment_primitive(std::span<const double> c, int n, double x) const override {
    double r = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) {
      const int m = n + static_cast<int>(k) + 1;
      r = r * x + c[k] / m;
    }
    return r * ipow(x, n + 1);
  }
};

// ---------------------------------------------------------------------------

// F(x) = A * s^odd * v^beta * (ln v)^log, with u = x - x0, v = |u|, s = sign(u).
class Anchored : public Formula {
public:
  std::optional<double> anchor(std::span<const double> p) const override { return p[0]; }

  std::vector<std::size_t> linear_params(std::size_t) const override { return {amplitude_index()}; }

  std::vector<double> reflect(std::span<const double> p) const override {
    std::vector<double> r(p.begin(), p.end());
    r[0] = -r[0];
    if (odd()) r[amplitude_index()] = -r[amplitude_index()];
    return r;
  }

  std::optional<std::string> violation(Interval piece, std::span<const double> p) const override {
    for (double v : p)
      if (!std::isfinite(v)) return std::string(name()) + " parameters must be finite";
    if (piece.contains_open(p[0]))
      return std::string(name()) + " anchor " + fmt(p[0]) + " lies inside (" + fmt(piece.lo) + ", " +
             fmt(piece.hi) + ")";
    return extra_violation(p);
  }

  // Normalized to vanish at x = 0. For |x| <= |x0|/2 the expansion in x/x0
  // is summed directly; the binomial form about x0 cancels badly there.
  double moment_primitive(std::span<const double> p, int n, double x) const override {
    const double x0 = p[0];
    if (x0 == 0) return closed_primitive(p, n, x);
    if (std::fabs(x) <= 0.5 * std::fabs(x0)) return series_primitive(p, n, x);
    return closed_primitive(p, n, x) - closed_primitive(p, n, 0.0);
  }

  bool singular_at_anchor(std::span<const double> p) const override { return beta(p) < 0 || (has_log() && !odd()); }

  double eval_offset(double u, std::span<const double> p) const override {
    const double v = std::fabs(u);
    if (odd() && v == 0) return 0.0;
    const double b = beta(p);
    double r = p[amplitude_index()];
    if (b == 0.5) r *= std::sqrt(v);
    else if (b == -0.5) r /= std::sqrt(v);
    else if (b == 1.0) r *= v;
    else if (b != 0.0) r *= std::pow(v, b);
    if (has_log()) r *= std::log(v);
    return odd() && u < 0 ? -r : r;
  }

  virtual double beta(std::span<const double> p) const = 0;
  virtual bool has_log() const { return false; }
  virtual bool odd() const { return false; }
  virtual std::size_t amplitude_index() const { return 1; }

protected:
  virtual std::optional<std::string> extra_violation(std::span<const double>) const { return std::nullopt; }

private:
  // With w = x/x0: F = A s^odd |x0|^beta (1 - w)^beta (ln|x0| + ln(1 - w))^log,
  // s = -sign(x0), and the primitive is A s^odd |x0|^beta x^(n+1) sum c_m w^m / (n + m + 1).
  double series_primitive(std::span<const double> p, int n, double x) const {
    const double x0 = p[0];
    const double b = beta(p);
    const double w = x / x0;
    const double lnx0 = std::log(std::fabs(x0));
    constexpr int kTerms = 90;
    std::array<double, kTerms> a{};
    a[0] = 1.0;
    for (int m = 1; m < kTerms; ++m) a[m] = a[m - 1] * (m - 1 - b) / m;
    double sum = 0.0, wm = 1.0;
    for (int m = 0; m < kTerms; ++m) {
      double c = a[m];
      if (has_log()) {
        c *= lnx0;
        for (int j = 1; j <= m; ++j) c -= a[m - j] / j;
      }
      const double term = c * wm / (n + m + 1);
      sum += term;
      if (m > 4 && std::fabs(term) <= 1e-18 * std::fabs(sum)) break;
      wm *= w;
    }
    const double s = x0 > 0 ? -1.0 : 1.0;
    const double k = p[amplitude_index()] * (odd() ? s : 1.0) * std::pow(std::fabs(x0), b);
    return k * ipow(x, n + 1) * sum;
  }

  double closed_primitive(std::span<const double> p, int n, double x) const {
    const double x0 = p[0];
    const double amp = p[amplitude_index()];
    const double b = beta(p);
    const double u = x - x0;
    const double v = std::fabs(u);
    const double s = u < 0 ? -1.0 : 1.0;
    // x^n = sum_k C(n,k) x0^(n-k) u^k, and  u^k F du = A s^(k+odd+1) v^k g(v) dv.
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double e = k + b + 1.0;
      double g = 0.0;
      if (v > 0) {
        g = std::pow(v, e) / e;
        if (has_log()) g *= std::log(v) - 1.0 / e;
      }
      const int parity = k + (odd() ? 1 : 0) + 1;
      const double sign = (parity % 2 == 0) ? 1.0 : s;
      sum += binomial(n, k) * ipow(x0, n - k) * sign * g;
    }
    return amp * sum;
  }
};

class Log final : public Anchored {
public:
  std::string_view name() const override { return "LOG"; }
  std::size_t arity() const override { return 2; }
  double eval(double x, std::span<const double> p) const override { return p[1] * std::log(std::fabs(x - p[0])); }
  double beta(std::span<const double>) const override { return 0.0; }
  bool has_log() const override { return true; }
};

class XLog final : public Anchored {
public:
  std::string_view name() const override { return "XLOG"; }
  std::size_t arity() const override { return 2; }
  double eval(double x, std::span<const double> p) const override {
    const double u = x - p[0];
    if (u == 0) return 0.0;
    return p[1] * u * std::log(std::fabs(u));
  }
  double beta(std::span<const double>) const override { return 1.0; }
  bool has_log() const override { return true; }
  bool odd() const override { return true; }
};

class Isrs final : public Anchored {
public:
  std::string_view name() const override { return "ISRS"; }
  std::size_t arity() const override { return 2; }
  double eval(double x, std::span<const double> p) const override { return p[1] / std::sqrt(std::fabs(x - p[0])); }
  double beta(std::span<const double>) const override { return -0.5; }
};

class Sqrt final : public Anchored {
public:
  std::string_view name() const override { return "SQRT"; }
  std::size_t arity() const override { return 2; }
  double eval(double x, std::span<const double> p) const override { return p[1] * std::sqrt(std::fabs(x - p[0])); }
  double beta(std::span<const double>) const override { return 0.5; }
};

// PLS(x; x0, b, A) = A |x - x0|^b
class Pls final : public Anchored {
public:
  std::string_view name() const override { return "PLS"; }
  std::size_t arity() const override { return 3; }
  double eval(double x, std::span<const double> p) const override {
    return p[2] * std::pow(std::fabs(x - p[0]), p[1]);
  }
  double beta(std::span<const double> p) const override { return p[1]; }
  std::size_t amplitude_index() const override { return 2; }

protected:
  std::optional<std::string> extra_violation(std::span<const double> p) const override {
    if (!(p[1] > -1.0)) return "PLS exponent " + fmt(p[1]) + " must exceed -1";
    if (p[1] == 0.0) return "PLS exponent must be nonzero";
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------

// TAIL(x; p, q, a, b) = (a + b x) / (p + q x + x^2)
class Tail final : public Formula {
public:
  std::string_view name() const override { return "TAIL"; }
  std::size_t arity() const override { return 4; }

  double eval(double x, std::span<const double> c) const override {
    return (c[2] + c[3] * x) / (c[0] + c[1] * x + x * x);
  }

  std::vector<std::size_t> linear_params(std::size_t) const override { return {2, 3}; }

  std::vector<double> reflect(std::span<const double> c) const override { return {c[0], -c[1], c[2], -c[3]}; }

  std::optional<std::string> violation(Interval piece, std::span<const double> c) const override {
    for (double v : c)
      if (!std::isfinite(v)) return "TAIL parameters must be finite";
    const double p = c[0], q = c[1];
    const double disc = q * q - 4.0 * p;
    if (disc < 0) return std::nullopt;
    const double sq = std::sqrt(disc);
    // stable quadratic roots
    const double t = -0.5 * (q + std::copysign(sq, q));
    double r1, r2;
    if (t == 0) {
      r1 = r2 = 0.0;
    } else {
      r1 = t;
      r2 = p / t;
    }
    for (double r : {r1, r2})
      if (piece.contains(r))
        return "TAIL denominator vanishes at " + fmt(r) + " within [" + fmt(piece.lo) + ", " + fmt(piece.hi) + "]";
    return std::nullopt;
  }

  double moment_primitive(std::span<const double> c, int n, double x) const override {
    // Normalized to vanish at x = 0 when D(0) != 0. Near the origin the closed
    // form cancels badly if the roots are far away, so the power series of
    // the integrand is summed there instead.
    const double rho = smallest_root_modulus(c[0], c[1]);
    if (rho > 0 && std::fabs(x) <= 0.5 * rho) return series_primitive(c, n, x);
    if (rho > 0) return closed_primitive(c, n, x) - closed_primitive(c, n, 0.0);
    return closed_primitive(c, n, x);
  }

private:
  static double smallest_root_modulus(double p, double q) {
    const double disc = q * q - 4.0 * p;
    if (disc < 0) return std::sqrt(p);
    const double t = -0.5 * (q + std::copysign(std::sqrt(disc), q));
    if (t == 0) return 0.0;
    return std::min(std::fabs(t), std::fabs(p / t));
  }

  static double series_primitive(std::span<const double> c, int n, double x) {
    const double p = c[0], q = c[1], a = c[2], b = c[3];
    // 1/D(x) = sum d_j x^j with p d_j + q d_{j-1} + d_{j-2} = [j == 0]
    double d2 = 0.0, d1 = 0.0;
    double pw = std::pow(x, n + 1);
    double sum = 0.0;
    for (int j = 0; j < 400; ++j) {
      const double d = ((j == 0 ? 1.0 : 0.0) - q * d1 - d2) / p;
      const double term = (a * d + b * d1) * pw / static_cast<double>(n + j + 1);
      sum += term;
      if (j > 4 && std::fabs(term) <= 1e-18 * std::fabs(sum)) break;
      d2 = d1;
      d1 = d;
      pw *= x;
    }
    return sum;
  }

  static double closed_primitive(std::span<const double> c, int n, double x) {
    const double p = c[0], q = c[1], a = c[2], b = c[3];
    // numerator x^n (a + b x), coefficients by ascending power
    std::vector<double> num(static_cast<std::size_t>(n) + 2, 0.0);
    num[n] = a;
    num[n + 1] = b;
    // divide by x^2 + q x + p
    std::vector<double> quot(n > 0 ? static_cast<std::size_t>(n) : 0, 0.0);
    for (int k = n + 1; k >= 2; --k) {
      const double lead = num[k];
      quot[k - 2] = lead;
      num[k] = 0.0;
      num[k - 1] -= q * lead;
      num[k - 2] -= p * lead;
    }
    const double r0 = num[0], r1 = num[1];

    double poly = 0.0;
    for (std::size_t k = quot.size(); k-- > 0;) poly = poly * x + quot[k] / static_cast<double>(k + 1);
    poly *= x;

    const double denom = p + q * x + x * x;
    const double disc = q * q - 4.0 * p;
    double j;
    if (disc < 0) {
      const double s = std::sqrt(-disc);
      j = 2.0 / s * std::atan((2.0 * x + q) / s);
    } else if (disc > 0) {
      const double s = std::sqrt(disc);
      const double lo = 0.5 * (-q - s), hi = 0.5 * (-q + s);
      j = std::log(std::fabs((x - hi) / (x - lo))) / (hi - lo);
    } else {
      j = -2.0 / (2.0 * x + q);
    }
    return poly + 0.5 * r1 * std::log(std::fabs(denom)) + (r0 - 0.5 * r1 * q) * j;
  }
};

// ---------------------------------------------------------------------------

struct Table {
  std::mutex mutex;
  std::vector<std::shared_ptr<const Formula>> entries;
  std::map<std::string, const Formula*, std::less<>> by_name;

  Table() {
    for (auto f : std::initializer_list<std::shared_ptr<const Formula>>{
             std::make_shared<Poly>(), std::make_shared<Log>(), std::make_shared<XLog>(), std::make_shared<Isrs>(),
             std::make_shared<Sqrt>(), std::make_shared<Pls>(), std::make_shared<Tail>()})
      add(std::move(f));
  }

  void add(std::shared_ptr<const Formula> f) {
    const std::string key(f->name());
    if (by_name.count(key)) throw Error("formula '" + key + "' is already registered");
    by_name.emplace(key, f.get());
    entries.push_back(std::move(f));
  }
};

Table& table() {
  static Table t;
  return t;
}

}  // namespace

const Formula& find_formula(std::string_view name) {
  auto& t = table();
  std::lock_guard lock(t.mutex);
  auto it = t.by_name.find(name);
  if (it == t.by_name.end()) throw UnknownFormula(std::string(name));
  return *it->second;
}

void register_formula(std::shared_ptr<const Formula> formula) {
  auto& t = table();
  std::lock_guard lock(t.mutex);
  t.add(std::move(formula));
}

std::vector<std::string> formula_names() {
  auto& t = table();
  std::lock_guard lock(t.mutex);
  std::vector<std::string> names;
  for (const auto& f : t.entries) names.emplace_back(f->name());
  return names;
}

namespace formulas {
const Formula& poly() { return find_formula("POLY"); }
const Formula& log() { return find_formula("LOG"); }
const Formula& xlog() { return find_formula("XLOG"); }
const Formula& isrs() { return find_formula("ISRS"); }
const Formula& sqrt() { return find_formula("SQRT"); }
const Formula& pls() { return find_formula("PLS"); }
const Formula& tail() { return find_formula("TAIL"); }
}  // namespace formulas

void check_arity(const Formula& f, std::span<const double> p) {
  const bool ok = f.variadic() ? p.size() >= f.arity() : p.size() == f.arity();
  if (!ok)
    throw ArityMismatch(std::string(f.name()) + " expects " + (f.variadic() ? "at least " : "") +
                        std::to_string(f.arity()) + " parameters, got " + std::to_string(p.size()));
}

double formula_eval(std::string_view name, std::span<const double> params, double x) {
  const auto& f = find_formula(name);
  check_arity(f, params);
  return f.eval(x, params);
}

std::optional<std::string> check_constraint(std::string_view name, std::span<const double> params, Interval piece) {
  const auto& f = find_formula(name);
  check_arity(f, params);
  return f.violation(piece, params);
}

double moment_primitive(std::string_view name, std::span<const double> params, int n, double x) {
  const auto& f = find_formula(name);
  check_arity(f, params);
  if (n < 0) throw Error("moment order must be nonnegative");
  return f.moment_primitive(params, n, x);
}

std::vector<double> reflect_params(std::string_view name, std::span<const double> params) {
  const auto& f = find_formula(name);
  check_arity(f, params);
  return f.reflect(params);
}

std::vector<double> scale_params(const Formula& f, std::span<const double> params, double c) {
  std::vector<double> r(params.begin(), params.end());
  for (std::size_t i : f.linear_params(r.size())) r[i] *= c;
  return r;
}

}  // namespace piecekit
