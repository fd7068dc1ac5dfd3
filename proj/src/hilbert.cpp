#include "piecekit/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "piecekit/dilog.hpp"
#include "piecekit/errors.hpp"
#include "piecekit/format.hpp"

namespace piecekit {

namespace {

// ln(1 + w), accurate for small |w|.
cplx log1p_c(cplx w) {
  if (std::abs(w) < 0.5) {
    const double re = 0.5 * std::log1p(2.0 * w.real() + std::norm(w));
    const double im = std::atan2(w.imag(), 1.0 + w.real());
    return {re, im};
  }
  return std::log(1.0 + w);
}

cplx artanh(cplx w) { return 0.5 * (log1p_c(w) - log1p_c(-w)); }

// ---------------------------------------------------------------------------
// POLY: work in t = (x - m)/h on [-1, 1], where the integrand is q(t)/(zeta - t).

std::vector<double> recenter(std::span<const double> c, double m, double h) {
  std::vector<double> a(c.begin(), c.end());
  const std::size_t n = a.size() - 1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = n; k-- > i;) a[k] += m * a[k + 1];
  double hp = 1.0;
  for (auto& v : a) {
    v *= hp;
    hp *= h;
  }
  return a;
}

cplx poly_hilbert(const Interval& piece, double x, cplx z, std::span<const double> c) {
  const double m = piece.mid();
  const double h = 0.5 * piece.width();
  const auto d = recenter(c, m, h);
  const double t = (x - m) / h;
  const cplx zeta = (z - m) / h;

  if (std::abs(zeta) > 2.0) {
    // 1/(zeta - t) = sum_k t^k / zeta^(k+1), |t/zeta| <= 1/2
    const cplx inv = 1.0 / zeta;
    cplx sum = 0.0;
    cplx zp = inv;
    const double ratio = 1.0 / std::abs(zeta);
    double bound = ratio;
    for (int k = 0; k < 200; ++k) {
      double inner = 0.0;
      double tp = std::pow(t, k + 1);
      for (std::size_t j = 0; j < d.size(); ++j) {
        inner += d[j] * tp / double(k + j + 1);
        tp *= t;
      }
      sum += zp * inner;
      zp *= inv;
      bound *= ratio;
      if (bound < 1e-18) break;
    }
    return sum;
  }

  // x^j/(zeta - t) -> -zeta^j ln(zeta - t) - sum_{i<j} zeta^i t^(j-i)/(j-i)
  const cplx lg = std::log(zeta - t);
  std::vector<cplx> zp(d.size(), 1.0);
  for (std::size_t j = 1; j < d.size(); ++j) zp[j] = zp[j - 1] * zeta;
  cplx sum = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    cplx acc = -zp[j] * lg;
    double tp = 1.0;
    for (std::size_t e = 1; e <= j; ++e) {
      tp *= t;
      acc -= zp[j - e] * tp / double(e);
    }
    sum += d[j] * acc;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Anchored formulas, left anchor: u = x - x0 >= 0 on the piece, w2 = z - x0.

struct AnchorShape {
  double beta;  // F = A u^beta (ln u)^log
  bool log;
};

AnchorShape shape_of(const Formula& f, std::span<const double> p) {
  const auto name = f.name();
  if (name == "LOG") return {0.0, true};
  if (name == "XLOG") return {1.0, true};
  if (name == "ISRS") return {-0.5, false};
  if (name == "SQRT") return {0.5, false};
  return {p[1], false};  // PLS
}

double amplitude_of(const Formula& f, std::span<const double> p) { return f.name() == "PLS" ? p[2] : p[1]; }

bool half_integer(double b) {
  const double j = b + 0.5;
  return j >= 0 && j == std::floor(j) && j < 64;
}

// int_0^u v^k v^beta (ln v)^log dv
double power_moment(double u, int k, const AnchorShape& s) {
  if (u == 0) return 0.0;
  const double e = k + s.beta + 1.0;
  double g = std::pow(u, e) / e;
  if (s.log) g *= std::log(u) - 1.0 / e;
  return g;
}

cplx anchored_left(const Formula& f, double reach, double x, cplx z, std::span<const double> p) {
  const double x0 = p[0];
  const double amp = amplitude_of(f, p);
  const auto s = shape_of(f, p);
  const double u = std::max(x - x0, 0.0);
  const cplx w2 = z - x0;

  // far from the anchor the closed forms cancel, growing like |w2|^j in the
  // PLS recurrence
  if (std::abs(w2) >= 2.0 * reach) {
    // 1/(w2 - u) = sum_k u^k / w2^(k+1), |u/w2| <= 1/2
    const cplx inv = 1.0 / w2;
    cplx sum = 0.0, wp = inv;
    const double ratio = reach / std::abs(w2);
    double bound = 1.0;
    for (int k = 0; k < 200; ++k) {
      sum += wp * power_moment(u, k, s);
      wp *= inv;
      bound *= ratio;
      if (bound < 1e-18) break;
    }
    return amp * sum;
  }

  const auto name = f.name();
  if (name == "LOG" || name == "XLOG") {
    cplx log_part = 0.0;
    if (u > 0) {
      const cplx r = u / w2;
      log_part = -(std::log(u) * log1p_c(-r) + dilog(r));
    }
    if (name == "LOG") return amp * log_part;
    const double lin = u > 0 ? u * std::log(u) - u : 0.0;
    return amp * (w2 * log_part - lin);
  }

  const double t = std::sqrt(u);
  const cplx w = std::sqrt(w2);
  const cplx isrs = 2.0 / w * artanh(t / w);  // int u^(-1/2)/(w2 - u)
  if (name == "ISRS") return amp * isrs;
  if (name == "SQRT") return amp * (-2.0 * t + w2 * isrs);

  // PLS, b = j - 1/2: I_b = w2 I_(b-1) - u^b / b
  const double b = p[1];
  cplx acc = isrs;
  for (double e = 0.5; e <= b; e += 1.0) acc = w2 * acc - std::pow(u, e) / e;
  return amp * acc;
}

// ---------------------------------------------------------------------------
// TAIL: (a + b x)/((x - r+)(x - r-)) by partial fractions.

cplx tail_hilbert(double x, cplx z, std::span<const double> c) {
  const double p = c[0], q = c[1], a = c[2], b = c[3];
  const double disc = q * q - 4.0 * p;
  const cplx lz = std::log(z - x);
  if (disc == 0) {
    const double r = -0.5 * q;
    const cplx lr = std::log(cplx(x - r, 0.0));
    const cplx zr = z - r;
    return b * (lr - lz) / zr + (a + b * r) * (-1.0 / (zr * (x - r)) + (lr - lz) / (zr * zr));
  }
  cplx rp, rm;
  if (disc < 0) {
    const double s = 0.5 * std::sqrt(-disc);
    rp = {-0.5 * q, s};
    rm = {-0.5 * q, -s};
  } else {
    const double sq = std::sqrt(disc);
    const double t = -0.5 * (q + std::copysign(sq, q));
    rp = t;
    rm = p / t;
  }
  cplx sum = 0.0;
  for (auto [r, other] : {std::pair{rp, rm}, std::pair{rm, rp}}) {
    const cplx coef = (a + b * r) / (r - other);
    const cplx lr = (r.imag() == 0) ? std::log(cplx(x - r.real(), 0.0)) : std::log(x - r);
    sum += coef / (z - r) * (lr - lz);
  }
  return sum;
}

}  // namespace

cplx hilbert_primitive(const Formula& formula, const Interval& piece, double x, cplx z,
                       std::span<const double> params) {
  check_arity(formula, params);
  const auto name = formula.name();
  if (name == "POLY") return poly_hilbert(piece, x, z, params);
  if (name == "TAIL") return tail_hilbert(x, z, params);
  if (name == "LOG" || name == "XLOG" || name == "ISRS" || name == "SQRT" || name == "PLS") {
    if (name == "PLS" && !half_integer(params[1]))
      throw UnsupportedKernel("Hilbert primitive of PLS requires a half-integer exponent, got " +
                              format_real(params[1]));
    const double x0 = params[0];
    if (x0 <= piece.lo) return anchored_left(formula, piece.hi - x0, x, z, params);
    // anchor on the right: mirror x -> -x
    const auto q = formula.reflect(params);
    return anchored_left(formula, -piece.lo - (-x0), -x, -z, q);
  }
  throw MissingPrimitive(std::string(name), std::string(kHilbertKernel));
}

cplx moment_kernel_primitive(const Formula& formula, const Interval&, double x, cplx X,
                             std::span<const double> params) {
  const double n = X.real();
  if (!(n >= 0) || n != std::floor(n)) throw Error("moment kernel needs a nonnegative integer order");
  return formula.moment_primitive(params, static_cast<int>(n), x);
}

// ---------------------------------------------------------------------------

void KernelRegistry::add_builtins(KernelRegistry& reg) {
  for (const auto& name : {"POLY", "LOG", "XLOG", "ISRS", "SQRT", "PLS", "TAIL"}) {
    const Formula* f = &find_formula(name);
    reg.register_primitive(std::string(kHilbertKernel), name,
                           [f](const Interval& piece, double x, cplx z, std::span<const double> p) {
                             return hilbert_primitive(*f, piece, x, z, p);
                           });
    reg.register_primitive(std::string(kMomentKernel), name,
                           [f](const Interval& piece, double x, cplx X, std::span<const double> p) {
                             return moment_kernel_primitive(*f, piece, x, X, p);
                           });
  }
}

void KernelRegistry::register_primitive(std::string kernel, std::string formula, KernelPrimitive primitive) {
  std::unique_lock lock(mutex_);
  if (frozen()) throw RegistryFrozen();
  table_[{std::move(kernel), std::move(formula)}] = std::move(primitive);
}

const KernelPrimitive& KernelRegistry::find(std::string_view kernel, std::string_view formula) const {
  std::shared_lock lock(mutex_);
  auto it = table_.find({std::string(kernel), std::string(formula)});
  if (it == table_.end()) throw MissingPrimitive(std::string(formula), std::string(kernel));
  return it->second;
}

bool KernelRegistry::contains(std::string_view kernel, std::string_view formula) const {
  std::shared_lock lock(mutex_);
  return table_.count({std::string(kernel), std::string(formula)}) > 0;
}

KernelRegistry& default_registry() {
  static KernelRegistry* reg = [] {
    auto* r = new KernelRegistry;
    KernelRegistry::add_builtins(*r);
    return r;
  }();
  return *reg;
}

void register_kernel(std::string kernel, std::string formula, KernelPrimitive primitive) {
  default_registry().register_primitive(std::move(kernel), std::move(formula), std::move(primitive));
}

cplx transform(const PiecewiseFunction& f, std::string_view kernel, cplx X, const KernelRegistry& registry) {
  const auto g = unfold(f);
  cplx sum = 0.0;
  for (const auto& piece : g.pieces()) {
    const auto& iv = piece.interval();
    for (const auto& t : piece.terms()) {
      const auto& prim = registry.find(kernel, t.name());
      sum += prim(iv, iv.hi, X, t.params) - prim(iv, iv.lo, X, t.params);
    }
  }
  return sum;
}

cplx transform(const PiecewiseFunction& f, std::string_view kernel, cplx X) {
  auto& reg = default_registry();
  reg.freeze();
  return transform(f, kernel, X, reg);
}

std::vector<double> moments(const PiecewiseFunction& f, int n_max) {
  if (f.empty()) throw EmptyFunction();
  if (n_max < 0) throw Error("moment order must be nonnegative");
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (int n = 0; n <= n_max; ++n) {
    if ((f.parity() == Parity::even && n % 2 == 1) || (f.parity() == Parity::odd && n % 2 == 0)) continue;
    double sum = 0.0;
    for (const auto& piece : f.pieces()) {
      const auto& iv = piece.interval();
      for (const auto& t : piece.terms())
        sum += t.formula->moment_primitive(t.params, n, iv.hi) - t.formula->moment_primitive(t.params, n, iv.lo);
    }
    out[n] = f.parity() == Parity::none ? sum : 2.0 * sum;
  }
  return out;
}

namespace {

void check_real_axis_point(const PiecewiseFunction& g, double y) {
  double left = 0.0, right = 0.0;
  bool at_break = false;
  for (const auto& piece : g.pieces()) {
    const auto& iv = piece.interval();
    for (const auto& t : piece.terms()) {
      auto a = t.formula->anchor(t.params);
      if (a && *a == y && t.formula->singular_at_anchor(t.params) && iv.contains(y))
        throw SingularPoint("Hilbert transform is singular at y = " + format_real(y) + " (" +
                                std::string(t.name()) + " anchor)",
                            y);
    }
    if (iv.lo == y) {
      if (!piece.included()[0])
        throw SingularPoint("y = " + format_real(y) + " is an excluded endpoint", y);
      right = piece(y);
      at_break = true;
    }
    if (iv.hi == y) {
      if (!piece.included()[1])
        throw SingularPoint("y = " + format_real(y) + " is an excluded endpoint", y);
      left = piece(y);
      at_break = true;
    }
  }
  if (at_break && std::fabs(left - right) > 1e-12 * std::max(std::fabs(left), std::fabs(right)))
    throw SingularPoint("f jumps at y = " + format_real(y) + "; the principal value diverges", y);
}

}  // namespace

cplx hilbert(const PiecewiseFunction& f, cplx z) {
  if (z.imag() != 0) return transform(f, kHilbertKernel, z);

  const double y = z.real();
  const auto g = unfold(f);
  check_real_axis_point(g, y);
  double scale = std::max(1.0, std::fabs(y));
  for (const auto& p : g.pieces())
    scale = std::max({scale, std::fabs(p.interval().lo), std::fabs(p.interval().hi)});
  // y + i0: any positive offset far below double resolution selects the
  // upper-side branches while leaving the real part untouched.
  const cplx above(y, 1e-150 * scale);
  const double pv = transform(g, kHilbertKernel, above).real();
  return {pv, -std::numbers::pi * f.evaluate(y)};
}

}  // namespace piecekit
