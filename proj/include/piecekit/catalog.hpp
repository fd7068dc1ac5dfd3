#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace piecekit {

/// Closed interval [lo, hi] with lo < hi.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains_open(double x) const { return lo < x && x < hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// A named parametric elementary function F(x; p).
///
/// Implementations must be stateless; the catalog hands out shared const
/// references that are read concurrently.
class Formula {
public:
  virtual ~Formula() = default;

  virtual std::string_view name() const = 0;
  /// Exact parameter count, or the minimum count for variadic formulas.
  virtual std::size_t arity() const = 0;
  virtual bool variadic() const { return false; }

  virtual double eval(double x, std::span<const double> p) const = 0;

  /// Indices of parameters that scale linearly with the amplitude.
  virtual std::vector<std::size_t> linear_params(std::size_t count) const = 0;

  /// Parameters q with F(-x; q) = F(x; p).
  virtual std::vector<double> reflect(std::span<const double> p) const = 0;

  /// Empty when (interval, p) is admissible, otherwise a description of the violation.
  virtual std::optional<std::string> violation(Interval piece, std::span<const double> p) const = 0;

  /// M(x) with dM/dx = x^n F(x; p), continuous on any admissible piece containing x.
  virtual double moment_primitive(std::span<const double> p, int n, double x) const = 0;

  /// Singularity anchor, for formulas built on |x - x0|.
  virtual std::optional<double> anchor(std::span<const double>) const { return std::nullopt; }

  /// F(x0 + u; p) for anchored formulas, computed from the offset u so that
  /// points closer to the anchor than its ulp stay distinct.
  virtual double eval_offset(double u, std::span<const double> p) const {
    return eval(anchor(p).value_or(0.0) + u, p);
  }

  /// True when F is unbounded at its anchor.
  virtual bool singular_at_anchor(std::span<const double>) const { return false; }
};

/// Look up a formula by its uppercase name. Throws UnknownFormula.
const Formula& find_formula(std::string_view name);

/// Add a user formula to the global table. Names must be unique.
void register_formula(std::shared_ptr<const Formula> formula);

/// Names of all registered formulas, built-ins first.
std::vector<std::string> formula_names();

namespace formulas {
const Formula& poly();
const Formula& log();
const Formula& xlog();
const Formula& isrs();
const Formula& sqrt();
const Formula& pls();
const Formula& tail();
}  // namespace formulas

/// Throws ArityMismatch if p does not fit the formula's arity.
void check_arity(const Formula& f, std::span<const double> p);

double formula_eval(std::string_view name, std::span<const double> params, double x);
std::optional<std::string> check_constraint(std::string_view name, std::span<const double> params,
                                            Interval piece);
double moment_primitive(std::string_view name, std::span<const double> params, int n, double x);
std::vector<double> reflect_params(std::string_view name, std::span<const double> params);
std::vector<double> scale_params(const Formula& f, std::span<const double> params, double c);

}  // namespace piecekit
