#pragma once

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "piecekit/catalog.hpp"

namespace piecekit {

enum class Parity { none, even, odd };

std::string_view to_string(Parity p);
Parity parse_parity(std::string_view text);

/// One formula with its parameter vector.
struct Term {
  const Formula* formula = nullptr;
  std::vector<double> params;

  Term() = default;
  Term(const Formula& f, std::vector<double> p) : formula(&f), params(std::move(p)) {}
  Term(std::string_view name, std::vector<double> p);

  double operator()(double x) const { return formula->eval(x, params); }
  std::string_view name() const { return formula->name(); }

  friend bool operator==(const Term& a, const Term& b) {
    return a.formula == b.formula && a.params == b.params;
  }
};

/// An interval, its endpoint flags, and a rule made of summed terms.
///
/// A `false` flag marks an endpoint where the rule may be singular or
/// undefined. Construction validates every term against the interval and
/// throws ConstraintViolation or ArityMismatch.
class Piece {
public:
  Piece(Interval interval, std::array<bool, 2> included, std::vector<Term> terms);

  const Interval& interval() const { return interval_; }
  const std::array<bool, 2>& included() const { return included_; }
  const std::vector<Term>& terms() const { return terms_; }

  double operator()(double x) const {
    double r = 0.0;
    for (const auto& t : terms_) r += t(x);
    return r;
  }

  friend bool operator==(const Piece&, const Piece&) = default;

private:
  Interval interval_;
  std::array<bool, 2> included_;
  std::vector<Term> terms_;
};

/// Ordered, non-overlapping pieces with a parity tag; zero outside its support.
///
/// Even and odd functions keep pieces on x >= 0 only and are mirrored on
/// evaluation. Immutable once built.
class PiecewiseFunction {
public:
  PiecewiseFunction() = default;
  PiecewiseFunction(Parity parity, std::vector<Piece> pieces);

  Parity parity() const { return parity_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }

  double operator()(double x) const { return evaluate(x); }
  double evaluate(double x) const;

  /// Piece whose closed interval holds x (already folded to |x| for mirrored
  /// functions), preferring a piece that includes x as an endpoint, then the
  /// lower piece. Null outside the stored pieces.
  const Piece* locate(double x) const;

  friend bool operator==(const PiecewiseFunction&, const PiecewiseFunction&) = default;

private:
  Parity parity_ = Parity::none;
  std::vector<Piece> pieces_;
};

double evaluate(const PiecewiseFunction& f, double x);

/// Hull of the (mirrored) support. Throws EmptyFunction.
std::pair<double, double> support(const PiecewiseFunction& f);

/// Pointwise sum on the common refinement of both partitions. Throws MixedParity.
PiecewiseFunction add(const PiecewiseFunction& f, const PiecewiseFunction& g);
PiecewiseFunction operator+(const PiecewiseFunction& f, const PiecewiseFunction& g);

PiecewiseFunction scale(const PiecewiseFunction& f, double c);

/// Equivalent parity-none function with mirrored pieces materialized.
PiecewiseFunction unfold(const PiecewiseFunction& f);

/// Canonical JSON text.
std::string serialize(const PiecewiseFunction& f);

/// Throws ParseError on malformed input, ConstraintViolation on inadmissible pieces.
PiecewiseFunction deserialize(std::string_view text);

/// Constructor-style pretty print, for humans only.
std::string show(const PiecewiseFunction& f);

/// One-line summary such as "<Piecewise even function with 1 piece and support [-4.0, 4.0]>".
std::string summary(const PiecewiseFunction& f);

}  // namespace piecekit
