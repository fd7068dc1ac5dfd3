#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "piecekit/core.hpp"
#include "piecekit/errors.hpp"

namespace piecekit {

/// Where a candidate's singularity anchor x0 goes. Left and right refer to
/// the ends of the whole fit interval, not of the current subinterval.
enum class Anchor { left, right, fixed };

/// A formula offered to the fitter. Only linear parameters are solved for;
/// the anchor and any shape parameters (PLS exponent, TAIL p and q) are fixed.
struct Candidate {
  std::string formula;
  Anchor anchor = Anchor::left;
  double anchor_value = 0.0;
  std::vector<double> shape;

  static Candidate poly() { return {"POLY", Anchor::left, 0.0, {}}; }
  static Candidate at(std::string name, Anchor a, std::vector<double> shape = {}) {
    return {std::move(name), a, 0.0, std::move(shape)};
  }
  static Candidate fixed(std::string name, double x0, std::vector<double> shape = {}) {
    return {std::move(name), Anchor::fixed, x0, std::move(shape)};
  }
};

struct FitConfig {
  double rtol = 1e-6;
  double atol = 0.0;
  std::vector<Candidate> candidates = {Candidate::poly()};
  Parity parity = Parity::none;
  int min_poly_degree = 3;
  int max_poly_degree = 12;
  int fit_oversample = 8;
  int validation_points = 64;
  /// Non-positive means 1e-6 times the interval width.
  double min_width = 0.0;
  int max_depth = 40;
  std::uint64_t rng_seed = 0;
  /// Fit the two halves of a bisection on separate threads. The target must
  /// then be safe to call concurrently. Output does not depend on this flag.
  bool parallel = false;
};

struct PieceSummary {
  Interval interval;
  int poly_degree = -1;  // -1 when the rule has no POLY term
  std::vector<std::string> terms;
  double max_error = 0.0;
  double tolerance = 0.0;
};

struct FitReport {
  int pieces_produced = 0;
  double max_observed_error = 0.0;
  long evaluations = 0;
  std::vector<PieceSummary> pieces;
};

struct FitResult {
  PiecewiseFunction function;
  FitReport report;
};

/// Raised when a subinterval cannot meet the tolerance within min-width and
/// max-depth. Carries the best-effort result.
class FitDidNotConverge : public Error {
public:
  FitDidNotConverge(Interval worst, double error, FitResult partial);
  const Interval& worst_interval() const { return worst_; }
  double worst_error() const { return error_; }
  const FitResult& partial() const { return partial_; }

private:
  Interval worst_;
  double error_;
  FitResult partial_;
};

using Target = std::function<double(double)>;

/// Adaptive piecewise fit of target on the interval. Endpoints are never sampled.
FitResult piecewisefit(const Target& target, Interval interval, const FitConfig& config = {});

struct LinearFit {
  std::vector<Term> terms;
  /// Max |fit - target| over the fit nodes.
  double residual = 0.0;
};

/// Single least-squares solve on Chebyshev nodes (count = columns + oversample).
/// Anchors are resolved against this interval. POLY contributes degrees 0..degree.
/// Throws RankDeficient naming the first dependent column.
LinearFit fit_interval(const Target& target, Interval interval, std::span<const Candidate> candidates, int degree,
                       int oversample = 8);

}  // namespace piecekit
