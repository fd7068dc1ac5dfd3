#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "piecekit/catalog.hpp"

namespace piecekit {

/// Tabulated (x, y) data evaluated by monotone piecewise-cubic Hermite
/// interpolation (Fritsch-Carlson slopes). x must be strictly increasing.
class SampledTarget {
public:
  SampledTarget(std::vector<double> x, std::vector<double> y);

  /// Reads "x,y" rows; blank lines, '#' comments and a non-numeric header are skipped.
  static SampledTarget from_csv(std::istream& in);

  double operator()(double x) const;
  Interval range() const { return {x_.front(), x_.back()}; }
  std::size_t size() const { return x_.size(); }

private:
  std::vector<double> x_, y_, slope_;
};

}  // namespace piecekit
