#include "piecekit/sampled.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>

#include "piecekit/errors.hpp"
#include "piecekit/format.hpp"

namespace piecekit {

namespace {

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// end slope from the one-sided three-point formula, kept shape preserving
double edge_slope(double h0, double h1, double d0, double d1) {
  double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
  if (d * d0 <= 0) return 0.0;
  if (d0 * d1 <= 0 && std::fabs(d) > std::fabs(3.0 * d0)) return 3.0 * d0;
  return d;
}

}  // namespace

SampledTarget::SampledTarget(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != y_.size()) throw Error("sampled target needs as many x as y values");
  if (x_.size() < 2) throw Error("sampled target needs at least two samples");
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!std::isfinite(x_[i]) || !std::isfinite(y_[i])) throw Error("sampled target values must be finite");
    if (i > 0 && !(x_[i - 1] < x_[i])) throw Error("sampled x values must be strictly increasing");
  }
  const std::size_t n = x_.size();
  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    d[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  slope_.assign(n, 0.0);
  if (n == 2) {
    slope_[0] = slope_[1] = d[0];
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (d[k - 1] * d[k] <= 0) continue;
    const double w1 = 2.0 * h[k] + h[k - 1];
    const double w2 = h[k] + 2.0 * h[k - 1];
    slope_[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
  }
  slope_[0] = edge_slope(h[0], h[1], d[0], d[1]);
  slope_[n - 1] = edge_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
}

SampledTarget SampledTarget::from_csv(std::istream& in) {
  std::vector<double> xs, ys;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    const auto comma = line.find(',');
    double x = 0, y = 0;
    const bool ok = comma != std::string::npos && parse_double(std::string_view(line).substr(0, comma), x) &&
                    parse_double(std::string_view(line).substr(comma + 1), y);
    if (!ok) {
      if (xs.empty() && lineno == 1) continue;  // header
      throw ParseError("expected \"x,y\" on line " + std::to_string(lineno), 0);
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  return SampledTarget(std::move(xs), std::move(ys));
}

double SampledTarget::operator()(double x) const {
  if (!(x >= x_.front() && x <= x_.back()))
    throw Error("sampled target evaluated at " + format_real(x) + " outside its data range");
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = it == x_.end() ? x_.size() - 2 : static_cast<std::size_t>(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
}

}  // namespace piecekit
