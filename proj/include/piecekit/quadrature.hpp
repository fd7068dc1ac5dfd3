#pragma once

// Adaptive Gauss-Kronrod integration. This is the slow reference path used to
// cross-check the closed-form transforms; nothing in the analytic code path
// depends on it.

#include <array>
#include <cmath>
#include <complex>
#include <queue>
#include <string>
#include <type_traits>
#include <vector>

#include "piecekit/catalog.hpp"
#include "piecekit/errors.hpp"

namespace piecekit {

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;
  int subdivisions = 0;
};

struct QuadOptions {
  double rtol = 1e-10;
  double atol = 0.0;
  /// Integrable singularity at the corresponding end: integrate after x = a + s^2.
  bool singular_left = false;
  bool singular_right = false;
  int max_subdivisions = 10000;
};

class NoConvergence : public Error {
public:
  NoConvergence(std::complex<double> best, double estimate)
      : Error("quadrature did not converge: best value " + std::to_string(best.real()) +
              (best.imag() != 0 ? " + " + std::to_string(best.imag()) + "i" : std::string()) + ", error estimate " +
              std::to_string(estimate)),
        best_(best),
        estimate_(estimate) {}
  std::complex<double> best() const { return best_; }
  double estimate() const { return estimate_; }

private:
  std::complex<double> best_;
  double estimate_;
};

namespace detail {

// Kronrod abscissae (descending) and weights; Gauss weights on the odd indices.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                              0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Panel {
  double a, b;
  T value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class T, class F>
Panel<T> gk15(const F& g, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const T fc = g(center);
  T kron = fc * kWgk[7];
  T gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const T f1 = g(center - dx);
    const T f2 = g(center + dx);
    kron += (f1 + f2) * kWgk[j];
    if (j % 2 == 1) gauss += (f1 + f2) * kWg[j / 2];
  }
  kron *= half;
  gauss *= half;
  return {a, b, kron, std::abs(kron - gauss)};
}

template <class T, class F>
QuadResult<T> adapt(const F& g, double a, double b, double rtol, double atol, int max_sub) {
  std::priority_queue<Panel<T>> heap;
  std::vector<Panel<T>> done;
  heap.push(gk15<T>(g, a, b));
  int subdivisions = 0;
  auto totals = [&](T& value, double& error) {
    value = T{};
    error = 0.0;
    auto copy = heap;
    while (!copy.empty()) {
      value += copy.top().value;
      error += copy.top().error;
      copy.pop();
    }
    for (const auto& p : done) {
      value += p.value;
      error += p.error;
    }
  };
  T value = heap.top().value;
  double error = heap.top().error;
  while (error > std::max(atol, rtol * std::abs(value))) {
    if (subdivisions >= max_sub) throw NoConvergence(std::complex<double>(value), error);
    Panel<T> worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(worst.a < mid && mid < worst.b)) {
      // panel cannot be split further in double precision
      done.push_back(worst);
      if (heap.empty()) break;
      continue;
    }
    auto left = gk15<T>(g, worst.a, mid);
    auto right = gk15<T>(g, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
    if (subdivisions % 64 == 0) totals(value, error);
  }
  totals(value, error);
  if (error > std::max(atol, rtol * std::abs(value)) && !done.empty())
    throw NoConvergence(std::complex<double>(value), error);
  return {value, error, subdivisions};
}

template <class T, class F>
QuadResult<T> one_sided(const F& g, double a, double b, bool singular_left, bool singular_right, double rtol,
                        double atol, int max_sub) {
  // Nodes so close to the singular end that x rounds onto it carry weight
  // O(s) of an integrable singularity; they are dropped rather than evaluated.
  if (singular_left) {
    auto h = [&](double s) -> T {
      const double x = a + s * s;
      return x == a ? T{} : g(x) * (2.0 * s);
    };
    return adapt<T>(h, 0.0, std::sqrt(b - a), rtol, atol, max_sub);
  }
  if (singular_right) {
    auto h = [&](double s) -> T {
      const double x = b - s * s;
      return x == b ? T{} : g(x) * (2.0 * s);
    };
    return adapt<T>(h, 0.0, std::sqrt(b - a), rtol, atol, max_sub);
  }
  return adapt<T>(g, a, b, rtol, atol, max_sub);
}

}  // namespace detail

/// Globally adaptive GK 7-15 integration of g over an interval. Nodes are
/// open, so g is never evaluated at either end.
template <class F>
auto integrate(const F& g, Interval iv, const QuadOptions& opt = {}) {
  using T = std::decay_t<decltype(g(0.0))>;
  if (opt.singular_left && opt.singular_right) {
    const double mid = iv.mid();
    auto l = detail::one_sided<T>(g, iv.lo, mid, true, false, opt.rtol, 0.5 * opt.atol, opt.max_subdivisions);
    auto r = detail::one_sided<T>(g, mid, iv.hi, false, true, opt.rtol, 0.5 * opt.atol, opt.max_subdivisions);
    return QuadResult<T>{l.value + r.value, l.error + r.error, l.subdivisions + r.subdivisions + 1};
  }
  return detail::one_sided<T>(g, iv.lo, iv.hi, opt.singular_left, opt.singular_right, opt.rtol, opt.atol,
                              opt.max_subdivisions);
}

}  // namespace piecekit
