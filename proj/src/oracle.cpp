#include "piecekit/oracle.hpp"

#include <cmath>

namespace piecekit {

namespace {

// Integrates kernel(x) F(x) for each term separately. A term anchored on an
// end of its piece is integrated in the offset u = x - x0, which resolves the
// singularity below the ulp of x0.
template <class K>
auto integrate_terms(const PiecewiseFunction& f, double rtol, const K& kernel) {
  using T = std::decay_t<decltype(kernel(0.0, 0.0))>;
  QuadResult<T> total;
  const auto g = unfold(f);
  for (const auto& piece : g.pieces()) {
    const Interval iv = piece.interval();
    for (const auto& t : piece.terms()) {
      const Formula& form = *t.formula;
      const auto a = form.anchor(t.params);
      QuadOptions opt;
      opt.rtol = rtol;
      double shift = 0.0;
      Interval range = iv;
      if (a && (*a == iv.lo || *a == iv.hi)) {
        shift = *a;
        range = *a == iv.lo ? Interval{0.0, iv.hi - shift} : Interval{iv.lo - shift, 0.0};
        opt.singular_left = *a == iv.lo;
        opt.singular_right = *a == iv.hi;
      } else {
        opt.singular_left = !piece.included()[0];
        opt.singular_right = !piece.included()[1];
      }
      auto h = [&](double u) -> T {
        const double v = a ? form.eval_offset(u - (*a - shift), t.params) : form.eval(u, t.params);
        return kernel(shift, u) * v;
      };
      // magnitude pass sets an absolute floor for near-cancelling integrals
      QuadOptions coarse = opt;
      coarse.rtol = 1e-4;
      auto mag = integrate([&](double u) { return std::abs(h(u)); }, range, coarse);
      opt.atol = 1e-15 * mag.value;
      auto r = integrate(h, range, opt);
      total.value += r.value;
      total.error += r.error;
      total.subdivisions += r.subdivisions;
    }
  }
  return total;
}

}  // namespace

QuadResult<double> quad_moment(const PiecewiseFunction& f, int n, double rtol) {
  if (f.empty()) throw EmptyFunction();
  return integrate_terms(f, rtol, [n](double shift, double u) { return std::pow(shift + u, n); });
}

QuadResult<std::complex<double>> quad_hilbert(const PiecewiseFunction& f, std::complex<double> z, double rtol) {
  if (f.empty()) throw EmptyFunction();
  return integrate_terms(f, rtol, [z](double shift, double u) { return 1.0 / ((z - shift) - u); });
}

}  // namespace piecekit
