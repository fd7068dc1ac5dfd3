#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "gen.hpp"
#include "oracles.hpp"
#include "piecekit/errors.hpp"
#include "piecekit/hilbert.hpp"
#include "piecekit/oracle.hpp"

using namespace piecekit;

namespace {

constexpr double kPi = std::numbers::pi;

PiecewiseFunction box() { return PiecewiseFunction(Parity::none, {Piece({-1, 1}, {true, true}, {Term("POLY", {1.0})})}); }

PiecewiseFunction single(const gen::Sample& s) {
  return PiecewiseFunction(Parity::none, {Piece(s.piece, {!s.sing_lo, !s.sing_hi}, {s.term})});
}

cplx random_z(gen::Rng& rng, Interval iv) {
  double im = std::pow(10.0, rng.uniform(-2.0, 1.0)) * (rng.coin() ? 1.0 : -1.0);
  return {rng.uniform(iv.lo - 1.0, iv.hi + 1.0), im};
}

// Sum of |P| over every primitive evaluation that hilbert(f, z) adds up.
double primitive_scale(const PiecewiseFunction& f, cplx z) {
  double m = 0;
  PiecewiseFunction u = unfold(f);
  for (const auto& p : u.pieces())
    for (const auto& t : p.terms())
      for (double x : {p.interval().lo, p.interval().hi})
        m += std::abs(hilbert_primitive(*t.formula, p.interval(), x, z, t.params));
  return m;
}

}  // namespace

TEST_CASE("box function") {
  cplx z(0.0, 2.0);
  cplx h = hilbert(box(), z);
  CHECK(std::abs(h - std::log((z + 1.0) / (z - 1.0))) < 1e-12);
  CHECK(std::abs(h.real()) < 1e-15);
  CHECK(h.imag() == doctest::Approx(-0.927295218001612).epsilon(1e-12));
  auto q = quad_hilbert(box(), z);
  CHECK(std::abs(h - q.value) < 1e-12);
}

TEST_CASE("box function on the real axis") {
  cplx h = hilbert(box(), 0.0);
  CHECK(std::abs(h.real()) < 1e-15);
  CHECK(h.imag() == doctest::Approx(-kPi).epsilon(1e-15));
  // PV int_{-1}^{1} dx / (y - x) = ln((y + 1)/(1 - y)) inside, and the imaginary part vanishes outside
  for (double y : {-0.7, 0.3, 0.9}) {
    cplx v = hilbert(box(), y);
    CHECK(v.real() == doctest::Approx(std::log((y + 1) / (1 - y))).epsilon(1e-13));
    CHECK(v.imag() == doctest::Approx(-kPi).epsilon(1e-15));
  }
  cplx out = hilbert(box(), 3.0);
  CHECK(out.real() == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(out.imag() == 0.0);
}

TEST_CASE("far field approaches the zeroth moment") {
  gen::Rng rng(51);
  for (int c = 0; c < 20; ++c) {
    PiecewiseFunction f = gen::function(rng, gen::parity(rng), true);
    auto m = moments(f, 1);
    cplx z(0.0, 1e6);
    cplx zh = z * hilbert(f, z);
    // z H = M0 + M1/z + ...; the second term matters when M0 vanishes by parity
    CHECK(std::abs(zh - m[0]) < 1e-5 * std::max(1.0, std::abs(m[0])) + std::abs(m[1]) / std::abs(z) * 1.001);
    CHECK(std::abs(zh - m[0] - m[1] / z) < 1e-5 * std::max(1.0, std::abs(m[0])));
  }
}

TEST_CASE("Schwarz reflection and linearity") {
  gen::Rng rng(52);
  for (int c = 0; c < 50; ++c) {
    Parity par = gen::parity(rng);
    PiecewiseFunction f = gen::function(rng, par, true);
    PiecewiseFunction g = gen::function(rng, par, true);
    cplx z = random_z(rng, {-4, 4});
    cplx hf = hilbert(f, z);
    cplx hg = hilbert(g, z);
    CHECK(std::abs(hilbert(f, std::conj(z)) - std::conj(hf)) <= 1e-12 * std::abs(hf));
    cplx hs = hilbert(f + g, z);
    // the sum adds primitive values at a refined set of breakpoints, so its
    // rounding is measured against those values
    double scale = primitive_scale(f, z) + primitive_scale(g, z) + primitive_scale(f + g, z);
    CHECK(std::abs(hs - hf - hg) <= 8 * std::numeric_limits<double>::epsilon() * scale);
  }
}

TEST_CASE("Plemelj limit") {
  gen::Rng rng(53);
  for (int c = 0; c < 50; ++c) {
    Interval iv = gen::interval(rng);
    gen::Sample s = gen::term_on(rng, "POLY", iv);
    PiecewiseFunction f(Parity::none, {Piece(iv, {true, true}, {s.term})});
    // a smooth region: away from the ends and where f is not small against its size on the piece
    double y = rng.uniform(iv.lo + 0.25 * iv.width(), iv.hi - 0.25 * iv.width());
    double fy = f(y);
    double fmax = std::max({std::abs(f(iv.lo)), std::abs(f(iv.mid())), std::abs(f(iv.hi))});
    if (std::abs(fy) < 0.1 * fmax) continue;
    cplx near = hilbert(f, cplx(y, 1e-4));
    CHECK(std::abs(near.imag() + kPi * fy) <= 1e-2 * std::abs(fy));
    cplx on = hilbert(f, cplx(y, 0.0));
    CHECK(std::abs(on.imag() + kPi * fy) <= 1e-10 * std::abs(fy));
  }
}

TEST_CASE("oracle equivalence for every formula") {
  gen::Rng rng(54);
  for (const auto& name : gen::all_formulas()) {
    for (int c = 0; c < 5; ++c) {
      gen::Sample s = gen::term_on(rng, name, gen::interval(rng), true);
      PiecewiseFunction f = single(s);
      for (int k = 0; k < 20; ++k) {
        cplx z = random_z(rng, s.piece);
        cplx q = oracle::hilbert(s, z);
        INFO(name, " z=", z.real(), "+", z.imag(), "i");
        CHECK(std::abs(hilbert(f, z) - q) < 1e-8 * std::abs(q));
      }
    }
  }
}

TEST_CASE("real axis singular points") {
  PiecewiseFunction log_piece(Parity::even, {Piece({0, 4}, {false, true}, {Term("LOG", {0, 1})})});
  CHECK_THROWS_AS(hilbert(log_piece, 0.0), SingularPoint);
  CHECK_THROWS_AS(hilbert(log_piece, 4.0), SingularPoint);  // jump to zero
  CHECK_NOTHROW(hilbert(log_piece, 1.0));
  CHECK_NOTHROW(hilbert(log_piece, 5.0));
  PiecewiseFunction open_end(Parity::none, {Piece({0, 1}, {true, false}, {Term("POLY", {0.0, 1.0})}),
                                            Piece({1, 2}, {false, true}, {Term("POLY", {2.0, -1.0})})});
  CHECK_THROWS_AS(hilbert(open_end, 1.0), SingularPoint);
}

TEST_CASE("PLS exponents") {
  for (double b : {-0.5, 0.5, 1.5, 2.5, 3.5}) {
    gen::Sample s{Term("PLS", {0.0, b, 1.3}), {0, 2}, true, false};
    cplx z(0.7, 0.4);
    cplx q = oracle::hilbert(s, z);
    CHECK(std::abs(hilbert(single(s), z) - q) < 1e-9 * std::abs(q));
  }
  PiecewiseFunction bad(Parity::none, {Piece({0, 1}, {false, true}, {Term("PLS", {0.0, 0.3, 1.0})})});
  CHECK_THROWS_AS(hilbert(bad, cplx(0.5, 1.0)), UnsupportedKernel);
  // moments need no restriction
  CHECK(moments(bad, 0)[0] == doctest::Approx(1.0 / 1.3).epsilon(1e-14));
}

TEST_CASE("Hilbert primitive derivative") {
  gen::Rng rng(55);
  for (const auto& name : gen::all_formulas()) {
    const Formula& formula = find_formula(name);
    for (int c = 0; c < 30; ++c) {
      gen::Sample s = gen::term_on(rng, name, gen::interval(rng), true);
      const Interval& iv = s.piece;
      double x = rng.uniform(iv.lo + 0.05 * iv.width(), iv.hi - 0.05 * iv.width());
      cplx z(rng.uniform(iv.lo - 1, iv.hi + 1), rng.uniform(0.1, 3.0) * (rng.coin() ? 1 : -1));
      double h = 1e-5 * iv.width();
      auto p = [&](double t) { return hilbert_primitive(formula, iv, t, z, s.term.params); };
      cplx fd = oracle::derivative(p, x, h);
      cplx want = oracle::stencil_mean(s, [z](double t) { return 1.0 / (z - t); }, x, h);
      INFO(name);
      CHECK(std::abs(fd - want) < 1e-6 * std::abs(want));
    }
  }
}

TEST_CASE("moments") {
  PiecewiseFunction b(Parity::even, {Piece({0, 1}, {true, true}, {Term("POLY", {1.0})})});
  auto m = moments(b, 3);
  CHECK(m[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(m[1] == 0.0);
  CHECK(m[2] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m[3] == 0.0);

  gen::Rng rng(56);
  for (int c = 0; c < 20; ++c) {
    PiecewiseFunction f = gen::function(rng, Parity::odd);
    CHECK(moments(f, 0)[0] == 0.0);
  }
  for (int c = 0; c < 20; ++c) {
    PiecewiseFunction f = gen::function(rng, gen::parity(rng));
    auto m6 = moments(f, 6);
    for (int n = 0; n <= 6; ++n) {
      auto q = quad_moment(f, n);
      CHECK(std::abs(m6[n] - q.value) < 1e-7 * std::max(1.0, std::abs(q.value)));
    }
  }
  CHECK_THROWS_AS(moments(PiecewiseFunction(), 2), EmptyFunction);
}

TEST_CASE("kernel registry") {
  PiecewiseFunction f = box();
  cplx z(0.3, 0.8);
  CHECK(transform(f, kHilbertKernel, z) == hilbert(f, z));
  CHECK(default_registry().frozen());
  CHECK_THROWS_AS(register_kernel("unit", "POLY", nullptr), RegistryFrozen);

  KernelRegistry reg;
  KernelRegistry::add_builtins(reg);
  CHECK(reg.contains(kMomentKernel, "TAIL"));
  reg.register_primitive("unit", "POLY", [](const Interval& piece, double x, cplx, std::span<const double> p) {
    return moment_kernel_primitive(formulas::poly(), piece, x, cplx(0.0), p);
  });
  gen::Rng rng(57);
  for (int c = 0; c < 10; ++c) {
    std::vector<double> coef(rng.integer(1, 5));
    for (double& v : coef) v = rng.uniform(-1.0, 1.0);
    PiecewiseFunction g(gen::parity(rng), {Piece({0.5, 2}, {true, true}, {Term("POLY", coef)})});
    CHECK(transform(g, "unit", cplx(123.0, 4.0), reg).real() == doctest::Approx(moments(g, 0)[0]).epsilon(1e-14));
  }
  PiecewiseFunction with_log(Parity::none, {Piece({0, 1}, {true, true}, {Term("LOG", {-1.0, 1.0})})});
  CHECK_THROWS_AS(transform(with_log, "unit", cplx(0.0), reg), MissingPrimitive);
  reg.freeze();
  CHECK_THROWS_AS(reg.register_primitive("unit", "LOG", nullptr), RegistryFrozen);
  try {
    reg.find("unit", "LOG");
    FAIL("expected MissingPrimitive");
  } catch (const MissingPrimitive& e) {
    CHECK(e.formula() == "LOG");
    CHECK(e.kernel() == "unit");
  }
}
