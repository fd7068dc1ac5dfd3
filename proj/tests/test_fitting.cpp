#include <doctest.h>

#include <cmath>
#include <vector>

#include "gen.hpp"
#include "piecekit/demos.hpp"
#include "piecekit/errors.hpp"
#include "piecekit/fitting.hpp"

using namespace piecekit;

namespace {

// Number of pieces the POLY-only fit of sqrt on (0, 1) had built when it
// stopped at the minimum width. Regression value.
constexpr int kSqrtPolyOnlyPieces = 20;

std::vector<double> poly_coefficients(const PiecewiseFunction& f) {
  for (const auto& t : f.pieces().at(0).terms())
    if (t.name() == "POLY") return t.params;
  return {};
}

}  // namespace

TEST_CASE("cubic is reproduced") {
  FitConfig cfg;
  cfg.rtol = 1e-12;
  FitResult r = piecewisefit([](double x) { return 2 * x * x * x - x; }, {0, 1}, cfg);
  REQUIRE(r.function.pieces().size() == 1);
  std::vector<double> c = poly_coefficients(r.function);
  c.resize(std::max<std::size_t>(c.size(), 4), 0.0);
  std::vector<double> want{0, -1, 0, 2};
  for (std::size_t k = 0; k < c.size(); ++k) CHECK(std::abs(c[k] - (k < 4 ? want[k] : 0.0)) < 1e-10);
}

TEST_CASE("single solves") {
  std::vector<Candidate> log_only{Candidate::at("LOG", Anchor::left)};
  LinearFit a = fit_interval([](double x) { return 3 * std::log(x); }, {0, 1}, log_only, 0);
  REQUIRE(a.terms.size() == 1);
  CHECK(std::abs(a.terms[0].params[1] - 3.0) < 1e-12);
  CHECK(a.terms[0].params[0] == 0.0);

  std::vector<Candidate> twice{Candidate::at("LOG", Anchor::left), Candidate::at("LOG", Anchor::left)};
  try {
    fit_interval([](double x) { return std::log(x); }, {0, 1}, twice, 0);
    FAIL("expected RankDeficient");
  } catch (const RankDeficient& e) {
    CHECK(e.column() == 1);
  }

  std::vector<Candidate> poly{Candidate::poly()};
  LinearFit q = fit_interval([](double x) { return x * x; }, {0.5, 3}, poly, 2);
  CHECK(q.residual <= 1e-13);

  // the anchored shape parameter is carried, the amplitude is solved
  std::vector<Candidate> pls{Candidate::at("PLS", Anchor::right, {-0.5})};
  LinearFit p = fit_interval([](double x) { return 0.25 / std::sqrt(2 - x); }, {1, 2}, pls, 0);
  CHECK(p.terms[0].params[0] == 2.0);
  CHECK(p.terms[0].params[1] == -0.5);
  CHECK(std::abs(p.terms[0].params[2] - 0.25) < 1e-13);
}

TEST_CASE("square root with and without the SQRT candidate") {
  auto root = [](double x) { return std::sqrt(x); };
  FitConfig with;
  with.candidates = {Candidate::poly(), Candidate::at("SQRT", Anchor::left)};
  FitResult good = piecewisefit(root, {0, 1}, with);
  CHECK(good.function.pieces().size() == 1);
  // SQRT is finite at its anchor, so the endpoint stays included
  CHECK(good.function.pieces()[0].included()[0] == true);

  // sqrt is self-similar at 0, so with a per-piece relative tolerance the
  // leftmost piece never passes: the fit bisects down to the minimum width.
  FitConfig poly_only;
  try {
    piecewisefit(root, {0, 1}, poly_only);
    FAIL("expected FitDidNotConverge");
  } catch (const FitDidNotConverge& e) {
    const auto& pieces = e.partial().function.pieces();
    CHECK(pieces.size() > 4);
    CHECK(static_cast<int>(pieces.size()) == kSqrtPolyOnlyPieces);
    CHECK(e.worst_interval().lo == 0.0);
    CHECK(e.worst_error() > 1e-6);
  }
}

TEST_CASE("determinism") {
  auto t = [](double x) { return std::exp(std::sin(3 * x)) + std::abs(x - 0.3); };
  FitConfig cfg;
  cfg.rtol = 1e-6;
  cfg.rng_seed = 1234;
  FitResult a = piecewisefit(t, {-1, 2}, cfg);
  FitResult b = piecewisefit(t, {-1, 2}, cfg);
  CHECK(serialize(a.function) == serialize(b.function));
  cfg.parallel = true;
  FitResult c = piecewisefit(t, {-1, 2}, cfg);
  CHECK(serialize(a.function) == serialize(c.function));
  CHECK(a.report.evaluations == c.report.evaluations);
}

TEST_CASE("tolerance honesty") {
  struct Case {
    Target t;
    Interval iv;
  } cases[] = {{[](double x) { return std::atan(10 * x); }, {-1, 1}},
               {[](double x) { return std::exp(-x) * std::cos(4 * x); }, {0, 5}},
               {demos::square_lattice_dos, {0.5, 4}}};
  for (const auto& c : cases) {
    FitConfig cfg;
    cfg.rtol = 1e-7;
    FitResult r = piecewisefit(c.t, c.iv, cfg);
    gen::Rng rng(777);
    for (std::size_t i = 0; i < r.function.pieces().size(); ++i) {
      const Piece& p = r.function.pieces()[i];
      double tol = r.report.pieces[i].tolerance;
      CHECK(r.report.pieces[i].max_error <= tol);
      for (int k = 0; k < 10 * cfg.validation_points; ++k) {
        double x = rng.uniform(p.interval().lo, p.interval().hi);
        CHECK(std::abs(p(x) - c.t(x)) <= 5 * tol);
      }
    }
  }
}

TEST_CASE("monotone refinement") {
  Target targets[] = {[](double x) { return std::atan(10 * x); }, [](double x) { return std::exp(x) * std::sin(x); },
                      [](double x) { return 1.0 / (1.0 + 25.0 * x * x); }};
  for (const auto& t : targets) {
    double previous = INFINITY;
    for (double rtol = 1e-3; rtol > 1e-10; rtol /= 2) {
      FitConfig cfg;
      cfg.rtol = rtol;
      double err = piecewisefit(t, {-1, 1}, cfg).report.max_observed_error;
      CHECK(err <= previous);
      previous = err;
    }
  }
}

TEST_CASE("exactly representable targets") {
  gen::Rng rng(61);
  for (int c = 0; c < 50; ++c) {
    std::vector<double> coef(rng.integer(1, 7));
    for (double& v : coef) v = rng.uniform(-2.0, 2.0);
    double amp = rng.uniform(-2.0, 2.0);
    int kind = c % 3;  // POLY only, POLY + LOG, POLY + SQRT anchored right
    Term poly("POLY", coef);
    Term extra = kind == 2 ? Term("SQRT", {1.0, amp}) : Term("LOG", {0.0, amp});
    Target t = [&](double x) { return poly(x) + (kind ? extra(x) : 0.0); };
    FitConfig cfg;
    cfg.rtol = 1e-12;
    if (kind == 1) cfg.candidates.push_back(Candidate::at("LOG", Anchor::left));
    if (kind == 2) cfg.candidates.push_back(Candidate::at("SQRT", Anchor::right));
    FitResult r = piecewisefit(t, {0, 1}, cfg);
    REQUIRE(r.function.pieces().size() == 1);
    for (const Term& term : r.function.pieces()[0].terms()) {
      if (term.name() == "POLY") {
        for (std::size_t k = 0; k < std::max(coef.size(), term.params.size()); ++k) {
          double want = k < coef.size() ? coef[k] : 0.0;
          double got = k < term.params.size() ? term.params[k] : 0.0;
          CHECK(std::abs(got - want) < 1e-10);
        }
      } else {
        CHECK(term.params[0] == extra.params[0]);
        CHECK(std::abs(term.params[1] - amp) < 1e-10);
      }
    }
  }
}

TEST_CASE("fixed anchors split the interval") {
  FitConfig cfg;
  cfg.rtol = 1e-10;
  cfg.candidates = {Candidate::poly(), Candidate::fixed("LOG", 0.3)};
  FitResult r = piecewisefit([](double x) { return 1 + x - 0.5 * std::log(std::abs(x - 0.3)); }, {0, 1}, cfg);
  REQUIRE(r.function.pieces().size() == 2);
  CHECK(r.function.pieces()[0].interval().hi == 0.3);
  CHECK(r.function.pieces()[0].included()[1] == false);
  CHECK(r.function.pieces()[1].included()[0] == false);
  CHECK(r.function.pieces()[0].included()[0] == true);
  CHECK(r.function(0.7) == doctest::Approx(1.7 - 0.5 * std::log(0.4)).epsilon(1e-10));
}

TEST_CASE("parity and flat targets") {
  FitConfig cfg;
  cfg.parity = Parity::odd;
  FitResult r = piecewisefit([](double x) { return std::sin(x); }, {0, 2}, cfg);
  CHECK(r.function.parity() == Parity::odd);
  CHECK(r.function(-1.0) == doctest::Approx(-std::sin(1.0)).epsilon(1e-6));

  FitResult z = piecewisefit([](double) { return 0.0; }, {0, 1}, FitConfig{});
  CHECK(z.function.pieces().size() == 1);
  for (double x : {0.1, 0.5, 0.9}) CHECK(z.function(x) == 0.0);
}

TEST_CASE("fit errors") {
  CHECK_THROWS_AS(piecewisefit([](double x) { return x > 0.5 ? NAN : x; }, {0, 1}, FitConfig{}), TargetNotFinite);

  FitConfig shallow;
  shallow.max_depth = 2;
  try {
    piecewisefit([](double x) { return std::abs(x - 0.3337); }, {0, 1}, shallow);
    FAIL("expected FitDidNotConverge");
  } catch (const FitDidNotConverge& e) {
    // [0, 1/4] and [1/2, 1] pass, [1/4, 1/2] is the failing leaf
    CHECK(e.partial().function.pieces().size() == 3);
    CHECK(e.worst_interval().contains(0.3337));
  }
  FitConfig bad;
  bad.rtol = 0;
  CHECK_THROWS_AS(piecewisefit([](double x) { return x; }, {0, 1}, bad), Error);
}
