#include "piecekit/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "piecekit/errors.hpp"
#include "piecekit/format.hpp"

namespace piecekit {

std::string_view to_string(Parity p) {
  switch (p) {
    case Parity::even:
      return "even";
    case Parity::odd:
      return "odd";
    default:
      return "none";
  }
}

Parity parse_parity(std::string_view text) {
  if (text == "none") return Parity::none;
  if (text == "even") return Parity::even;
  if (text == "odd") return Parity::odd;
  throw Error("unknown parity '" + std::string(text) + "' (expected none, even or odd)");
}

Term::Term(std::string_view name, std::vector<double> p) : formula(&find_formula(name)), params(std::move(p)) {}

Piece::Piece(Interval interval, std::array<bool, 2> included, std::vector<Term> terms)
    : interval_(interval), included_(included), terms_(std::move(terms)) {
  if (!std::isfinite(interval_.lo) || !std::isfinite(interval_.hi))
    throw ConstraintViolation("piece interval must be finite");
  if (!(interval_.lo < interval_.hi))
    throw ConstraintViolation("piece interval must satisfy x1 < x2, got (" + format_real(interval_.lo) + ", " +
                              format_real(interval_.hi) + ")");
  if (terms_.empty()) throw ConstraintViolation("piece must have at least one term");
  for (const auto& t : terms_) {
    if (!t.formula) throw ConstraintViolation("term without formula");
    check_arity(*t.formula, t.params);
    if (auto why = t.formula->violation(interval_, t.params)) throw ConstraintViolation(*why);
  }
}

// ---------------------------------------------------------------------------

PiecewiseFunction::PiecewiseFunction(Parity parity, std::vector<Piece> pieces)
    : parity_(parity), pieces_(std::move(pieces)) {
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& iv = pieces_[i].interval();
    if (parity_ != Parity::none && iv.lo < 0)
      throw ConstraintViolation("pieces of an even or odd function must lie on x >= 0");
    if (i > 0 && pieces_[i - 1].interval().hi > iv.lo)
      throw ConstraintViolation("pieces must be sorted and non-overlapping");
  }
}

const Piece* PiecewiseFunction::locate(double x) const {
  auto it = std::lower_bound(pieces_.begin(), pieces_.end(), x,
                             [](const Piece& p, double v) { return p.interval().hi < v; });
  if (it == pieces_.end() || it->interval().lo > x) return nullptr;
  auto next = std::next(it);
  if (x == it->interval().hi && next != pieces_.end() && next->interval().lo == x && !it->included()[1] &&
      next->included()[0])
    return &*next;
  return &*it;
}

double PiecewiseFunction::evaluate(double x) const {
  const double folded = parity_ == Parity::none ? x : std::fabs(x);
  const Piece* p = locate(folded);
  if (!p) return 0.0;
  const double v = (*p)(folded);
  return (parity_ == Parity::odd && x < 0) ? -v : v;
}

double evaluate(const PiecewiseFunction& f, double x) { return f.evaluate(x); }

std::pair<double, double> support(const PiecewiseFunction& f) {
  if (f.empty()) throw EmptyFunction();
  const double hi = f.pieces().back().interval().hi;
  if (f.parity() != Parity::none) return {-hi, hi};
  return {f.pieces().front().interval().lo, hi};
}

// ---------------------------------------------------------------------------

namespace {

// Flag of a contributing piece at breakpoint x: its own flag when x is one of
// its endpoints, otherwise true (x interior).
bool flag_at(const Piece& p, double x) {
  if (x == p.interval().lo) return p.included()[0];
  if (x == p.interval().hi) return p.included()[1];
  return true;
}

const Piece* covering(const std::vector<Piece>& pieces, double a, double b) {
  for (const auto& p : pieces)
    if (p.interval().lo <= a && b <= p.interval().hi) return &p;
  return nullptr;
}

}  // namespace

PiecewiseFunction add(const PiecewiseFunction& f, const PiecewiseFunction& g) {
  if (f.parity() != g.parity()) throw MixedParity();
  std::vector<double> cuts;
  for (const auto* h : {&f, &g})
    for (const auto& p : h->pieces()) {
      cuts.push_back(p.interval().lo);
      cuts.push_back(p.interval().hi);
    }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<Piece> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    std::vector<Term> terms;
    std::array<bool, 2> flags{true, true};
    for (const auto* h : {&f, &g}) {
      const Piece* p = covering(h->pieces(), a, b);
      if (!p) continue;
      terms.insert(terms.end(), p->terms().begin(), p->terms().end());
      flags[0] = flags[0] && flag_at(*p, a);
      flags[1] = flags[1] && flag_at(*p, b);
    }
    if (terms.empty()) continue;
    out.emplace_back(Interval{a, b}, flags, std::move(terms));
  }
  return PiecewiseFunction(f.parity(), std::move(out));
}

PiecewiseFunction operator+(const PiecewiseFunction& f, const PiecewiseFunction& g) { return add(f, g); }

PiecewiseFunction scale(const PiecewiseFunction& f, double c) {
  if (!std::isfinite(c)) throw Error("scale factor must be finite");
  std::vector<Piece> out;
  out.reserve(f.pieces().size());
  for (const auto& p : f.pieces()) {
    std::vector<Term> terms;
    for (const auto& t : p.terms()) terms.emplace_back(*t.formula, scale_params(*t.formula, t.params, c));
    out.emplace_back(p.interval(), p.included(), std::move(terms));
  }
  return PiecewiseFunction(f.parity(), std::move(out));
}

PiecewiseFunction unfold(const PiecewiseFunction& f) {
  if (f.parity() == Parity::none) return f;
  const double sign = f.parity() == Parity::odd ? -1.0 : 1.0;
  std::vector<Piece> out;
  out.reserve(2 * f.pieces().size());
  for (auto it = f.pieces().rbegin(); it != f.pieces().rend(); ++it) {
    std::vector<Term> terms;
    for (const auto& t : it->terms()) {
      auto q = t.formula->reflect(t.params);
      if (sign < 0) q = scale_params(*t.formula, q, sign);
      terms.emplace_back(*t.formula, std::move(q));
    }
    const auto& iv = it->interval();
    out.emplace_back(Interval{-iv.hi, -iv.lo}, std::array<bool, 2>{it->included()[1], it->included()[0]},
                     std::move(terms));
  }
  out.insert(out.end(), f.pieces().begin(), f.pieces().end());
  return PiecewiseFunction(Parity::none, std::move(out));
}

// ---------------------------------------------------------------------------

std::string serialize(const PiecewiseFunction& f) {
  nlohmann::ordered_json doc;
  doc["parity"] = std::string(to_string(f.parity()));
  auto pieces = nlohmann::ordered_json::array();
  for (const auto& p : f.pieces()) {
    nlohmann::ordered_json jp;
    jp["interval"] = {p.interval().lo, p.interval().hi};
    jp["included"] = {p.included()[0], p.included()[1]};
    auto terms = nlohmann::ordered_json::array();
    for (const auto& t : p.terms()) {
      nlohmann::ordered_json jt;
      jt["formula"] = std::string(t.name());
      jt["params"] = t.params;
      terms.push_back(std::move(jt));
    }
    jp["terms"] = std::move(terms);
    pieces.push_back(std::move(jp));
  }
  doc["pieces"] = std::move(pieces);
  return doc.dump(2) + "\n";
}

namespace {

using json = nlohmann::json;

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what, 0);
}

const json& member(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where, std::string("missing \"") + key + "\"");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) schema_error(where, "expected a number");
  return v.get<double>();
}

}  // namespace

PiecewiseFunction deserialize(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
  const auto& parity_text = member(doc, "parity", "$");
  if (!parity_text.is_string()) schema_error("$.parity", "expected a string");
  Parity parity;
  try {
    parity = parse_parity(parity_text.get<std::string>());
  } catch (const Error& e) {
    schema_error("$.parity", e.what());
  }
  const auto& jpieces = member(doc, "pieces", "$");
  if (!jpieces.is_array()) schema_error("$.pieces", "expected an array");

  std::vector<Piece> pieces;
  for (std::size_t i = 0; i < jpieces.size(); ++i) {
    const std::string at = "$.pieces[" + std::to_string(i) + "]";
    const auto& jp = jpieces[i];
    const auto& iv = member(jp, "interval", at);
    if (!iv.is_array() || iv.size() != 2) schema_error(at + ".interval", "expected [x1, x2]");
    const auto& inc = member(jp, "included", at);
    if (!inc.is_array() || inc.size() != 2 || !inc[0].is_boolean() || !inc[1].is_boolean())
      schema_error(at + ".included", "expected [bool, bool]");
    const auto& jterms = member(jp, "terms", at);
    if (!jterms.is_array()) schema_error(at + ".terms", "expected an array");
    std::vector<Term> terms;
    for (std::size_t k = 0; k < jterms.size(); ++k) {
      const std::string tat = at + ".terms[" + std::to_string(k) + "]";
      const auto& name = member(jterms[k], "formula", tat);
      if (!name.is_string()) schema_error(tat + ".formula", "expected a string");
      const auto& jparams = member(jterms[k], "params", tat);
      if (!jparams.is_array()) schema_error(tat + ".params", "expected an array");
      std::vector<double> params;
      for (std::size_t j = 0; j < jparams.size(); ++j)
        params.push_back(number(jparams[j], tat + ".params[" + std::to_string(j) + "]"));
      try {
        terms.emplace_back(name.get<std::string>(), std::move(params));
      } catch (const UnknownFormula& e) {
        schema_error(tat + ".formula", e.what());
      }
    }
    pieces.emplace_back(Interval{number(iv[0], at + ".interval[0]"), number(iv[1], at + ".interval[1]")},
                        std::array<bool, 2>{inc[0].get<bool>(), inc[1].get<bool>()}, std::move(terms));
  }
  return PiecewiseFunction(parity, std::move(pieces));
}

// ---------------------------------------------------------------------------

namespace {

std::string sci(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15e", x);
  return buf;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::string param_list(const std::vector<double>& params, const std::string& indent) {
  std::string s = "[";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i > 0) s += (i % 3 == 0) ? ",\n" + indent : ", ";
    s += sci(params[i]);
  }
  return s + "]";
}

}  // namespace

std::string show(const PiecewiseFunction& f) {
  std::ostringstream os;
  os << "PiecewiseFunction(:" << to_string(f.parity()) << ", [\n";
  const std::string indent = "        ";
  for (const auto& p : f.pieces()) {
    os << "    Piece((" << format_real(p.interval().lo) << ", " << format_real(p.interval().hi) << "), ("
       << bool_text(p.included()[0]) << ", " << bool_text(p.included()[1]) << "), ";
    if (p.terms().size() == 1) {
      os << p.terms()[0].name() << ",\n" << indent << param_list(p.terms()[0].params, indent) << ")";
    } else {
      os << "[";
      for (std::size_t k = 0; k < p.terms().size(); ++k) os << (k ? ", " : "") << p.terms()[k].name();
      os << "],\n" << indent << "[";
      for (std::size_t k = 0; k < p.terms().size(); ++k)
        os << (k ? ", " : "") << param_list(p.terms()[k].params, indent);
      os << "])";
    }
    os << "\n";
  }
  os << "])\n";
  return os.str();
}

std::string summary(const PiecewiseFunction& f) {
  const auto n = f.pieces().size();
  std::string s = "<Piecewise " + std::string(to_string(f.parity())) + " function with " + std::to_string(n) +
                  (n == 1 ? " piece" : " pieces");
  if (!f.empty()) {
    auto [lo, hi] = support(f);
    s += " and support [" + format_real(lo) + ", " + format_real(hi) + "]";
  }
  return s + ">";
}

}  // namespace piecekit
