#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace piecekit {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class EmptyFunction : public Error {
public:
  EmptyFunction() : Error("piecewise function has no pieces") {}
};

class MixedParity : public Error {
public:
  MixedParity() : Error("cannot combine piecewise functions of different parity; unfold first") {}
};

class ConstraintViolation : public Error {
public:
  using Error::Error;
};

class UnknownFormula : public Error {
public:
  explicit UnknownFormula(const std::string& name) : Error("unknown formula '" + name + "'") {}
};

class ArityMismatch : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at byte " + std::to_string(position) + ")"), position_(position) {}
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

class UnsupportedKernel : public Error {
public:
  using Error::Error;
};

class SingularPoint : public Error {
public:
  SingularPoint(const std::string& what, double where) : Error(what), where_(where) {}
  double where() const { return where_; }

private:
  double where_;
};

class MissingPrimitive : public Error {
public:
  MissingPrimitive(std::string formula, std::string kernel)
      : Error("no primitive registered for formula '" + formula + "' and kernel '" + kernel + "'"),
        formula_(std::move(formula)),
        kernel_(std::move(kernel)) {}
  const std::string& formula() const { return formula_; }
  const std::string& kernel() const { return kernel_; }

private:
  std::string formula_;
  std::string kernel_;
};

class RegistryFrozen : public Error {
public:
  RegistryFrozen() : Error("kernel registry is frozen; register primitives before the first transform") {}
};

class RankDeficient : public Error {
public:
  explicit RankDeficient(std::size_t column)
      : Error("least-squares design is rank deficient at column " + std::to_string(column)), column_(column) {}
  std::size_t column() const { return column_; }

private:
  std::size_t column_;
};

class TargetNotFinite : public Error {
public:
  explicit TargetNotFinite(double x)
      : Error("target returned a non-finite value at x = " + std::to_string(x)), x_(x) {}
  double x() const { return x_; }

private:
  double x_;
};

}  // namespace piecekit
