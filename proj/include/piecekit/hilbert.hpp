#pragma once

#include <atomic>
#include <complex>
#include <functional>
#include <map>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "piecekit/core.hpp"

namespace piecekit {

using cplx = std::complex<double>;

/// Closed-form P(x, X; p) with dP/dx = F(x; p) K(x, X) on the open piece.
///
/// The piece is passed so a primitive may pick a representation (anchor side,
/// series vs closed form) that stays continuous across the whole piece; the
/// choice must not depend on x.
using KernelPrimitive = std::function<cplx(const Interval& piece, double x, cplx X, std::span<const double> params)>;

inline constexpr std::string_view kHilbertKernel = "hilbert";
/// K(x, n) = x^n with n = Re X.
inline constexpr std::string_view kMomentKernel = "moment";

/// Primitives keyed by (kernel id, formula name).
///
/// Registration happens up front; freeze() makes the table read-only and any
/// later registration throws RegistryFrozen.
class KernelRegistry {
public:
  KernelRegistry() = default;
  KernelRegistry(const KernelRegistry&) = delete;
  KernelRegistry& operator=(const KernelRegistry&) = delete;

  /// Registry with the hilbert and moment primitives of all seven catalog formulas.
  static void add_builtins(KernelRegistry& reg);

  void register_primitive(std::string kernel, std::string formula, KernelPrimitive primitive);
  void freeze() { frozen_.store(true, std::memory_order_release); }
  bool frozen() const { return frozen_.load(std::memory_order_acquire); }

  /// Throws MissingPrimitive.
  const KernelPrimitive& find(std::string_view kernel, std::string_view formula) const;
  bool contains(std::string_view kernel, std::string_view formula) const;

private:
  mutable std::shared_mutex mutex_;
  std::atomic<bool> frozen_{false};
  std::map<std::pair<std::string, std::string>, KernelPrimitive> table_;
};

/// Process-wide registry, built-ins pre-registered. Frozen by the first
/// transform that uses it.
KernelRegistry& default_registry();

void register_kernel(std::string kernel, std::string formula, KernelPrimitive primitive);

/// Sum over pieces of the unfolded function and over terms of P(x2) - P(x1).
cplx transform(const PiecewiseFunction& f, std::string_view kernel, cplx X);
cplx transform(const PiecewiseFunction& f, std::string_view kernel, cplx X, const KernelRegistry& registry);

/// M_n = int x^n f(x) dx for n = 0..n_max. Throws EmptyFunction.
std::vector<double> moments(const PiecewiseFunction& f, int n_max);

/// H(z) = int f(x)/(z - x) dx. On the real axis (Im z == 0) this is the
/// boundary value from above: PV int f(x)/(y - x) dx - i pi f(y). Throws
/// SingularPoint there when y sits on an excluded endpoint, a singular anchor
/// or a jump of f, and UnsupportedKernel for PLS with a non-half-integer exponent.
cplx hilbert(const PiecewiseFunction& f, cplx z);

/// Built-in Hilbert primitive for one term.
cplx hilbert_primitive(const Formula& formula, const Interval& piece, double x, cplx z,
                       std::span<const double> params);

/// Built-in moment primitive wrapped as a kernel primitive.
cplx moment_kernel_primitive(const Formula& formula, const Interval& piece, double x, cplx X,
                             std::span<const double> params);

}  // namespace piecekit
