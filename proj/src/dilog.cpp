#include "piecekit/dilog.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace piecekit {

namespace {

using cplx = std::complex<double>;

constexpr double kPi2Over6 = std::numbers::pi * std::numbers::pi / 6.0;

// B_n / (n+1)! for n = 0, 1, 2, 4, 6, ..., 38 (B_1 = -1/2)
constexpr std::array<double, 21> kBernoulli = {
    1.0,
    -0.25,
    0.027777777777777776,
    -0.0002777777777777778,
    4.72411186696901e-06,
    -9.185773074661964e-08,
    1.8978869988971e-09,
    -4.0647616451442256e-11,
    8.921691020456452e-13,
    -1.9939295860721074e-14,
    4.518980029619918e-16,
    -1.0356517612181247e-17,
    2.395218621026187e-19,
    -5.581785874325009e-21,
    1.3091507554183213e-22,
    -3.0874198024267403e-24,
    7.315975652702203e-26,
    -1.740845657234001e-27,
    4.1576356446139e-29,
    -9.962148488284622e-31,
    2.3940344248961652e-32,
};

cplx plain_series(cplx w) {
  cplx sum = 0.0, power = w;
  for (int k = 1; k <= 200; ++k) {
    const cplx term = power / double(k * k);
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    power *= w;
  }
  return sum;
}

// Li2(w) = sum_n B_n u^(n+1)/(n+1)!, u = -ln(1 - w), |u| < 2 pi.
cplx bernoulli_series(cplx w) {
  const cplx u = -std::log(1.0 - w);
  const cplx u2 = u * u;
  cplx sum = u + kBernoulli[1] * u2;
  cplx power = u * u2;  // u^3 for n = 2
  for (std::size_t i = 2; i < kBernoulli.size(); ++i) {
    const cplx term = kBernoulli[i] * power;
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    power *= u2;
  }
  return sum;
}

// |w| <= 1
cplx disk(cplx w) {
  if (w.real() > 0.5) {
    if (w == cplx(1.0, 0.0)) return kPi2Over6;
    return kPi2Over6 - std::log(w) * std::log(1.0 - w) - disk(1.0 - w);
  }
  if (std::abs(w) <= 0.5) return plain_series(w);
  return bernoulli_series(w);
}

}  // namespace

std::complex<double> dilog(std::complex<double> w) {
  if (w == cplx(0.0, 0.0)) return 0.0;
  if (std::abs(w) > 1.0) {
    const cplx l = std::log(-w);
    return -kPi2Over6 - 0.5 * l * l - disk(1.0 / w);
  }
  return disk(w);
}

}  // namespace piecekit
