#ifndef ELLOP_TESTS_ORACLES_HPP
#define ELLOP_TESTS_ORACLES_HPP

// Slow, independent reference implementations used only by tests.
//
// The elliptic oracles sum the defining lattice series directly over the box
// |m|,|n| <= 200.  A sharp box cutoff leaves a truncation bias decaying like
// R^-2 (angular corner term of the box), far above the comparison tolerances,
// so each quantity is accumulated over the nested boxes R = 50, 100, 200 and
// the R^-2 and R^-3 error terms are removed by Richardson extrapolation.
// All accumulation is compensated (Kahan).

#include <array>
#include <cmath>
#include <complex>
#include <functional>

#include "numutil.hpp"

namespace ellop::oracles {

using ellop::cplx;

namespace detail {

// Accumulate f(lambda) over lattice points lambda = 2*m*w1 + 2*n*w2 with
// max(|m|,|n|) in (r_prev, r], excluding the origin, into a compensated sum.
template <typename F>
void add_ring(const F& f, cplx w1, cplx w2, int r_prev, int r, CompensatedSum& acc) {
  const cplx P1 = 2.0 * w1, P2 = 2.0 * w2;
  for (int m = -r; m <= r; ++m) {
    for (int n = -r; n <= r; ++n) {
      if (std::max(std::abs(m), std::abs(n)) <= r_prev) continue;
      if (m == 0 && n == 0) continue;
      acc.add(f(static_cast<double>(m) * P1 + static_cast<double>(n) * P2));
    }
  }
}

// Sum f over the boxes R = 50, 100, 200 and extrapolate the R -> infinity limit
// assuming tail = c2/R^2 + c3/R^3 + O(R^-4).
template <typename F>
cplx box_extrapolated(const F& f, cplx w1, cplx w2) {
  CompensatedSum acc;
  add_ring(f, w1, w2, 0, 50, acc);
  const cplx s50 = acc.value();
  add_ring(f, w1, w2, 50, 100, acc);
  const cplx s100 = acc.value();
  add_ring(f, w1, w2, 100, 200, acc);
  const cplx s200 = acc.value();
  const cplx t100 = s100 + (s100 - s50) / 3.0;    // kills R^-2
  const cplx t200 = s200 + (s200 - s100) / 3.0;
  return t200 + (t200 - t100) / 7.0;              // kills R^-3
}

}  // namespace detail

// g2 = 60 sum' lambda^-4.
inline cplx g2_lattice_sum(cplx w1, cplx w2) {
  return 60.0 * detail::box_extrapolated(
                    [](cplx lam) {
                      const cplx l2 = lam * lam;
                      return 1.0 / (l2 * l2);
                    },
                    w1, w2);
}

// g3 = 140 sum' lambda^-6.
inline cplx g3_lattice_sum(cplx w1, cplx w2) {
  return 140.0 * detail::box_extrapolated(
                     [](cplx lam) {
                       const cplx l2 = lam * lam;
                       return 1.0 / (l2 * l2 * l2);
                     },
                     w1, w2);
}

// wp(z) = z^-2 + sum' [ (z-lambda)^-2 - lambda^-2 ].
inline cplx wp_lattice_sum(cplx w1, cplx w2, cplx z) {
  return 1.0 / (z * z) + detail::box_extrapolated(
                             [z](cplx lam) {
                               const cplx d = z - lam;
                               return 1.0 / (d * d) - 1.0 / (lam * lam);
                             },
                             w1, w2);
}

// wp'(z) = -2 sum over all lattice points (including 0) of (z-lambda)^-3.
inline cplx wp_prime_lattice_sum(cplx w1, cplx w2, cplx z) {
  return -2.0 / (z * z * z) - 2.0 * detail::box_extrapolated(
                                        [z](cplx lam) {
                                          const cplx d = z - lam;
                                          return 1.0 / (d * d * d);
                                        },
                                        w1, w2);
}

// zeta(z) = z^-1 + sum' [ (z-lambda)^-1 + lambda^-1 + z*lambda^-2 ].
inline cplx zeta_lattice_sum(cplx w1, cplx w2, cplx z) {
  return 1.0 / z + detail::box_extrapolated(
                       [z](cplx lam) {
                         return 1.0 / (z - lam) + 1.0 / lam + z / (lam * lam);
                       },
                       w1, w2);
}

// Richardson-extrapolated central finite differences: d^m/dz^m f at z0.
// Step h is halved twice; each halving removes two orders (central stencils
// have even error expansions), giving ~1e-9 accuracy for well-scaled f.
inline cplx central_derivative(const std::function<cplx(cplx)>& f, cplx z0, int order,
                               double h0) {
  auto stencil = [&](double h) -> cplx {
    switch (order) {
      case 1: return (f(z0 + h) - f(z0 - h)) / (2.0 * h);
      case 2: return (f(z0 + h) - 2.0 * f(z0) + f(z0 - h)) / (h * h);
      case 3:
        return (f(z0 + 2.0 * h) - 2.0 * f(z0 + h) + 2.0 * f(z0 - h) - f(z0 - 2.0 * h)) /
               (2.0 * h * h * h);
      case 4:
        return (f(z0 + 2.0 * h) - 4.0 * f(z0 + h) + 6.0 * f(z0) - 4.0 * f(z0 - h) +
                f(z0 - 2.0 * h)) /
               (h * h * h * h);
      case 6:
        return (f(z0 + 3.0 * h) - 6.0 * f(z0 + 2.0 * h) + 15.0 * f(z0 + h) - 20.0 * f(z0) +
                15.0 * f(z0 - h) - 6.0 * f(z0 - 2.0 * h) + f(z0 - 3.0 * h)) /
               std::pow(h, 6);
      default: throw std::invalid_argument("central_derivative: unsupported order");
    }
  };
  // Even error expansion in h^2.  Step ratio 1/sqrt(2) keeps the smallest step
  // at h0/4 (bounding the eps/h^order noise) while five rows of Richardson
  // elimination push the truncation error to O(h^10).
  constexpr int kRows = 6;
  const double rho = 1.0 / std::sqrt(2.0);
  std::array<cplx, kRows> row{};
  for (int i = 0; i < kRows; ++i) row[static_cast<std::size_t>(i)] = stencil(h0 * std::pow(rho, i));
  for (int stage = 1; stage < kRows; ++stage) {
    const double factor = std::pow(2.0, stage);  // rho^(-2*stage)
    for (int i = kRows - 1; i >= stage; --i)
      row[static_cast<std::size_t>(i)] =
          row[static_cast<std::size_t>(i)] +
          (row[static_cast<std::size_t>(i)] - row[static_cast<std::size_t>(i - 1)]) / (factor - 1.0);
  }
  return row[kRows - 1];
}

}  // namespace ellop::oracles

#endif  // ELLOP_TESTS_ORACLES_HPP
