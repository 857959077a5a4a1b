#ifndef ELLOP_NUMUTIL_HPP
#define ELLOP_NUMUTIL_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

namespace ellop {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Kahan-compensated accumulator for complex sums whose terms span many magnitudes.
class CompensatedSum {
public:
  void add(cplx term) {
    const cplx y = term - carry_;
    const cplx t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  cplx value() const { return sum_; }

private:
  cplx sum_{0.0, 0.0};
  cplx carry_{0.0, 0.0};
};

// Deterministic uniform generator: mt19937_64 is fully specified by the standard, and the
// mapping below avoids std::uniform_real_distribution (whose output is implementation
// defined).  Reproducibility across platforms is a hard output requirement.
class DetRng {
public:
  explicit DetRng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [0, 1) with 53 significant bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform in [-1, 1).
  double symmetric() { return 2.0 * uniform() - 1.0; }

  cplx disc() {
    // Rejection-sample the unit disc; deterministic given the seed.
    for (;;) {
      const double x = symmetric();
      const double y = symmetric();
      if (x * x + y * y <= 1.0) return {x, y};
    }
  }

private:
  std::mt19937_64 eng_;
};

// Format a double with 17 significant digits (round-trip exact for IEEE binary64).
inline std::string format_sig17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline double rel_err(cplx got, cplx want) {
  const double scale = std::abs(want);
  const double err = std::abs(got - want);
  return scale > 0 ? err / scale : err;
}

// |got - want| measured against max(|want|, floor); used when `want` may vanish.
inline double scaled_err(cplx got, cplx want, double floor_scale) {
  return std::abs(got - want) / std::max(std::abs(want), floor_scale);
}

}  // namespace ellop

#endif  // ELLOP_NUMUTIL_HPP
