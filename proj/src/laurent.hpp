#ifndef ELLOP_LAURENT_HPP
#define ELLOP_LAURENT_HPP

#include <algorithm>
#include <cassert>
#include <vector>

#include "errors.hpp"
#include "numutil.hpp"

namespace ellop {

// Truncated Laurent expansion around z = 0: sum of c[i] * z^(lo + i).
// The window [lo, hi] is explicit; arithmetic truncates to the callers' windows.
// The same container doubles as a series in the local inverse coordinate k = 1/z
// (the coefficient of k^p is the coefficient of z^-p), which is how the transfer
// matrix expansions near the marked point are manipulated.
struct LaurentJet {
  int lo = 0;
  std::vector<cplx> c;  // c[i] multiplies z^(lo+i)

  LaurentJet() = default;
  LaurentJet(int lo_in, std::vector<cplx> coeffs) : lo(lo_in), c(std::move(coeffs)) {}

  int hi() const { return lo + static_cast<int>(c.size()) - 1; }
  bool empty() const { return c.empty(); }

  cplx coeff(int power) const {
    if (power < lo || power > hi()) return {0.0, 0.0};
    return c[static_cast<std::size_t>(power - lo)];
  }

  void set_coeff(int power, cplx value) {
    assert(power >= lo && power <= hi());
    c[static_cast<std::size_t>(power - lo)] = value;
  }

  static LaurentJet zero(int lo_in, int hi_in) {
    return LaurentJet(lo_in, std::vector<cplx>(static_cast<std::size_t>(hi_in - lo_in + 1)));
  }

  static LaurentJet constant(cplx value, int hi_in) {
    LaurentJet j = zero(0, std::max(hi_in, 0));
    j.c[0] = value;
    return j;
  }

  // Monomial a * z^p, carrying window [p, hi].
  static LaurentJet monomial(cplx a, int p, int hi_in) {
    LaurentJet j = zero(p, std::max(hi_in, p));
    j.c[0] = a;
    return j;
  }

  // Drop leading/trailing zero coefficients (tightens the window; never widens).
  LaurentJet trimmed(double tol = 0.0) const {
    std::size_t first = 0, last = c.size();
    while (first < last && std::abs(c[first]) <= tol) ++first;
    while (last > first && std::abs(c[last - 1]) <= tol) --last;
    if (first == last) return LaurentJet(0, {});
    return LaurentJet(lo + static_cast<int>(first),
                      std::vector<cplx>(c.begin() + static_cast<std::ptrdiff_t>(first),
                                        c.begin() + static_cast<std::ptrdiff_t>(last)));
  }

  // Restrict to [new_lo, new_hi], zero-filling inside the new window if needed.
  LaurentJet window(int new_lo, int new_hi) const {
    LaurentJet out = zero(new_lo, new_hi);
    for (int p = new_lo; p <= new_hi; ++p) out.set_coeff(p, coeff(p));
    return out;
  }

  // Partial sum evaluated at a point (used for jet-vs-evaluator consistency checks).
  cplx eval(cplx z) const {
    // Horner over ascending powers starting from z^lo.
    cplx acc{0.0, 0.0};
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * z + c[i];
    return acc * std::pow(z, lo);
  }

  double max_abs() const {
    double m = 0.0;
    for (const cplx& v : c) m = std::max(m, std::abs(v));
    return m;
  }
};

inline LaurentJet jet_add(const LaurentJet& a, const LaurentJet& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  const int lo = std::min(a.lo, b.lo);
  const int hi = std::max(a.hi(), b.hi());
  LaurentJet out = LaurentJet::zero(lo, hi);
  for (int p = lo; p <= hi; ++p) out.set_coeff(p, a.coeff(p) + b.coeff(p));
  return out;
}

inline LaurentJet jet_scale(const LaurentJet& a, cplx s) {
  LaurentJet out = a;
  for (cplx& v : out.c) v *= s;
  return out;
}

inline LaurentJet jet_sub(const LaurentJet& a, const LaurentJet& b) {
  return jet_add(a, jet_scale(b, {-1.0, 0.0}));
}

// Product truncated to the window that both factors can support:
// powers up to min(a.hi + b.lo, b.hi + a.lo).  Coefficients beyond that bound
// would need unknown coefficients of a or b, so they are not representable.
inline LaurentJet jet_mul(const LaurentJet& a, const LaurentJet& b) {
  if (a.empty() || b.empty()) return LaurentJet(0, {});
  const int lo = a.lo + b.lo;
  const int hi = std::min(a.hi() + b.lo, b.hi() + a.lo);
  if (hi < lo) return LaurentJet(0, {});
  LaurentJet out = LaurentJet::zero(lo, hi);
  for (int i = 0; i < static_cast<int>(a.c.size()); ++i) {
    const cplx av = a.c[static_cast<std::size_t>(i)];
    if (av == cplx{0.0, 0.0}) continue;
    for (int j = 0; j < static_cast<int>(b.c.size()); ++j) {
      const int p = a.lo + i + b.lo + j;
      if (p > hi) break;
      out.c[static_cast<std::size_t>(p - lo)] += av * b.c[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

// Reciprocal of a jet with nonvanishing leading coefficient, to relative order
// `terms` (output window has `terms` coefficients starting at -a.lo).
inline LaurentJet jet_inverse(const LaurentJet& a_in, int terms) {
  LaurentJet a = a_in.trimmed();
  if (a.empty() || a.c[0] == cplx{0.0, 0.0})
    throw Error(ErrorCode::internal, "jet_inverse: zero leading coefficient");
  LaurentJet out = LaurentJet::zero(-a.lo, -a.lo + terms - 1);
  const cplx lead = a.c[0];
  out.c[0] = 1.0 / lead;
  for (int m = 1; m < terms; ++m) {
    // Coefficient of z^(-a.lo + m) from the convolution (a * out) = 1.
    cplx acc{0.0, 0.0};
    for (int j = 0; j < m; ++j) {
      const cplx aj = a.coeff(a.lo + (m - j));
      if (aj != cplx{0.0, 0.0}) acc += aj * out.c[static_cast<std::size_t>(j)];
    }
    out.c[static_cast<std::size_t>(m)] = -acc / lead;
  }
  return out;
}

// Term-by-term derivative.
inline LaurentJet jet_derivative(const LaurentJet& a) {
  if (a.empty()) return a;
  LaurentJet out = LaurentJet::zero(a.lo - 1, a.hi() - 1);
  for (int p = a.lo; p <= a.hi(); ++p) out.set_coeff(p - 1, a.coeff(p) * static_cast<double>(p));
  return out;
}

}  // namespace ellop

#endif  // ELLOP_LAURENT_HPP
