#ifndef ELLOP_BAKER_HPP
#define ELLOP_BAKER_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "construction.hpp"
#include "diffop.hpp"
#include "elliptic.hpp"
#include "errors.hpp"
#include "laurent.hpp"
#include "numutil.hpp"

namespace ellop::baker {

using construction::DerivedCoefficients;
using construction::InverseData;
using diffop::BandedOp;
using diffop::Seq;
using diffop::Window;
using elliptic::LatticeSpec;

// Polynomial in the local parameter k, ascending coefficients (c[j] ~ k^j).
struct Poly {
  std::vector<cplx> c;

  static Poly zero() { return {}; }
  static Poly constant(cplx a) { return {{a}}; }
  int degree() const;  // -1 for the zero polynomial
  cplx coeff(int j) const {
    return (j >= 0 && j < static_cast<int>(c.size())) ? c[static_cast<std::size_t>(j)]
                                                      : cplx{0.0, 0.0};
  }
  cplx eval(cplx k) const;
  void trim();
};

Poly operator+(const Poly& a, const Poly& b);
Poly operator-(const Poly& a, const Poly& b);
Poly operator*(const Poly& a, const Poly& b);
Poly operator*(cplx s, const Poly& a);

// 2x2 matrix of k-polynomials.
struct PolyMatrix {
  Poly e[2][2];

  static PolyMatrix identity();
  PolyMatrix operator*(const PolyMatrix& o) const;
  Poly det() const;
  PolyMatrix adjugate() const;
  int col_degree(int j) const;
};

// One-step background factor [[0, 1], [-c_{m+1}, k - v_{m+1}]].
PolyMatrix background_step(const DerivedCoefficients& dc, const Seq& v, int m);

// Psi0_n = chi0_{n-1} ... chi0_0 (identity at n = 0); det = prod c_{m+1}.
PolyMatrix background_transfer(const InverseData& d, const DerivedCoefficients& dc, int n);

// One element of the function space: pole divisor gamma1 + gamma2 + d * P0.
struct RRElement {
  int kind = 0;     // 0: 1, 1: G, 2: h1, 3: wp^a, 4: wp^a * wp'
  int a = 0;        // power of wp for kinds 3, 4
  int pole_order = 0;
  cplx res_g1{0.0, 0.0};
  cplx res_g2{0.0, 0.0};
  LaurentJet jet;  // z-expansion at 0
};

struct RRBasis {
  LatticeSpec lattice;
  cplx gamma1{0.0, 0.0};
  cplx gamma2{0.0, 0.0};
  int d = 0;
  std::vector<RRElement> elems;  // ordered by pole order: 1, G, h1, order-2.., order-d

  cplx eval(int index, cplx z) const;
};

// Basis of the space of functions with at most first-order poles at gamma1,
// gamma2 and a pole of order <= d at 0: {1, G, h1, wp-monomials}, d+2 elements.
// jet_hi sets the top order of the stored z-expansions.
RRBasis rr_basis(const LatticeSpec& L, cplx gamma1, cplx gamma2, int d, int jet_hi);

struct BAFunction {
  int n = 0;
  int d1 = 0;  // pole order at 0 of component 1 (= column-1 degree of Psi0_n)
  int d2 = 0;
  std::vector<cplx> coeff1;  // over basis elements with pole order <= d1
  std::vector<cplx> coeff2;
  std::vector<std::array<cplx, 2>> eta;  // eta[p], p = 0..K: psi = [sum eta_p k^-p] Psi0_n
  double solve_residual = 0.0;
  double uniqueness_gap = 0.0;
};

// Solve for the two-component function psi_n: first-order poles at gamma1/2
// with linked residues (res psi^2 = alpha_s res psi^1), pole orders at 0 given
// by the background column degrees, and psi * (Psi0_n)^{-1} = eta0 + O(k^{-1}).
// The basis must be built with d >= n and jets deep enough for K_tail.
BAFunction solve_ba(const InverseData& d, const DerivedCoefficients& dc, const RRBasis& basis,
                    int n, std::array<cplx, 2> eta0, int K_tail);

// Pointwise evaluation of a solved component (comp = 1 or 2).
cplx ba_eval(const RRBasis& basis, const BAFunction& psi, int comp, cplx z);

// Seeded sample points in the fundamental cell, clear of the lattice, both
// marked points, and their negatives.
std::vector<cplx> make_samples(const LatticeSpec& L, cplx gamma1, cplx gamma2, int count,
                               std::uint64_t seed);

struct OperatorFit {
  BandedOp op;
  std::vector<double> site_residual;  // aligned with op.valid()
  double max_residual = 0.0;
  double worst_condition = 0.0;
};

// Per-site least squares for the banded operator with L psi_n = f psi_n over
// the sample set and both components; family[i] solves site family_lo + i.
OperatorFit fit_operator(const RRBasis& basis, const std::vector<BAFunction>& family,
                         int family_lo, elliptic::Special f, const std::vector<cplx>& samples,
                         int m_lower, int n_upper);

// max over samples, sites, components of |(L psi)_n(z) - f(z) psi_n(z)| / (1 + |f(z) psi_n(z)|)
double eigen_residual(const RRBasis& basis, const BandedOp& L,
                      const std::vector<BAFunction>& family, int family_lo, elliptic::Special f,
                      const std::vector<cplx>& samples);

}  // namespace ellop::baker

#endif  // ELLOP_BAKER_HPP
