#ifndef ELLOP_CONSTRUCTION_HPP
#define ELLOP_CONSTRUCTION_HPP

#include <cstdint>
#include <string>
#include <utility>

#include "diffop.hpp"
#include "elliptic.hpp"
#include "errors.hpp"
#include "numutil.hpp"

namespace ellop::construction {

using diffop::BandedOp;
using diffop::Seq;
using diffop::Window;

// Input data for the closed-form construction: a lattice, the first marked-point
// track gamma_n (the second is c_sum - gamma_n), the free diagonal sequence v_n,
// and the starting pair (alpha_{1,0}, alpha_{2,0}).
struct InverseData {
  elliptic::LatticeSpec lattice;
  Seq gamma;
  cplx c_sum{0.0, 0.0};
  Seq v;
  std::pair<cplx, cplx> alpha0{};

  cplx gamma2(int n) const { return c_sum - gamma.at(n); }
};

// Non-degeneracy: every gamma_n, gamma_{n+1} +- gamma_n stays at normalized
// lattice distance > 1e-8, gamma and v share a window, and the starting alphas
// are separated.  Throws GammaDegenerate / AlphaCollision / WindowMismatch.
void validate(const InverseData& d);

struct GeneratorParams {
  int n_max = 48;  // data window [0, n_max]
  std::uint64_t seed = 1;
  cplx gamma_star{0.0, 0.0};  // 0 -> auto: 0.27*omega1 + 0.19*omega2
  double rho = 0.0;           // jitter radius; 0 -> auto: 0.05*|omega1|
  double nu = 0.25;           // amplitude of v_n
  std::pair<cplx, cplx> alpha0{{0.7, 0.0}, {-0.4, 0.0}};
};

// Seeded data with per-site rejection so the non-degeneracy margins hold with
// room to spare.  Deterministic for a fixed seed.
InverseData generate_inverse_data(const elliptic::LatticeSpec& lattice, const GeneratorParams& p);

// Recursion for the marked-point weights:
//   alpha_{i,n+1} = -v_{n+1} + (-1)^{i-1} [ zeta(g_{n+1})
//                   + alpha_{1n}/(alpha_{1n}-alpha_{2n}) * zeta(g_{n+1}-g_n)
//                   + alpha_{2n}/(alpha_{1n}-alpha_{2n}) * zeta(g_{n+1}+g_n) ]
// seeded from alpha0 at the window start.  Returns (alpha1, alpha2) on
// [window.lo, upto].
std::pair<Seq, Seq> alpha_recursion(const InverseData& d, int upto);

// c_n = (alpha_{1n}-alpha_{2n})^{-1} [zeta(g_{n+1}-g_n) - zeta(g_{n+1}+g_n) + 2 zeta(g_n)]
cplx coeff_c(const InverseData& d, const std::pair<Seq, Seq>& alphas, int n);

// b_n = 2 wp'(g_n) [wp(g_{n+1}+g_n) - wp(g_{n+1}-g_n)] / [wp'(g_{n+1}+g_n) - wp'(g_{n+1}-g_n)]
cplx coeff_b(const InverseData& d, int n);

// u_n = -[wp(g_{n-1}) + wp(g_{n-2})] + b_{n-1} + b_{n-2}
cplx potential_u(const InverseData& d, int n);

struct DerivedCoefficients {
  Seq alpha1;   // data window
  Seq alpha2;   // data window
  Seq b;        // [lo, hi-1]
  Seq c_coeff;  // [lo, hi-1]
  Seq u;        // [lo+2, hi]
  Window valid_window{};  // sites where the fourth-order operator is fully formed
};

DerivedCoefficients derive(const InverseData& d);

// T + v_n + c_n T^{-1} on the data window (validity stops where c_n does).
BandedOp build_L2(const InverseData& d);

// (L2)^2 + diag(u): bands (2,2), top band identically 1.
BandedOp build_Llambda(const InverseData& d);

struct CommutantResult {
  int basis_dim = 0;            // numerical nullity of X -> [L4, X] over band-(3,3) operators
  double sv_gap = 0.0;          // smallest kept singular value / largest cut one
  double commutator_residual = 0.0;  // |[L4, L6]| / (|L4| |L6|), band max norms
  BandedOp L6;
};

// Nullspace of X -> [L4, X] over band-(3,3) operators; L6 is the nullspace
// element with top band identically -2, remaining mixing with L4 and the
// identity removed by minimizing the cubic-relation misfit.
CommutantResult find_commuting_partner(const BandedOp& L4);

struct CurveFit {
  cplx g2_hat{};
  cplx g3_hat{};
  double residual = 0.0;  // |L6^2 - 4 L4^3 + g2_hat L4 + g3_hat| / |L6^2|, Frobenius
};

// Least squares over (a, b) of |L6^2 - 4 L4^3 + a L4 + b Id| on the interior.
CurveFit fit_spectral_curve(const BandedOp& L4, const BandedOp& L6);

// JSON round-trip for data and derived coefficients (complex as [re, im]).
std::string to_json(const InverseData& d);
InverseData inverse_data_from_json(const std::string& text);
std::string to_json(const DerivedCoefficients& dc);

}  // namespace ellop::construction

#endif  // ELLOP_CONSTRUCTION_HPP
