#ifndef ELLOP_ELLIPTIC_HPP
#define ELLOP_ELLIPTIC_HPP

#include <array>
#include <vector>

#include "laurent.hpp"
#include "numutil.hpp"

namespace ellop::elliptic {

// Which Weierstrass function to evaluate / expand.
enum class Special { WP, WP_PRIME, ZETA };

// An elliptic curve realized as C modulo the period lattice 2*omega1*Z + 2*omega2*Z,
// together with its invariants and the reduced basis used for series evaluation.
// Immutable after make_lattice; safe to share across threads.
struct LatticeSpec {
  // Half-periods as supplied (omega2 possibly negated to enforce Im(tau) > 0).
  cplx omega1{};
  cplx omega2{};
  cplx tau{};   // omega2 / omega1, Im > 0
  cplx q{};     // exp(i*pi*tau)

  // Lattice invariants.
  cplx g2{};
  cplx g3{};
  // Quasi-period constants for the half-periods above: zeta(z + 2*omega_i) = zeta(z) + 2*eta_i.
  cplx eta1{};
  cplx eta2{};
  // Branch values e1 = wp(omega1), e2 = wp(omega1 + omega2), e3 = wp(omega2).
  cplx e1{};
  cplx e2{};
  cplx e3{};

  // --- internal evaluation data (reduced basis) ---
  // Full-period basis (B1, B2) with |B1| <= |B2|, |Re(B2/B1)| <= 1/2, Im(B2/B1) > 0,
  // generating the same lattice as (2*omega1, 2*omega2).
  cplx B1{};
  cplx B2{};
  // Integer change of basis: 2*omega1 = U[0][0]*B1 + U[0][1]*B2,
  //                          2*omega2 = U[1][0]*B1 + U[1][1]*B2;  det U = +1.
  std::array<std::array<long long, 2>, 2> U{};
  cplx tau_red{};  // B2/B1
  cplx q2{};       // exp(2*i*pi*tau_red), the expansion variable of all series
  // Quasi-period constants of the reduced half-periods r1 = B1/2, r2 = B2/2.
  cplx eta_r1{};
  cplx eta_r2{};
  // Cached table A[n-1] = q2^n / (1 - q2^n) for the trigonometric series.
  std::vector<cplx> A{};
};

// A point of C reduced modulo the period lattice.
struct TorusPoint {
  cplx z{};               // as supplied
  cplx z_reduced{};       // representative in [0,1)*2*omega1 + [0,1)*2*omega2
  double dist_to_lattice{};  // distance to the nearest lattice point, in units of |B1|
};

// Build the lattice from nonzero half-periods with Im(omega2/omega1) != 0.
// Throws DegenerateLattice when the periods are (numerically) collinear.
LatticeSpec make_lattice(cplx omega1, cplx omega2);

// Distance from z to the nearest lattice point, in units of |B1| (the shortest period).
double dist_to_lattice(const LatticeSpec& L, cplx z);

// Evaluate wp / wp' / zeta at z.  Throws PoleAtLatticePoint when
// dist_to_lattice(L, z) <= 1e-10.
cplx eval_special(const LatticeSpec& L, Special which, cplx z);

// Convenience wrappers.
inline cplx wp(const LatticeSpec& L, cplx z) { return eval_special(L, Special::WP, z); }
inline cplx wp_prime(const LatticeSpec& L, cplx z) { return eval_special(L, Special::WP_PRIME, z); }
inline cplx zeta(const LatticeSpec& L, cplx z) { return eval_special(L, Special::ZETA, z); }

// Truncated expansion of the chosen function around z = 0, keeping powers up to z^hi.
// WP starts at z^-2 (leading 1), WP_PRIME at z^-3 (leading -2), ZETA at z^-1 (leading 1).
// Requires hi >= 2.
LaurentJet laurent_at_origin(const LatticeSpec& L, Special which, int hi);

// Expansion around z = 0 of h_gamma(z) = zeta(z - gamma) - zeta(z), which has a single
// simple pole (residue -1) at the origin in the fundamental cell and value zeta(-gamma)
// plus higher corrections elsewhere.  Requires gamma off the lattice.
LaurentJet laurent_h_gamma(const LatticeSpec& L, cplx gamma, int hi);

// Direct evaluation of h_gamma(z); convenience for basis assembly and tests.
cplx h_gamma(const LatticeSpec& L, cplx gamma, cplx z);

// Reduce z to the fundamental cell spanned by the original periods (floor convention).
TorusPoint reduce(const LatticeSpec& L, cplx z);

}  // namespace ellop::elliptic

#endif  // ELLOP_ELLIPTIC_HPP
