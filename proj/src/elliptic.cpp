#include "elliptic.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"

namespace ellop::elliptic {

namespace {

constexpr double kSeriesRelTol = 1e-17;  // stop series once terms fall below this fraction
constexpr double kPoleGuard = 1e-10;     // error radius around lattice points, units of |B1|

// Lagrange–Gauss reduction of the basis (B1, B2), tracking the integer matrix U so
// that the original vectors remain expressible as orig_i = U[i][0]*B1 + U[i][1]*B2.
void gauss_reduce(cplx& B1, cplx& B2, std::array<std::array<long long, 2>, 2>& U) {
  U = {{{1, 0}, {0, 1}}};
  for (int iter = 0; iter < 64; ++iter) {
    if (std::abs(B1) > std::abs(B2)) {
      std::swap(B1, B2);
      for (auto& row : U) std::swap(row[0], row[1]);
    }
    // Shear B2 by the nearest-integer multiple of B1.
    const double mu = (B2.real() * B1.real() + B2.imag() * B1.imag()) / std::norm(B1);
    const long long m = std::llround(mu);
    if (m == 0) break;
    B2 -= static_cast<double>(m) * B1;
    for (auto& row : U) row[0] += m * row[1];
  }
  if (std::abs(B1) > std::abs(B2)) {  // one final ordering pass
    std::swap(B1, B2);
    for (auto& row : U) std::swap(row[0], row[1]);
  }
  // Enforce positive orientation of the reduced pair.
  if ((B2 / B1).imag() < 0.0) {
    B2 = -B2;
    for (auto& row : U) row[1] = -row[1];
  }
}

// S_a(x) = sum_{m>=1} m^a x^m / (1 - x^m), the Lambert-type series behind the
// Eisenstein weights.  Adaptive truncation; |x| < 1 is guaranteed upstream.
cplx lambert_sum(int a, cplx x) {
  CompensatedSum sum;
  cplx xm{1.0, 0.0};
  int quiet = 0;
  for (long long m = 1; m < (1LL << 20); ++m) {
    xm *= x;
    double ma = 1.0;
    for (int i = 0; i < a; ++i) ma *= static_cast<double>(m);
    const cplx term = ma * xm / (1.0 - xm);
    sum.add(term);
    if (std::abs(term) < kSeriesRelTol * std::max(1.0, std::abs(sum.value()))) {
      if (++quiet >= 2) return sum.value();
    } else {
      quiet = 0;
    }
  }
  throw DegenerateLattice("quasi-period series did not converge; lattice too thin");
}

struct EisensteinWeights {
  cplx E2, E4, E6;
};

// Normalized Eisenstein series as functions of the squared nome x = exp(2*i*pi*tau).
EisensteinWeights eisenstein(cplx x) {
  return {1.0 - 24.0 * lambert_sum(1, x),
          1.0 + 240.0 * lambert_sum(3, x),
          1.0 - 504.0 * lambert_sum(5, x)};
}

// Solve z = x*B1 + y*B2 for real (x, y).
void lattice_coords(const LatticeSpec& L, cplx z, double& x, double& y) {
  const double det = L.B1.real() * L.B2.imag() - L.B1.imag() * L.B2.real();
  x = (z.real() * L.B2.imag() - z.imag() * L.B2.real()) / det;
  y = (L.B1.real() * z.imag() - L.B1.imag() * z.real()) / det;
}

// Reduce z into the centered cell of the reduced basis: z0 = z - m*B1 - n*B2 with
// coordinates in [-1/2, 1/2].
cplx reduce_centered(const LatticeSpec& L, cplx z, long long& m, long long& n) {
  double x = 0.0, y = 0.0;
  lattice_coords(L, z, x, y);
  m = std::llround(x);
  n = std::llround(y);
  return z - static_cast<double>(m) * L.B1 - static_cast<double>(n) * L.B2;
}

// Series evaluation at a point of the centered cell (no unreduction applied).
cplx series_eval(const LatticeSpec& L, Special which, cplx z0) {
  const cplx r1 = 0.5 * L.B1;
  const cplx pr = kPi / (2.0 * r1);  // pi / B1
  const cplx v = pr * z0;
  const std::size_t terms = L.A.size();

  switch (which) {
    case Special::ZETA: {
      cplx acc = L.eta_r1 * z0 / r1 + pr * std::cos(v) / std::sin(v);
      CompensatedSum tail;
      int quiet = 0;
      for (std::size_t i = 0; i < terms; ++i) {
        const double n1 = static_cast<double>(i + 1);
        const cplx term = L.A[i] * std::sin(2.0 * n1 * v);
        tail.add(term);
        if (std::abs(term) < kSeriesRelTol * std::max(1.0, std::abs(tail.value()))) {
          if (++quiet >= 2) break;
        } else {
          quiet = 0;
        }
      }
      return acc + (2.0 * kPi / r1) * tail.value();
    }
    case Special::WP: {
      const cplx s = std::sin(v);
      cplx acc = -L.eta_r1 / r1 + pr * pr / (s * s);
      CompensatedSum tail;
      int quiet = 0;
      for (std::size_t i = 0; i < terms; ++i) {
        const double n1 = static_cast<double>(i + 1);
        const cplx term = n1 * L.A[i] * std::cos(2.0 * n1 * v);
        tail.add(term);
        if (std::abs(term) < kSeriesRelTol * std::max(1.0, std::abs(tail.value()))) {
          if (++quiet >= 2) break;
        } else {
          quiet = 0;
        }
      }
      return acc - (2.0 * kPi * kPi / (r1 * r1)) * tail.value();
    }
    case Special::WP_PRIME: {
      const cplx s = std::sin(v);
      cplx acc = -2.0 * pr * pr * pr * std::cos(v) / (s * s * s);
      CompensatedSum tail;
      int quiet = 0;
      for (std::size_t i = 0; i < terms; ++i) {
        const double n1 = static_cast<double>(i + 1);
        const cplx term = n1 * n1 * L.A[i] * std::sin(2.0 * n1 * v);
        tail.add(term);
        if (std::abs(term) < kSeriesRelTol * std::max(1.0, std::abs(tail.value()))) {
          if (++quiet >= 2) break;
        } else {
          quiet = 0;
        }
      }
      const cplx pr3 = kPi * kPi * kPi / (r1 * r1 * r1);
      return acc + 2.0 * pr3 * tail.value();
    }
  }
  throw Error(ErrorCode::internal, "series_eval: unknown function selector");
}

// Taylor coefficients a_m of wp(z - gamma) around z = 0, i.e. the expansion of wp at
// the regular point -gamma, driven by the differential equation wp'' = 6 wp^2 - g2/2.
std::vector<cplx> wp_taylor_at(const LatticeSpec& L, cplx minus_gamma, int count) {
  std::vector<cplx> a(static_cast<std::size_t>(std::max(count, 3)));
  a[0] = eval_special(L, Special::WP, minus_gamma);
  a[1] = eval_special(L, Special::WP_PRIME, minus_gamma);
  a[2] = 3.0 * a[0] * a[0] - 0.25 * L.g2;
  for (int m = 1; m + 2 < static_cast<int>(a.size()); ++m) {
    cplx conv{0.0, 0.0};
    for (int j = 0; j <= m; ++j) conv += a[static_cast<std::size_t>(j)] * a[static_cast<std::size_t>(m - j)];
    a[static_cast<std::size_t>(m + 2)] =
        6.0 * conv / static_cast<double>((m + 2) * (m + 1));
  }
  a.resize(static_cast<std::size_t>(count));
  return a;
}

// Coefficients c_k, k = 2..kmax, of wp(z) = z^-2 + sum_{k>=2} c_k z^{2k-2}.
std::vector<cplx> wp_laurent_c(const LatticeSpec& L, int kmax) {
  std::vector<cplx> c(static_cast<std::size_t>(kmax) + 1);
  if (kmax >= 2) c[2] = L.g2 / 20.0;
  if (kmax >= 3) c[3] = L.g3 / 28.0;
  for (int k = 4; k <= kmax; ++k) {
    cplx conv{0.0, 0.0};
    for (int m = 2; m <= k - 2; ++m) conv += c[static_cast<std::size_t>(m)] * c[static_cast<std::size_t>(k - m)];
    c[static_cast<std::size_t>(k)] = 3.0 * conv / static_cast<double>((2 * k + 1) * (k - 3));
  }
  return c;
}

}  // namespace

LatticeSpec make_lattice(cplx omega1, cplx omega2) {
  if (omega1 == cplx{0.0, 0.0} || omega2 == cplx{0.0, 0.0})
    throw DegenerateLattice("half-periods must be nonzero");
  cplx tau = omega2 / omega1;
  if (std::abs(tau.imag()) < 1e-14 * std::max(1.0, std::abs(tau)))
    throw DegenerateLattice("periods are collinear");
  if (tau.imag() < 0.0) {  // same lattice, positive orientation
    omega2 = -omega2;
    tau = -tau;
  }

  LatticeSpec L;
  L.omega1 = omega1;
  L.omega2 = omega2;
  L.tau = tau;
  L.q = std::exp(cplx{0.0, kPi} * tau);

  L.B1 = 2.0 * omega1;
  L.B2 = 2.0 * omega2;
  gauss_reduce(L.B1, L.B2, L.U);
  L.tau_red = L.B2 / L.B1;
  L.q2 = std::exp(cplx{0.0, 2.0 * kPi} * L.tau_red);

  const cplx r1 = 0.5 * L.B1;
  const cplx r2 = 0.5 * L.B2;
  const EisensteinWeights w = eisenstein(L.q2);
  const cplx pi_r1 = kPi / r1;
  L.g2 = pi_r1 * pi_r1 * pi_r1 * pi_r1 * w.E4 / 12.0;
  L.g3 = pi_r1 * pi_r1 * pi_r1 * pi_r1 * pi_r1 * pi_r1 * w.E6 / 216.0;
  L.eta_r1 = kPi * kPi * w.E2 / (12.0 * r1);
  // Independent quasi-period for r2: the basis (B2, -B1) has ratio -1/tau_red, so the
  // same E2 formula applies with the complementary nome.  (Computing it this way keeps
  // the Legendre relation a genuine cross-check rather than an identity by fiat.)
  const cplx q2_dual = std::exp(cplx{0.0, -2.0 * kPi} / L.tau_red);
  L.eta_r2 = kPi * kPi * (1.0 - 24.0 * lambert_sum(1, q2_dual)) / (12.0 * r2);

  // Quasi-periods of the original half-periods, by additivity over the lattice.
  L.eta1 = static_cast<double>(L.U[0][0]) * L.eta_r1 + static_cast<double>(L.U[0][1]) * L.eta_r2;
  L.eta2 = static_cast<double>(L.U[1][0]) * L.eta_r1 + static_cast<double>(L.U[1][1]) * L.eta_r2;

  // Cache A_n = q2^n / (1 - q2^n).  48 entries cover the worst reduced nome
  // (|q2| <= exp(-pi*sqrt(3))) far past double precision.
  L.A.reserve(48);
  cplx q2n{1.0, 0.0};
  for (int n = 1; n <= 48; ++n) {
    q2n *= L.q2;
    if (std::abs(q2n) < 1e-320) break;
    L.A.push_back(q2n / (1.0 - q2n));
  }

  L.e1 = eval_special(L, Special::WP, omega1);
  L.e2 = eval_special(L, Special::WP, omega1 + omega2);
  L.e3 = eval_special(L, Special::WP, omega2);
  return L;
}

double dist_to_lattice(const LatticeSpec& L, cplx z) {
  long long m = 0, n = 0;
  const cplx z0 = reduce_centered(L, z, m, n);
  double best = std::abs(z0);
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      best = std::min(best, std::abs(z0 - static_cast<double>(i) * L.B1 -
                                     static_cast<double>(j) * L.B2));
  return best / std::abs(L.B1);
}

cplx eval_special(const LatticeSpec& L, Special which, cplx z) {
  long long m = 0, n = 0;
  const cplx z0 = reduce_centered(L, z, m, n);
  if (dist_to_lattice(L, z0) <= kPoleGuard)
    throw PoleAtLatticePoint("evaluation within guard radius of a lattice point");
  cplx value = series_eval(L, which, z0);
  if (which == Special::ZETA)
    value += 2.0 * static_cast<double>(m) * L.eta_r1 + 2.0 * static_cast<double>(n) * L.eta_r2;
  return value;
}

LaurentJet laurent_at_origin(const LatticeSpec& L, Special which, int hi) {
  if (hi < 2) throw Error(ErrorCode::internal, "laurent_at_origin: hi must be >= 2");
  // Need c_k up to 2k-2 <= hi+1 to fill every requested slot for all three functions.
  const int kmax = std::max(3, (hi + 3) / 2 + 1);
  const std::vector<cplx> c = wp_laurent_c(L, kmax);
  switch (which) {
    case Special::WP: {
      LaurentJet j = LaurentJet::zero(-2, hi);
      j.set_coeff(-2, {1.0, 0.0});
      for (int k = 2; 2 * k - 2 <= hi; ++k) j.set_coeff(2 * k - 2, c[static_cast<std::size_t>(k)]);
      return j;
    }
    case Special::WP_PRIME: {
      LaurentJet j = LaurentJet::zero(-3, hi);
      j.set_coeff(-3, {-2.0, 0.0});
      for (int k = 2; 2 * k - 3 <= hi; ++k)
        j.set_coeff(2 * k - 3, static_cast<double>(2 * k - 2) * c[static_cast<std::size_t>(k)]);
      return j;
    }
    case Special::ZETA: {
      LaurentJet j = LaurentJet::zero(-1, hi);
      j.set_coeff(-1, {1.0, 0.0});
      for (int k = 2; 2 * k - 1 <= hi; ++k)
        j.set_coeff(2 * k - 1, -c[static_cast<std::size_t>(k)] / static_cast<double>(2 * k - 1));
      return j;
    }
  }
  throw Error(ErrorCode::internal, "laurent_at_origin: unknown function selector");
}

LaurentJet laurent_h_gamma(const LatticeSpec& L, cplx gamma, int hi) {
  if (dist_to_lattice(L, gamma) <= kPoleGuard)
    throw PoleAtLatticePoint("h_gamma: gamma within guard radius of a lattice point");
  // Analytic part: Taylor coefficients of zeta(z - gamma) at z = 0 from the wp series
  // at -gamma, using zeta' = -wp.
  const std::vector<cplx> a = wp_taylor_at(L, -gamma, std::max(hi, 1));
  LaurentJet j = LaurentJet::zero(-1, std::max(hi, 0));
  j.set_coeff(-1, {-1.0, 0.0});  // from -zeta(z)
  j.set_coeff(0, -eval_special(L, Special::ZETA, gamma));
  for (int mth = 1; mth <= hi; ++mth)
    j.set_coeff(mth, -a[static_cast<std::size_t>(mth - 1)] / static_cast<double>(mth));
  // Higher odd corrections of -zeta(z) itself.
  if (hi >= 3) {
    const LaurentJet zj = laurent_at_origin(L, Special::ZETA, hi);
    for (int p = 3; p <= hi; p += 2) j.set_coeff(p, j.coeff(p) - zj.coeff(p));
  }
  return j;
}

cplx h_gamma(const LatticeSpec& L, cplx gamma, cplx z) {
  return eval_special(L, Special::ZETA, z - gamma) - eval_special(L, Special::ZETA, z);
}

TorusPoint reduce(const LatticeSpec& L, cplx z) {
  // Floor-convention coordinates in the original basis.
  const cplx P1 = 2.0 * L.omega1, P2 = 2.0 * L.omega2;
  const double det = P1.real() * P2.imag() - P1.imag() * P2.real();
  const double x = (z.real() * P2.imag() - z.imag() * P2.real()) / det;
  const double y = (P1.real() * z.imag() - P1.imag() * z.real()) / det;
  TorusPoint t;
  t.z = z;
  t.z_reduced = z - std::floor(x) * P1 - std::floor(y) * P2;
  t.dist_to_lattice = dist_to_lattice(L, z);
  return t;
}

}  // namespace ellop::elliptic
