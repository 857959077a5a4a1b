#include "baker.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace ellop::baker {

int Poly::degree() const {
  for (int j = static_cast<int>(c.size()) - 1; j >= 0; --j)
    if (c[static_cast<std::size_t>(j)] != cplx{0.0, 0.0}) return j;
  return -1;
}

cplx Poly::eval(cplx k) const {
  cplx acc{0.0, 0.0};
  for (int j = static_cast<int>(c.size()) - 1; j >= 0; --j)
    acc = acc * k + c[static_cast<std::size_t>(j)];
  return acc;
}

void Poly::trim() {
  while (!c.empty() && c.back() == cplx{0.0, 0.0}) c.pop_back();
}

Poly operator+(const Poly& a, const Poly& b) {
  Poly r;
  r.c.resize(std::max(a.c.size(), b.c.size()), cplx{0.0, 0.0});
  for (std::size_t j = 0; j < r.c.size(); ++j) r.c[j] = a.coeff(static_cast<int>(j)) + b.coeff(static_cast<int>(j));
  r.trim();
  return r;
}

Poly operator-(const Poly& a, const Poly& b) {
  Poly r;
  r.c.resize(std::max(a.c.size(), b.c.size()), cplx{0.0, 0.0});
  for (std::size_t j = 0; j < r.c.size(); ++j) r.c[j] = a.coeff(static_cast<int>(j)) - b.coeff(static_cast<int>(j));
  r.trim();
  return r;
}

Poly operator*(const Poly& a, const Poly& b) {
  if (a.c.empty() || b.c.empty()) return Poly::zero();
  Poly r;
  r.c.assign(a.c.size() + b.c.size() - 1, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < a.c.size(); ++i)
    for (std::size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
  r.trim();
  return r;
}

Poly operator*(cplx s, const Poly& a) {
  Poly r = a;
  for (auto& x : r.c) x *= s;
  r.trim();
  return r;
}

PolyMatrix PolyMatrix::identity() {
  PolyMatrix m;
  m.e[0][0] = Poly::constant({1.0, 0.0});
  m.e[1][1] = Poly::constant({1.0, 0.0});
  return m;
}

PolyMatrix PolyMatrix::operator*(const PolyMatrix& o) const {
  PolyMatrix r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r.e[i][j] = e[i][0] * o.e[0][j] + e[i][1] * o.e[1][j];
  return r;
}

Poly PolyMatrix::det() const { return e[0][0] * e[1][1] - e[0][1] * e[1][0]; }

PolyMatrix PolyMatrix::adjugate() const {
  PolyMatrix r;
  r.e[0][0] = e[1][1];
  r.e[0][1] = cplx{-1.0, 0.0} * e[0][1];
  r.e[1][0] = cplx{-1.0, 0.0} * e[1][0];
  r.e[1][1] = e[0][0];
  return r;
}

int PolyMatrix::col_degree(int j) const {
  return std::max(e[0][j].degree(), e[1][j].degree());
}

PolyMatrix background_step(const DerivedCoefficients& dc, const Seq& v, int m) {
  PolyMatrix chi;
  chi.e[0][1] = Poly::constant({1.0, 0.0});
  chi.e[1][0] = Poly::constant(-dc.c_coeff.at(m + 1));
  chi.e[1][1] = Poly{{-v.at(m + 1), {1.0, 0.0}}};
  return chi;
}

PolyMatrix background_transfer(const InverseData& d, const DerivedCoefficients& dc, int n) {
  if (n < 0) throw IndexOutOfData("background_transfer: n must be >= 0");
  if (n > 0 && (dc.c_coeff.window.lo > 1 || dc.c_coeff.window.hi < n || d.v.window.lo > 1 ||
                d.v.window.hi < n))
    throw IndexOutOfData("background_transfer: step coefficients c_1..c_n, v_1..v_n not all available");
  PolyMatrix psi = PolyMatrix::identity();
  for (int m = 0; m < n; ++m) psi = background_step(dc, d.v, m) * psi;
  return psi;
}

cplx RRBasis::eval(int index, cplx z) const {
  const RRElement& el = elems.at(static_cast<std::size_t>(index));
  switch (el.kind) {
    case 0:
      return {1.0, 0.0};
    case 1:
      return elliptic::zeta(lattice, z - gamma1) - elliptic::zeta(lattice, z - gamma2);
    case 2:
      return elliptic::zeta(lattice, z - gamma1) - elliptic::zeta(lattice, z);
    case 3: {
      const cplx w = elliptic::wp(lattice, z);
      cplx acc{1.0, 0.0};
      for (int i = 0; i < el.a; ++i) acc *= w;
      return acc;
    }
    case 4: {
      const cplx w = elliptic::wp(lattice, z);
      cplx acc = elliptic::wp_prime(lattice, z);
      for (int i = 0; i < el.a; ++i) acc *= w;
      return acc;
    }
    default:
      throw Error(ErrorCode::internal, "RRBasis::eval: unknown element kind");
  }
}

RRBasis rr_basis(const LatticeSpec& L, cplx gamma1, cplx gamma2, int d, int jet_hi) {
  if (d < 0) throw ConfigInvalid("rr_basis: d must be >= 0");
  if (elliptic::dist_to_lattice(L, gamma1) <= 1e-8 || elliptic::dist_to_lattice(L, gamma2) <= 1e-8 ||
      elliptic::dist_to_lattice(L, gamma1 - gamma2) <= 1e-8)
    throw GammaDegenerate("rr_basis: marked points degenerate");

  RRBasis basis{L, gamma1, gamma2, d, {}};
  const LaurentJet h1 = elliptic::laurent_h_gamma(L, gamma1, jet_hi);
  const LaurentJet h2 = elliptic::laurent_h_gamma(L, gamma2, jet_hi);

  RRElement one;
  one.kind = 0;
  one.pole_order = 0;
  one.jet = LaurentJet::constant({1.0, 0.0}, jet_hi);
  basis.elems.push_back(one);

  RRElement G;
  G.kind = 1;
  G.pole_order = 0;
  G.res_g1 = {1.0, 0.0};
  G.res_g2 = {-1.0, 0.0};
  // The z^-1 coefficients of the two h-jets are both exactly -1, so the
  // difference is pole-free and the window restriction below is lossless.
  G.jet = jet_sub(h1, h2).window(0, jet_hi);
  basis.elems.push_back(G);

  if (d >= 1) {
    RRElement h;
    h.kind = 2;
    h.pole_order = 1;
    h.res_g1 = {1.0, 0.0};
    h.jet = h1;
    basis.elems.push_back(h);
  }

  // Each jet_mul by the wp jet trims the representable top order, so the base
  // jets are built deep enough that every monomial still reaches jet_hi.
  const int deep = jet_hi + 3 * std::max(d, 2) + 6;
  const LaurentJet wp_jet = elliptic::laurent_at_origin(L, elliptic::Special::WP, deep);
  const LaurentJet wpp_jet = elliptic::laurent_at_origin(L, elliptic::Special::WP_PRIME, deep);
  for (int order = 2; order <= d; ++order) {
    RRElement el;
    el.pole_order = order;
    LaurentJet jet;
    if (order % 2 == 0) {
      el.kind = 3;
      el.a = order / 2;
      jet = wp_jet;
      for (int i = 1; i < el.a; ++i) jet = jet_mul(jet, wp_jet);
    } else {
      el.kind = 4;
      el.a = (order - 3) / 2;
      jet = wpp_jet;
      for (int i = 0; i < el.a; ++i) jet = jet_mul(jet, wp_jet);
    }
    if (jet.lo != -order || jet.hi() < jet_hi)
      throw Error(ErrorCode::internal, "rr_basis: monomial jet window shortfall");
    el.jet = jet.window(-order, jet_hi);
    basis.elems.push_back(el);
  }

  if (static_cast<int>(basis.elems.size()) != d + 2)
    throw Error(ErrorCode::internal, "rr_basis: element count mismatch");
  return basis;
}

namespace {

// k-power coefficient of (jet * poly-in-k): coeff_{k^p} = sum_m poly[m] * jet.coeff(z^{m-p}).
cplx jet_poly_kcoeff(const LaurentJet& jet, const Poly& poly, int p) {
  cplx acc{0.0, 0.0};
  for (int m = 0; m <= poly.degree(); ++m) {
    const int zpow = m - p;
    if (zpow >= jet.lo && zpow <= jet.hi()) acc += poly.coeff(m) * jet.coeff(zpow);
  }
  return acc;
}

}  // namespace

BAFunction solve_ba(const InverseData& d, const DerivedCoefficients& dc, const RRBasis& basis,
                    int n, std::array<cplx, 2> eta0, int K_tail) {
  const PolyMatrix psi0 = background_transfer(d, dc, n);
  const PolyMatrix adj = psi0.adjugate();
  // det Psi0_n = prod_{m=1}^{n} c_m exactly (each step factor has det c_{m+1});
  // the polynomial det only recovers this up to rounding dust in the higher
  // k-coefficients, so the product form is used directly.
  cplx det{1.0, 0.0};
  for (int m = 1; m <= n; ++m) det *= dc.c_coeff.at(m);
  {
    const Poly detp = psi0.det();
    double worst = 0.0;
    for (int j = 1; j <= detp.degree(); ++j) worst = std::max(worst, std::abs(detp.coeff(j)));
    if (std::abs(detp.coeff(0) - det) + worst > 1e-10 * (1.0 + std::abs(det)))
      throw Error(ErrorCode::internal, "solve_ba: background determinant mismatch");
  }

  const int d1 = std::max(psi0.col_degree(0), 0);
  const int d2 = std::max(psi0.col_degree(1), 0);
  const int dmax = std::max(d1, d2);
  if (basis.d < dmax)
    throw ConfigInvalid("solve_ba: basis pole order too small for this site");
  if (K_tail < dmax + 8)
    throw ConfigInvalid("solve_ba: K_tail below max column degree + 8");
  const int jet_top = basis.elems.front().jet.hi();  // uniform across elements
  if (jet_top < dmax)
    throw ConfigInvalid("solve_ba: basis jets too shallow for this site");

  // Unknown layout: component 1 over basis elements with pole_order <= d1,
  // then component 2 over pole_order <= d2.
  std::vector<int> idx1, idx2;
  for (int e = 0; e < static_cast<int>(basis.elems.size()); ++e) {
    if (basis.elems[static_cast<std::size_t>(e)].pole_order <= d1) idx1.push_back(e);
    if (basis.elems[static_cast<std::size_t>(e)].pole_order <= d2) idx2.push_back(e);
  }
  const int n1 = static_cast<int>(idx1.size());
  const int n2 = static_cast<int>(idx2.size());
  const int cols = n1 + n2;

  // Rows: residue links at gamma1, gamma2, then Laurent matching of
  // psi * adj(Psi0) at k^p for p = K_tail..1 (both columns), then k^0 = eta0 * det.
  const int rows = 2 + 2 * (K_tail + 1);
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(rows, cols);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(rows);

  const cplx alpha1 = d.alpha0.first, alpha2 = d.alpha0.second;
  for (int t = 0; t < n1; ++t) {
    const RRElement& el = basis.elems[static_cast<std::size_t>(idx1[static_cast<std::size_t>(t)])];
    A(0, t) -= alpha1 * el.res_g1;
    A(1, t) -= alpha2 * el.res_g2;
  }
  for (int t = 0; t < n2; ++t) {
    const RRElement& el = basis.elems[static_cast<std::size_t>(idx2[static_cast<std::size_t>(t)])];
    A(0, n1 + t) += el.res_g1;
    A(1, n1 + t) += el.res_g2;
  }

  int row = 2;
  for (int p = K_tail; p >= 0; --p) {
    for (int j = 0; j < 2; ++j, ++row) {
      for (int t = 0; t < n1; ++t) {
        const LaurentJet& jet = basis.elems[static_cast<std::size_t>(idx1[static_cast<std::size_t>(t)])].jet;
        A(row, t) = jet_poly_kcoeff(jet, adj.e[0][j], p);
      }
      for (int t = 0; t < n2; ++t) {
        const LaurentJet& jet = basis.elems[static_cast<std::size_t>(idx2[static_cast<std::size_t>(t)])].jet;
        A(row, n1 + t) = jet_poly_kcoeff(jet, adj.e[1][j], p);
      }
      if (p == 0) rhs(row) = eta0[static_cast<std::size_t>(j)] * det;
    }
  }

  // Drop identically zero rows, then equilibrate the rest.
  std::vector<int> keep;
  for (int r = 0; r < rows; ++r) {
    const double m = A.row(r).cwiseAbs().maxCoeff();
    if (m > 0.0 || std::abs(rhs(r)) > 0.0) keep.push_back(r);
  }
  Eigen::MatrixXcd Ak(static_cast<Eigen::Index>(keep.size()), cols);
  Eigen::VectorXcd bk(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const double m = std::max(A.row(keep[r]).cwiseAbs().maxCoeff(), std::abs(rhs(keep[r])));
    Ak.row(static_cast<Eigen::Index>(r)) = A.row(keep[r]) / m;
    bk(static_cast<Eigen::Index>(r)) = rhs(keep[r]) / m;
  }
  // Column equilibration so that rank decisions are not dominated by the wide
  // magnitude spread across basis elements.
  Eigen::VectorXd cscale(cols);
  for (int j = 0; j < cols; ++j) {
    const double m = Ak.col(j).cwiseAbs().maxCoeff();
    cscale(j) = m > 0.0 ? m : 1.0;
    Ak.col(j) /= cscale(j);
  }

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Ak, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sigma = svd.singularValues();
  const double smax = sigma[0];
  int nullity = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma[i] < 1e-9 * smax) ++nullity;
  if (nullity != 0)
    throw NonGenericData("solve_ba: homogeneous kernel detected (non-generic data)");
  const double gap = sigma[sigma.size() - 1] / (2.220446049250313e-16 * smax);

  Eigen::VectorXcd x = svd.solve(bk);
  const double resid = (Ak * x - bk).cwiseAbs().maxCoeff();
  if (resid > 1e-8)
    throw NonGenericData("solve_ba: least-squares residual above 1e-8");
  for (int j = 0; j < cols; ++j) x(j) /= cscale(j);

  BAFunction out;
  out.n = n;
  out.d1 = d1;
  out.d2 = d2;
  out.coeff1.assign(static_cast<std::size_t>(n1), cplx{0.0, 0.0});
  out.coeff2.assign(static_cast<std::size_t>(n2), cplx{0.0, 0.0});
  for (int t = 0; t < n1; ++t) out.coeff1[static_cast<std::size_t>(t)] = x(t);
  for (int t = 0; t < n2; ++t) out.coeff2[static_cast<std::size_t>(t)] = x(n1 + t);
  out.solve_residual = resid;
  out.uniqueness_gap = gap;

  // eta_p from the matched jet phi = psi * adj / det.  Coefficient p draws on
  // z-powers up to deg(adj) + p <= dmax + p, so only p <= jet_top - dmax is exact.
  const int K = jet_top - dmax;
  out.eta.assign(static_cast<std::size_t>(K + 1), {cplx{0.0, 0.0}, cplx{0.0, 0.0}});
  for (int p = 0; p <= K; ++p) {
    for (int j = 0; j < 2; ++j) {
      cplx acc{0.0, 0.0};
      for (int t = 0; t < n1; ++t)
        acc += out.coeff1[static_cast<std::size_t>(t)] *
               jet_poly_kcoeff(basis.elems[static_cast<std::size_t>(idx1[static_cast<std::size_t>(t)])].jet,
                               adj.e[0][j], -p);
      for (int t = 0; t < n2; ++t)
        acc += out.coeff2[static_cast<std::size_t>(t)] *
               jet_poly_kcoeff(basis.elems[static_cast<std::size_t>(idx2[static_cast<std::size_t>(t)])].jet,
                               adj.e[1][j], -p);
      out.eta[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)] = acc / det;
    }
  }
  return out;
}

cplx ba_eval(const RRBasis& basis, const BAFunction& psi, int comp, cplx z) {
  const std::vector<cplx>& coeff = comp == 1 ? psi.coeff1 : psi.coeff2;
  cplx acc{0.0, 0.0};
  for (std::size_t t = 0; t < coeff.size(); ++t)
    acc += coeff[t] * basis.eval(static_cast<int>(t), z);
  return acc;
}

std::vector<cplx> make_samples(const LatticeSpec& L, cplx gamma1, cplx gamma2, int count,
                               std::uint64_t seed) {
  DetRng rng(seed);
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(count));
  int guard = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++guard > 10000) throw NonGenericData("make_samples: rejection sampling failed");
    const double a = 0.08 + 0.84 * rng.uniform();
    const double b = 0.08 + 0.84 * rng.uniform();
    const cplx z = a * (2.0 * L.omega1) + b * (2.0 * L.omega2);
    if (elliptic::dist_to_lattice(L, z) < 0.05) continue;
    if (elliptic::dist_to_lattice(L, z - gamma1) < 0.05) continue;
    if (elliptic::dist_to_lattice(L, z - gamma2) < 0.05) continue;
    if (elliptic::dist_to_lattice(L, z + gamma1) < 0.05) continue;
    if (elliptic::dist_to_lattice(L, z + gamma2) < 0.05) continue;
    out.push_back(z);
  }
  return out;
}

OperatorFit fit_operator(const RRBasis& basis, const std::vector<BAFunction>& family,
                         int family_lo, elliptic::Special f, const std::vector<cplx>& samples,
                         int m_lower, int n_upper) {
  const int M = m_lower, N = n_upper;
  const int fam_hi = family_lo + static_cast<int>(family.size()) - 1;
  const int bw = M + N + 1;
  if (static_cast<int>(samples.size()) < 3 * bw)
    throw ConfigInvalid("fit_operator: need at least 3 (M+N+1) samples");
  if (fam_hi - family_lo + 1 < bw + 1)
    throw WindowTooSmall("fit_operator: family shorter than the bandwidth");

  // Cache psi values and f values at the samples.
  const int S = static_cast<int>(samples.size());
  std::vector<std::array<std::vector<cplx>, 2>> vals(family.size());
  for (std::size_t i = 0; i < family.size(); ++i)
    for (int comp = 1; comp <= 2; ++comp) {
      auto& v = vals[i][static_cast<std::size_t>(comp - 1)];
      v.resize(static_cast<std::size_t>(S));
      for (int s = 0; s < S; ++s) v[static_cast<std::size_t>(s)] = ba_eval(basis, family[i], comp, samples[static_cast<std::size_t>(s)]);
    }
  std::vector<cplx> fvals(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s)
    fvals[static_cast<std::size_t>(s)] = elliptic::eval_special(basis.lattice, f, samples[static_cast<std::size_t>(s)]);

  const Window w{family_lo, fam_hi};
  BandedOp op(w, M, N);
  const Window valid{family_lo + M, fam_hi - N};
  if (valid.lo > valid.hi) throw WindowTooSmall("fit_operator: no interior sites");
  op.restrict_valid(valid);

  OperatorFit out{std::move(op), {}, 0.0, 0.0};
  out.site_residual.resize(static_cast<std::size_t>(valid.size()), 0.0);

  for (int site = valid.lo; site <= valid.hi; ++site) {
    Eigen::MatrixXcd A(2 * S, bw);
    Eigen::VectorXcd b(2 * S);
    for (int s = 0; s < S; ++s)
      for (int comp = 0; comp < 2; ++comp) {
        const int r = 2 * s + comp;
        for (int p = -M; p <= N; ++p)
          A(r, p + M) = vals[static_cast<std::size_t>(site + p - family_lo)][static_cast<std::size_t>(comp)][static_cast<std::size_t>(s)];
        b(r) = fvals[static_cast<std::size_t>(s)] *
               vals[static_cast<std::size_t>(site - family_lo)][static_cast<std::size_t>(comp)][static_cast<std::size_t>(s)];
      }
    // Column equilibration, then SVD least squares.
    Eigen::VectorXd cscale(bw);
    for (int cidx = 0; cidx < bw; ++cidx) {
      const double m = A.col(cidx).cwiseAbs().maxCoeff();
      cscale(cidx) = m > 0.0 ? m : 1.0;
      A.col(cidx) /= cscale(cidx);
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double cond = svd.singularValues()(0) / svd.singularValues()(bw - 1);
    out.worst_condition = std::max(out.worst_condition, cond);
    if (cond > 1e12) throw RankDeficientFit("fit_operator: sample matrix condition exceeds 1e12");
    const Eigen::VectorXcd y = svd.solve(b);
    double scale = b.cwiseAbs().maxCoeff();
    const double resid = (A * y - b).cwiseAbs().maxCoeff() / (1.0 + scale);
    out.site_residual[static_cast<std::size_t>(site - valid.lo)] = resid;
    out.max_residual = std::max(out.max_residual, resid);
    for (int p = -M; p <= N; ++p) out.op.set(p, site, y(p + M) / cscale(p + M));
  }
  return out;
}

double eigen_residual(const RRBasis& basis, const BandedOp& L,
                      const std::vector<BAFunction>& family, int family_lo,
                      elliptic::Special f, const std::vector<cplx>& samples) {
  const int fam_hi = family_lo + static_cast<int>(family.size()) - 1;
  const int lo = std::max(L.valid().lo, family_lo + L.m_lower());
  const int hi = std::min(L.valid().hi, fam_hi - L.n_upper());
  if (lo > hi) throw WindowTooSmall("eigen_residual: no usable sites");
  double worst = 0.0;
  for (const cplx z : samples) {
    const cplx fz = elliptic::eval_special(basis.lattice, f, z);
    for (int n = lo; n <= hi; ++n)
      for (int comp = 1; comp <= 2; ++comp) {
        cplx acc{0.0, 0.0};
        for (int p = -L.m_lower(); p <= L.n_upper(); ++p)
          acc += L.at(p, n) * ba_eval(basis, family[static_cast<std::size_t>(n + p - family_lo)], comp, z);
        const cplx want = fz * ba_eval(basis, family[static_cast<std::size_t>(n - family_lo)], comp, z);
        worst = std::max(worst, std::abs(acc - want) / (1.0 + std::abs(want)));
      }
  }
  return worst;
}

}  // namespace ellop::baker
