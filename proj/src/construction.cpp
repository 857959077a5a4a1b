#include "construction.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace ellop::construction {

namespace {

using elliptic::LatticeSpec;

// Shared guard: closed-form arguments must stay clear of the lattice.
void check_arg(const LatticeSpec& L, cplx z, const char* what) {
  if (elliptic::dist_to_lattice(L, z) <= 1e-8)
    throw GammaDegenerate(std::string("construction: ") + what + " hits a lattice point");
}

cplx zeta_at(const LatticeSpec& L, cplx z, const char* what) {
  check_arg(L, z, what);
  return elliptic::zeta(L, z);
}

cplx wp_at(const LatticeSpec& L, cplx z, const char* what) {
  check_arg(L, z, what);
  return elliptic::wp(L, z);
}

cplx wpp_at(const LatticeSpec& L, cplx z, const char* what) {
  check_arg(L, z, what);
  return elliptic::wp_prime(L, z);
}

void check_alpha_separation(cplx a1, cplx a2) {
  if (std::abs(a1 - a2) < 1e-12 * std::max(std::abs(a1), 1.0))
    throw AlphaCollision("construction: alpha_1 and alpha_2 collide");
}

}  // namespace

void validate(const InverseData& d) {
  if (!(d.gamma.window == d.v.window))
    throw WindowMismatch("InverseData: gamma and v windows differ");
  const Window w = d.gamma.window;
  for (int n = w.lo; n <= w.hi; ++n) {
    check_arg(d.lattice, d.gamma.at(n), "gamma_n");
    if (n < w.hi) {
      check_arg(d.lattice, d.gamma.at(n + 1) - d.gamma.at(n), "gamma_{n+1}-gamma_n");
      check_arg(d.lattice, d.gamma.at(n + 1) + d.gamma.at(n), "gamma_{n+1}+gamma_n");
    }
  }
  check_alpha_separation(d.alpha0.first, d.alpha0.second);
}

InverseData generate_inverse_data(const LatticeSpec& lattice, const GeneratorParams& p) {
  if (p.n_max < 1) throw ConfigInvalid("generate_inverse_data: n_max must be >= 1");
  const cplx gstar = (p.gamma_star == cplx{0.0, 0.0})
                         ? 0.27 * lattice.omega1 + 0.19 * lattice.omega2
                         : p.gamma_star;
  const double rho = (p.rho == 0.0) ? 0.05 * std::abs(lattice.omega1) : p.rho;
  const double margin = 0.02;

  DetRng rng(p.seed);
  const Window w{0, p.n_max};
  Seq gamma = Seq::zero(w);
  Seq v = Seq::zero(w);
  cplx prev{0.0, 0.0};
  for (int n = w.lo; n <= w.hi; ++n) {
    bool ok = false;
    for (int tries = 0; tries < 500 && !ok; ++tries) {
      const cplx g = gstar + rho * cplx{rng.symmetric(), rng.symmetric()};
      if (elliptic::dist_to_lattice(lattice, g) <= margin) continue;
      if (n > w.lo) {
        if (elliptic::dist_to_lattice(lattice, g - prev) <= margin) continue;
        if (elliptic::dist_to_lattice(lattice, g + prev) <= margin) continue;
      }
      gamma.set(n, g);
      prev = g;
      ok = true;
    }
    if (!ok) throw NonGenericData("generate_inverse_data: rejection sampling failed");
  }
  for (int n = w.lo; n <= w.hi; ++n) v.set(n, p.nu * cplx{rng.symmetric(), rng.symmetric()});

  InverseData d{lattice, std::move(gamma), {0.0, 0.0}, std::move(v), p.alpha0};
  validate(d);
  return d;
}

std::pair<Seq, Seq> alpha_recursion(const InverseData& d, int upto) {
  const Window w = d.gamma.window;
  if (upto < w.lo || upto > w.hi)
    throw IndexOutOfData("alpha_recursion: upto outside the data window");
  Seq a1 = Seq::zero({w.lo, upto});
  Seq a2 = Seq::zero({w.lo, upto});
  a1.set(w.lo, d.alpha0.first);
  a2.set(w.lo, d.alpha0.second);
  for (int n = w.lo; n < upto; ++n) {
    const cplx cur1 = a1.at(n), cur2 = a2.at(n);
    check_alpha_separation(cur1, cur2);
    const cplx inv = 1.0 / (cur1 - cur2);
    const cplx g = d.gamma.at(n), gn = d.gamma.at(n + 1);
    const cplx bracket = zeta_at(d.lattice, gn, "gamma_{n+1}") +
                         cur1 * inv * zeta_at(d.lattice, gn - g, "gamma_{n+1}-gamma_n") +
                         cur2 * inv * zeta_at(d.lattice, gn + g, "gamma_{n+1}+gamma_n");
    const cplx vn1 = d.v.at(n + 1);
    a1.set(n + 1, -vn1 + bracket);
    a2.set(n + 1, -vn1 - bracket);
  }
  return {std::move(a1), std::move(a2)};
}

cplx coeff_c(const InverseData& d, const std::pair<Seq, Seq>& alphas, int n) {
  const cplx a1 = alphas.first.at(n), a2 = alphas.second.at(n);
  check_alpha_separation(a1, a2);
  const cplx g = d.gamma.at(n), gn = d.gamma.at(n + 1);
  return (zeta_at(d.lattice, gn - g, "gamma_{n+1}-gamma_n") -
          zeta_at(d.lattice, gn + g, "gamma_{n+1}+gamma_n") +
          2.0 * zeta_at(d.lattice, g, "gamma_n")) /
         (a1 - a2);
}

cplx coeff_b(const InverseData& d, int n) {
  const cplx g = d.gamma.at(n), gn = d.gamma.at(n + 1);
  const cplx sum = gn + g, dif = gn - g;
  const cplx dp = wp_at(d.lattice, sum, "gamma_{n+1}+gamma_n") -
                  wp_at(d.lattice, dif, "gamma_{n+1}-gamma_n");
  const cplx dq = wpp_at(d.lattice, sum, "gamma_{n+1}+gamma_n") -
                  wpp_at(d.lattice, dif, "gamma_{n+1}-gamma_n");
  const double scale = std::max(std::abs(wpp_at(d.lattice, sum, "gamma_{n+1}+gamma_n")), 1.0);
  if (std::abs(dq) < 1e-12 * scale)
    throw DenominatorCollision("coeff_b: wp' difference vanishes");
  return 2.0 * wpp_at(d.lattice, g, "gamma_n") * dp / dq;
}

cplx potential_u(const InverseData& d, int n) {
  const Window w = d.gamma.window;
  if (n - 2 < w.lo || n > w.hi)
    throw IndexOutOfData("potential_u: need sites n-2 .. n inside the data window");
  return -(wp_at(d.lattice, d.gamma.at(n - 1), "gamma_{n-1}") +
           wp_at(d.lattice, d.gamma.at(n - 2), "gamma_{n-2}")) +
         coeff_b(d, n - 1) + coeff_b(d, n - 2);
}

DerivedCoefficients derive(const InverseData& d) {
  const Window w = d.gamma.window;
  if (w.size() < 5) throw WindowTooSmall("derive: need at least 5 sites");
  auto alphas = alpha_recursion(d, w.hi);
  Seq b = Seq::zero({w.lo, w.hi - 1});
  Seq c = Seq::zero({w.lo, w.hi - 1});
  for (int n = w.lo; n <= w.hi - 1; ++n) {
    b.set(n, coeff_b(d, n));
    c.set(n, coeff_c(d, alphas, n));
  }
  Seq u = Seq::zero({w.lo + 2, w.hi});
  for (int n = w.lo + 2; n <= w.hi; ++n) {
    u.set(n, -(wp_at(d.lattice, d.gamma.at(n - 1), "gamma_{n-1}") +
               wp_at(d.lattice, d.gamma.at(n - 2), "gamma_{n-2}")) +
                 b.at(n - 1) + b.at(n - 2));
  }
  return {std::move(alphas.first), std::move(alphas.second), std::move(b), std::move(c),
          std::move(u), Window{w.lo + 2, w.hi - 2}};
}

BandedOp build_L2(const InverseData& d) {
  const DerivedCoefficients dc = derive(d);
  const Window w = d.gamma.window;
  BandedOp op(w, 1, 1);
  for (int n = w.lo; n <= w.hi; ++n) {
    op.set(1, n, {1.0, 0.0});
    op.set(0, n, d.v.at(n));
    if (n <= w.hi - 1) op.set(-1, n, dc.c_coeff.at(n));
  }
  op.restrict_valid({w.lo, w.hi - 1});
  return op;
}

BandedOp build_Llambda(const InverseData& d) {
  const DerivedCoefficients dc = derive(d);
  const Window w = d.gamma.window;
  BandedOp L2(w, 1, 1);
  for (int n = w.lo; n <= w.hi; ++n) {
    L2.set(1, n, {1.0, 0.0});
    L2.set(0, n, d.v.at(n));
    if (n <= w.hi - 1) L2.set(-1, n, dc.c_coeff.at(n));
  }
  L2.restrict_valid({w.lo, w.hi - 1});

  BandedOp du(w, 0, 0);
  for (int n = w.lo + 2; n <= w.hi; ++n) du.set(0, n, dc.u.at(n));
  du.restrict_valid({w.lo + 2, w.hi});

  const BandedOp sq = diffop::compose(L2, L2);
  return diffop::lincomb({{{1.0, 0.0}, &sq}, {{1.0, 0.0}, &du}});
}

namespace {

// Structural band value: zero outside the operator's band range, stored value
// inside (caller keeps n within the validity region).
cplx band_value(const BandedOp& op, int p, int n) {
  if (p < -op.m_lower() || p > op.n_upper()) return {0.0, 0.0};
  return op.at(p, n);
}

Eigen::VectorXcd vec_on(const BandedOp& op, Window w, int M, int N) {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(M + N + 1) * w.size());
  Eigen::Index idx = 0;
  for (int p = -M; p <= N; ++p)
    for (int n = w.lo; n <= w.hi; ++n) out[idx++] = band_value(op, p, n);
  return out;
}

}  // namespace

CommutantResult find_commuting_partner(const BandedOp& L4) {
  if (L4.m_lower() != 2 || L4.n_upper() != 2)
    throw WindowMismatch("find_commuting_partner: expected a band-(2,2) operator");
  const int a = L4.valid().lo, b = L4.valid().hi;
  const int e_lo = a + 3, e_hi = b - 3;
  if (e_hi - e_lo + 1 < 12)
    throw WindowTooSmall("find_commuting_partner: need >= 12 interior equation sites");
  const int x_lo = a + 1, x_hi = b - 1;
  const int xw = x_hi - x_lo + 1;
  const int cols = 7 * xw;
  const int rows = 11 * (e_hi - e_lo + 1);

  // Matrix of X -> [L4, X] on candidate coefficients X_{p,m}, |p| <= 3.
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(rows, cols);
  const auto col_index = [&](int p, int m) { return (p + 3) * xw + (m - x_lo); };
  int row = 0;
  for (int n = e_lo; n <= e_hi; ++n) {
    for (int r = -5; r <= 5; ++r, ++row) {
      for (int q = -2; q <= 2; ++q) {
        const int pX = r - q;
        if (pX >= -3 && pX <= 3) M(row, col_index(pX, n + q)) += L4.at(q, n);
      }
      for (int q = -3; q <= 3; ++q) {
        const int pL = r - q;
        if (pL >= -2 && pL <= 2) M(row, col_index(q, n)) -= L4.at(pL, n + q);
      }
    }
  }

  Eigen::BDCSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeThinV);
  const Eigen::VectorXd sigma = svd.singularValues();
  const double cut = 1e-9 * sigma[0];
  int nullity = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma[i] < cut) ++nullity;
  double gap = 0.0;
  if (nullity == 0)
    gap = 0.0;
  else if (nullity == sigma.size())
    gap = std::numeric_limits<double>::infinity();
  else {
    const double kept = sigma[sigma.size() - nullity - 1];
    const double dropped = sigma[sigma.size() - nullity];
    gap = dropped > 0.0 ? kept / dropped : std::numeric_limits<double>::infinity();
  }
  if (nullity < 3)
    throw NoPartner("find_commuting_partner: commutant nullity below 3");

  // Combination of nullspace vectors whose top band is identically -2.
  const Eigen::MatrixXcd basis = svd.matrixV().rightCols(nullity);
  Eigen::MatrixXcd top(xw, nullity);
  for (int m = x_lo; m <= x_hi; ++m) top.row(m - x_lo) = basis.row(col_index(3, m));
  const Eigen::VectorXcd target = Eigen::VectorXcd::Constant(xw, cplx{-2.0, 0.0});
  const Eigen::VectorXcd t = top.colPivHouseholderQr().solve(target);
  if ((top * t - target).cwiseAbs().maxCoeff() > 1e-6)
    throw NoPartner("find_commuting_partner: no element with constant top band");

  const Eigen::VectorXcd y0 = basis * t;
  BandedOp Y0(L4.window(), 3, 3);
  for (int p = -3; p <= 3; ++p)
    for (int m = x_lo; m <= x_hi; ++m) Y0.set(p, m, y0[col_index(p, m)]);
  Y0.restrict_valid({x_lo, x_hi});

  // Remove the residual mixing with L4 and the identity: minimize the cubic
  // misfit |Y^2 - 4 L4^3 + A L4 + B| over Y = Y0 + beta L4 + delta Id.
  const BandedOp Id = BandedOp::identity(L4.window());
  const BandedOp L4cube = diffop::compose(L4, diffop::compose(L4, L4));
  const Window interior{a + 4, b - 4};

  cplx beta{0.0, 0.0}, delta{0.0, 0.0}, A{0.0, 0.0}, B{0.0, 0.0};
  {
    cplx num{0.0, 0.0};
    double den = 0.0;
    for (int n = x_lo; n <= x_hi; ++n) {
      num += Y0.at(2, n) * std::conj(L4.at(2, n));
      den += std::norm(L4.at(2, n));
    }
    beta = -num / den;
  }

  const auto make_Y = [&](cplx be, cplx de) {
    return diffop::lincomb({{{1.0, 0.0}, &Y0}, {be, &L4}, {de, &Id}});
  };
  BandedOp Y = make_Y(beta, delta);
  for (int iter = 0; iter < 8; ++iter) {
    const BandedOp Y2 = diffop::compose(Y, Y);
    const BandedOp R = diffop::lincomb(
        {{{1.0, 0.0}, &Y2}, {{-4.0, 0.0}, &L4cube}, {A, &L4}, {B, &Id}});
    const Eigen::VectorXcd rvec = vec_on(R, interior, 6, 6);

    const BandedOp yl = diffop::compose(Y, L4);
    const BandedOp ly = diffop::compose(L4, Y);
    const BandedOp dbeta = diffop::lincomb({{{1.0, 0.0}, &yl}, {{1.0, 0.0}, &ly}});
    Eigen::MatrixXcd J(rvec.size(), 4);
    J.col(0) = vec_on(dbeta, interior, 6, 6);
    J.col(1) = 2.0 * vec_on(Y, interior, 6, 6);
    J.col(2) = vec_on(L4, interior, 6, 6);
    J.col(3) = vec_on(Id, interior, 6, 6);

    const Eigen::VectorXcd step = J.colPivHouseholderQr().solve(-rvec);
    beta += step[0];
    delta += step[1];
    A += step[2];
    B += step[3];
    Y = make_Y(beta, delta);
    if (step.cwiseAbs().maxCoeff() < 1e-14 * (1.0 + std::abs(beta) + std::abs(A))) break;
  }

  const BandedOp comm = diffop::commutator(L4, Y);
  const double denom = diffop::band_residual_norm(L4, L4.valid()) *
                       diffop::band_residual_norm(Y, Y.valid());
  const double resid = diffop::band_residual_norm(comm, comm.valid()) / denom;
  return {nullity, gap, resid, std::move(Y)};
}

CurveFit fit_spectral_curve(const BandedOp& L4, const BandedOp& L6) {
  const BandedOp S = diffop::compose(L6, L6);
  const BandedOp L4cube = diffop::compose(L4, diffop::compose(L4, L4));
  const BandedOp D = diffop::lincomb({{{1.0, 0.0}, &S}, {{-4.0, 0.0}, &L4cube}});
  const Window w = D.valid();
  const int M = D.m_lower(), N = D.n_upper();

  const Eigen::VectorXcd dvec = vec_on(D, w, M, N);
  const Eigen::VectorXcd l4v = vec_on(L4, w, M, N);
  const Eigen::VectorXcd idv = vec_on(BandedOp::identity(L4.window()), w, M, N);

  const double p = l4v.squaredNorm();
  const double r = idv.squaredNorm();
  const cplx q = l4v.dot(idv);  // conj(l4v) . idv
  const double tr = p + r;
  const double det = p * r - std::norm(q);
  const double disc = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
  const double lmax = 0.5 * (tr + disc);
  const double lmin = 0.5 * (tr - disc);
  if (!(lmin > 0.0) || lmax / lmin > 1e12)
    throw IllConditionedFit("fit_spectral_curve: normal system condition exceeds 1e12");

  // Solve the 2x2 normal system G [a; b] = -[l4v^H d; idv^H d].
  const cplx rhs1 = -l4v.dot(dvec);
  const cplx rhs2 = -idv.dot(dvec);
  const cplx gdet = cplx{p, 0.0} * cplx{r, 0.0} - q * std::conj(q);
  const cplx a = (rhs1 * r - q * rhs2) / gdet;
  const cplx b = (cplx{p, 0.0} * rhs2 - std::conj(q) * rhs1) / gdet;

  const double resid = (dvec + a * l4v + b * idv).norm() / vec_on(S, w, M, N).norm();
  return {a, b, resid};
}

namespace {

nlohmann::ordered_json cplx_json(cplx z) { return nlohmann::ordered_json::array({z.real(), z.imag()}); }

nlohmann::ordered_json seq_json(const Seq& s) {
  nlohmann::ordered_json j;
  j["window"] = {{"lo", s.window.lo}, {"hi", s.window.hi}};
  auto vals = nlohmann::ordered_json::array();
  for (int n = s.window.lo; n <= s.window.hi; ++n) vals.push_back(cplx_json(s.at(n)));
  j["values"] = std::move(vals);
  return j;
}

cplx cplx_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigInvalid("expected complex as [re, im]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

Seq seq_from(const nlohmann::json& j) {
  const Window w{j.at("window").at("lo").get<int>(), j.at("window").at("hi").get<int>()};
  const auto& vals = j.at("values");
  if (!vals.is_array() || static_cast<int>(vals.size()) != w.size())
    throw ConfigInvalid("sequence length does not match window");
  Seq s = Seq::zero(w);
  for (int n = w.lo; n <= w.hi; ++n) s.set(n, cplx_from(vals.at(static_cast<std::size_t>(n - w.lo))));
  return s;
}

}  // namespace

std::string to_json(const InverseData& d) {
  nlohmann::ordered_json j;
  j["lattice"] = {{"omega1", cplx_json(d.lattice.omega1)}, {"omega2", cplx_json(d.lattice.omega2)}};
  j["gamma"] = seq_json(d.gamma);
  j["c_sum"] = cplx_json(d.c_sum);
  j["v"] = seq_json(d.v);
  j["alpha0"] = nlohmann::ordered_json::array({cplx_json(d.alpha0.first), cplx_json(d.alpha0.second)});
  return j.dump();
}

InverseData inverse_data_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(std::string("inverse_data_from_json: ") + e.what());
  }
  try {
    const auto& lat = j.at("lattice");
    InverseData d{elliptic::make_lattice(cplx_from(lat.at("omega1")), cplx_from(lat.at("omega2"))),
                  seq_from(j.at("gamma")), cplx_from(j.at("c_sum")), seq_from(j.at("v")),
                  {cplx_from(j.at("alpha0").at(0)), cplx_from(j.at("alpha0").at(1))}};
    validate(d);
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(std::string("inverse_data_from_json: ") + e.what());
  }
}

std::string to_json(const DerivedCoefficients& dc) {
  nlohmann::ordered_json j;
  j["alpha1"] = seq_json(dc.alpha1);
  j["alpha2"] = seq_json(dc.alpha2);
  j["b"] = seq_json(dc.b);
  j["c"] = seq_json(dc.c_coeff);
  j["u"] = seq_json(dc.u);
  j["valid_window"] = {{"lo", dc.valid_window.lo}, {"hi", dc.valid_window.hi}};
  return j.dump();
}

}  // namespace ellop::construction
