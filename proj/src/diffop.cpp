#include "diffop.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "json.hpp"

namespace ellop::diffop {

Seq apply(const BandedOp& op, const Seq& s) {
  const Window out{s.window.lo + op.m_lower(), s.window.hi - op.n_upper()};
  if (out.lo > out.hi)
    throw WindowTooSmall("apply: sequence window shorter than operator bandwidth");
  Seq r = Seq::zero(out);
  for (int n = out.lo; n <= out.hi; ++n) {
    if (!op.valid().contains(n))
      throw OutOfWindow("apply: result site outside operator validity region");
    cplx acc{0.0, 0.0};
    for (int p = -op.m_lower(); p <= op.n_upper(); ++p) acc += op.at(p, n) * s.at(n + p);
    r.set(n, acc);
  }
  return r;
}

BandedOp compose(const BandedOp& A, const BandedOp& B) {
  if (!(A.window() == B.window()))
    throw WindowMismatch("compose: operands live on different windows");
  const int MA = A.m_lower(), NA = A.n_upper();
  const int MB = B.m_lower(), NB = B.n_upper();
  BandedOp r(A.window(), MA + MB, NA + NB);
  // Site n of the product reads B at n - MA .. n + NA.
  const Window valid{std::max(A.valid().lo, B.valid().lo + MA),
                     std::min(A.valid().hi, B.valid().hi - NA)};
  if (valid.lo > valid.hi)
    throw WindowTooSmall("compose: no site sees both operands' coefficients");
  r.restrict_valid(valid);
  for (int n = valid.lo; n <= valid.hi; ++n) {
    for (int p = -(MA + MB); p <= NA + NB; ++p) {
      cplx acc{0.0, 0.0};
      const int q_lo = std::max(-MA, p - NB);
      const int q_hi = std::min(NA, p + MB);
      for (int q = q_lo; q <= q_hi; ++q) acc += A.at(q, n) * B.at(p - q, n + q);
      r.set(p, n, acc);
    }
  }
  return r;
}

BandedOp lincomb(const std::vector<std::pair<cplx, const BandedOp*>>& terms) {
  if (terms.empty()) throw WindowMismatch("lincomb: no terms");
  const Window w = terms.front().second->window();
  int M = 0, N = 0;
  Window valid = terms.front().second->valid();
  for (const auto& [scalar, op] : terms) {
    (void)scalar;
    if (!(op->window() == w)) throw WindowMismatch("lincomb: operands live on different windows");
    M = std::max(M, op->m_lower());
    N = std::max(N, op->n_upper());
    valid.lo = std::max(valid.lo, op->valid().lo);
    valid.hi = std::min(valid.hi, op->valid().hi);
  }
  if (valid.lo > valid.hi) throw WindowTooSmall("lincomb: validity regions do not overlap");
  BandedOp r(w, M, N);
  r.restrict_valid(valid);
  for (const auto& [scalar, op] : terms)
    for (int p = -op->m_lower(); p <= op->n_upper(); ++p)
      for (int n = valid.lo; n <= valid.hi; ++n)
        r.set(p, n, r.at(p, n) + scalar * op->at(p, n));
  return r;
}

BandedOp commutator(const BandedOp& A, const BandedOp& B) {
  const BandedOp ab = compose(A, B);
  const BandedOp ba = compose(B, A);
  return lincomb({{{1.0, 0.0}, &ab}, {{-1.0, 0.0}, &ba}});
}

double band_residual_norm(const BandedOp& op, Window sub) {
  if (!op.valid().contains(sub))
    throw OutOfWindow("band_residual_norm: subwindow escapes the validity region");
  double norm = 0.0;
  for (int p = -op.m_lower(); p <= op.n_upper(); ++p)
    for (int n = sub.lo; n <= sub.hi; ++n) norm = std::max(norm, std::abs(op.at(p, n)));
  return norm;
}

std::optional<Seq> symmetrizable_weights(const BandedOp& op) {
  if (op.m_lower() != op.n_upper())
    throw NotSquareBands("symmetrizable_weights: band counts differ");
  const int M = op.m_lower();
  const Window v = op.valid();
  Seq d = Seq::zero(v);
  d.set(v.lo, {1.0, 0.0});
  // Build candidate weights from the first-band relation, then verify all bands.
  for (int n = v.lo; n < v.hi && M > 0; ++n) {
    const cplx denom = op.at(-1, n + 1);
    if (std::abs(denom) == 0.0) return std::nullopt;
    const cplx next = d.at(n) * op.at(1, n) / denom;
    if (std::abs(next.imag()) > 1e-9 * std::abs(next) || next.real() <= 0.0) return std::nullopt;
    d.set(n + 1, {next.real(), 0.0});
  }
  if (M == 0)
    for (int n = v.lo + 1; n <= v.hi; ++n) d.set(n, {1.0, 0.0});
  for (int p = 1; p <= M; ++p)
    for (int n = v.lo; n + p <= v.hi; ++n) {
      const cplx lhs = d.at(n) * op.at(p, n);
      const cplx rhs = d.at(n + p) * op.at(-p, n + p);
      const double scale = std::max(std::abs(lhs), std::abs(rhs));
      if (std::abs(lhs - rhs) > 1e-9 * scale) return std::nullopt;
    }
  return d;
}

std::string to_json(const BandedOp& op) {
  nlohmann::ordered_json j;
  j["window"] = {{"lo", op.valid().lo}, {"hi", op.valid().hi}};
  j["m_lower"] = op.m_lower();
  j["n_upper"] = op.n_upper();
  auto bands = nlohmann::ordered_json::array();
  for (int p = -op.m_lower(); p <= op.n_upper(); ++p) {
    auto row = nlohmann::ordered_json::array();
    for (int n = op.valid().lo; n <= op.valid().hi; ++n) {
      const cplx u = op.at(p, n);
      row.push_back({u.real(), u.imag()});
    }
    bands.push_back(std::move(row));
  }
  j["coeffs"] = std::move(bands);
  return j.dump();
}

BandedOp from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(std::string("from_json: ") + e.what());
  }
  try {
    const Window w{j.at("window").at("lo").get<int>(), j.at("window").at("hi").get<int>()};
    const int M = j.at("m_lower").get<int>();
    const int N = j.at("n_upper").get<int>();
    const auto& bands = j.at("coeffs");
    if (!bands.is_array() || static_cast<int>(bands.size()) != M + N + 1)
      throw ConfigInvalid("from_json: band count does not match m_lower/n_upper");
    BandedOp op(w, M, N);
    for (int p = -M; p <= N; ++p) {
      const auto& row = bands.at(static_cast<std::size_t>(p + M));
      if (!row.is_array() || static_cast<int>(row.size()) != w.size())
        throw ConfigInvalid("from_json: band length does not match window");
      for (int n = w.lo; n <= w.hi; ++n) {
        const auto& pair = row.at(static_cast<std::size_t>(n - w.lo));
        op.set(p, n, {pair.at(0).get<double>(), pair.at(1).get<double>()});
      }
    }
    return op;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(std::string("from_json: ") + e.what());
  }
}

}  // namespace ellop::diffop
