#ifndef ELLOP_DIFFOP_HPP
#define ELLOP_DIFFOP_HPP

#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numutil.hpp"

namespace ellop::diffop {

// Inclusive site-index range.
struct Window {
  int lo = 0;
  int hi = 0;

  int size() const { return hi - lo + 1; }
  bool contains(int n) const { return n >= lo && n <= hi; }
  bool contains(const Window& w) const { return w.lo >= lo && w.hi <= hi; }
  bool operator==(const Window& other) const { return lo == other.lo && hi == other.hi; }
};

// A complex value per site of a window.
struct Seq {
  Window window{};
  std::vector<cplx> values{};

  static Seq zero(Window w) { return {w, std::vector<cplx>(static_cast<std::size_t>(w.size()))}; }

  cplx at(int n) const {
    if (!window.contains(n)) throw OutOfWindow("Seq::at: site outside window");
    return values[static_cast<std::size_t>(n - window.lo)];
  }
  void set(int n, cplx v) {
    if (!window.contains(n)) throw OutOfWindow("Seq::set: site outside window");
    values[static_cast<std::size_t>(n - window.lo)] = v;
  }
};

// Banded difference operator sum_{p=-M..N} u_{p,n} T^p acting on sequences,
// (T s)_n = s_{n+1}.  Coefficients are stored densely over `window`; `valid`
// marks the subwindow where they are meaningful (composition shrinks validity
// but keeps the storage window).  Reads outside the storage window are
// structural errors, never implicit zeros.
class BandedOp {
public:
  BandedOp(Window window, int m_lower, int n_upper)
      : window_(window), valid_(window), m_lower_(m_lower), n_upper_(n_upper),
        coeffs_(static_cast<std::size_t>((m_lower + n_upper + 1)) *
                static_cast<std::size_t>(window.size())) {
    if (m_lower < 0 || n_upper < 0 || window.size() < 1)
      throw WindowMismatch("BandedOp: invalid shape");
  }

  static BandedOp identity(Window w) {
    BandedOp op(w, 0, 0);
    for (int n = w.lo; n <= w.hi; ++n) op.set(0, n, {1.0, 0.0});
    return op;
  }

  // T^p with unit coefficient (p may be negative).
  static BandedOp shift(Window w, int p) {
    BandedOp op(w, p < 0 ? -p : 0, p > 0 ? p : 0);
    for (int n = w.lo; n <= w.hi; ++n) op.set(p, n, {1.0, 0.0});
    return op;
  }

  static BandedOp diagonal(const Seq& d) {
    BandedOp op(d.window, 0, 0);
    for (int n = d.window.lo; n <= d.window.hi; ++n) op.set(0, n, d.at(n));
    return op;
  }

  const Window& window() const { return window_; }
  const Window& valid() const { return valid_; }
  int m_lower() const { return m_lower_; }
  int n_upper() const { return n_upper_; }

  cplx at(int p, int n) const {
    check_index(p, n);
    return coeffs_[flat(p, n)];
  }
  void set(int p, int n, cplx v) {
    check_index(p, n);
    coeffs_[flat(p, n)] = v;
  }

  void restrict_valid(Window v) {
    if (!window_.contains(v)) throw WindowMismatch("restrict_valid: outside storage window");
    valid_ = v;
  }

private:
  void check_index(int p, int n) const {
    if (p < -m_lower_ || p > n_upper_) throw OutOfWindow("BandedOp: band index outside [-M, N]");
    if (!window_.contains(n)) throw OutOfWindow("BandedOp: site outside storage window");
  }
  std::size_t flat(int p, int n) const {
    return static_cast<std::size_t>(p + m_lower_) * static_cast<std::size_t>(window_.size()) +
           static_cast<std::size_t>(n - window_.lo);
  }

  Window window_;
  Window valid_;
  int m_lower_;
  int n_upper_;
  std::vector<cplx> coeffs_;
};

// (op s)_n = sum_p u_{p,n} s_{n+p} on the shrunken window [s.lo + M, s.hi - N].
// Every result site must lie in op's validity region.
Seq apply(const BandedOp& op, const Seq& s);

// Coefficient rule (AB)_{p,n} = sum_q a_{q,n} b_{p-q, n+q}; bands add; validity
// shrinks by A's bandwidth reaching into B's validity.
BandedOp compose(const BandedOp& A, const BandedOp& B);

// sum_i scalar_i * op_i; bandwidths take componentwise maxima, validity intersects.
BandedOp lincomb(const std::vector<std::pair<cplx, const BandedOp*>>& terms);

// AB - BA on the doubly-shrunken interior.
BandedOp commutator(const BandedOp& A, const BandedOp& B);

// max_{p, n in sub} |u_{p,n}|; sub must lie inside the validity region.
double band_residual_norm(const BandedOp& op, Window sub);

// Positive weights d_n with d_n u_{p,n} = d_{n+p} u_{-p,n+p} (all bands, 1e-9
// relative), normalized d_{lo} = 1; absent when no such weights exist.
// Requires M = N (throws NotSquareBands otherwise).
std::optional<Seq> symmetrizable_weights(const BandedOp& op);

// JSON round-trip.  The serialized form covers the validity region (window,
// m_lower, n_upper, and coeffs row-major [band p ascending][site n ascending]
// as [re, im] pairs); parsing yields an operator whose storage window equals
// that region.  Serialize-parse-serialize is byte-identical.
std::string to_json(const BandedOp& op);
BandedOp from_json(const std::string& text);

}  // namespace ellop::diffop

#endif  // ELLOP_DIFFOP_HPP
