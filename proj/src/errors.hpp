#ifndef ELLOP_ERRORS_HPP
#define ELLOP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ellop {

// Stable error codes, mirrored one-to-one by the C API header.
enum class ErrorCode : int {
  ok = 0,
  degenerate_lattice = 1,
  pole_at_lattice_point = 2,
  window_mismatch = 3,
  not_square_bands = 4,
  out_of_window = 5,
  alpha_collision = 6,
  gamma_degenerate = 7,
  ill_conditioned_fit = 8,
  non_generic_data = 9,
  rank_deficient_fit = 10,
  zero_count_mismatch = 11,
  zero_leading_coefficient = 12,
  window_too_small = 13,
  config_invalid = 14,
  denominator_collision = 15,
  index_out_of_data = 16,
  no_partner = 17,
  internal = 18,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

#define ELLOP_DEFINE_ERROR(Name, code_value)                                        \
  class Name : public Error {                                                       \
  public:                                                                           \
    explicit Name(const std::string& what) : Error(ErrorCode::code_value, what) {}  \
  }

ELLOP_DEFINE_ERROR(DegenerateLattice, degenerate_lattice);
ELLOP_DEFINE_ERROR(PoleAtLatticePoint, pole_at_lattice_point);
ELLOP_DEFINE_ERROR(WindowMismatch, window_mismatch);
ELLOP_DEFINE_ERROR(NotSquareBands, not_square_bands);
ELLOP_DEFINE_ERROR(OutOfWindow, out_of_window);
ELLOP_DEFINE_ERROR(AlphaCollision, alpha_collision);
ELLOP_DEFINE_ERROR(GammaDegenerate, gamma_degenerate);
ELLOP_DEFINE_ERROR(IllConditionedFit, ill_conditioned_fit);
ELLOP_DEFINE_ERROR(NonGenericData, non_generic_data);
ELLOP_DEFINE_ERROR(RankDeficientFit, rank_deficient_fit);
ELLOP_DEFINE_ERROR(ZeroCountMismatch, zero_count_mismatch);
ELLOP_DEFINE_ERROR(ZeroLeadingCoefficient, zero_leading_coefficient);
ELLOP_DEFINE_ERROR(WindowTooSmall, window_too_small);
ELLOP_DEFINE_ERROR(ConfigInvalid, config_invalid);
ELLOP_DEFINE_ERROR(DenominatorCollision, denominator_collision);
ELLOP_DEFINE_ERROR(IndexOutOfData, index_out_of_data);
ELLOP_DEFINE_ERROR(NoPartner, no_partner);

#undef ELLOP_DEFINE_ERROR

}  // namespace ellop

#endif  // ELLOP_ERRORS_HPP
