#pragma once

#include <stdexcept>
#include <string>

namespace brdm {

enum class errc {
  empty_input,
  negative_weight,
  not_normalized,
  length_mismatch,
  invalid_partition,
  invalid_transfer,
  not_majorized,
  not_absolutely_continuous,
  not_block_constant,
  not_rel_majorized,
  alpha_too_large,
  domain_error,
  infeasible_constraint,
  degenerate_utility,
  degenerate_partition,
  non_convergence,
  zero_evidence,
  invalid_argument,
};

inline const char* to_string(errc code) {
  switch (code) {
    case errc::empty_input: return "EmptyInput";
    case errc::negative_weight: return "NegativeWeight";
    case errc::not_normalized: return "NotNormalized";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::invalid_partition: return "InvalidPartition";
    case errc::invalid_transfer: return "InvalidTransfer";
    case errc::not_majorized: return "NotMajorized";
    case errc::not_absolutely_continuous: return "NotAbsolutelyContinuous";
    case errc::not_block_constant: return "NotBlockConstant";
    case errc::not_rel_majorized: return "NotRelMajorized";
    case errc::alpha_too_large: return "AlphaTooLarge";
    case errc::domain_error: return "DomainError";
    case errc::infeasible_constraint: return "InfeasibleConstraint";
    case errc::degenerate_utility: return "DegenerateUtility";
    case errc::degenerate_partition: return "DegeneratePartition";
    case errc::non_convergence: return "NonConvergence";
    case errc::zero_evidence: return "ZeroEvidence";
    case errc::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure in the library is reported as a brdm::error carrying a code
/// the CLI can map to an exit status.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace brdm
