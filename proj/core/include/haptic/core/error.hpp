#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace haptic {

/// Failure categories shared across modules. Each maps onto one of the
/// documented error conditions of an operation, so callers (and the CLI's
/// structured error JSON) can branch on the kind rather than the message.
enum class ErrorCode {
  invalid_argument,
  out_of_range,
  no_information,
  incomplete_ledger,
  no_bias_probes,
  non_positive_k,
  interlock_violation,
  rupture,
  empty_training_set,
  divergent_loss,
  undefined_improvement,
  parse_error,
  not_found,
  protocol_state,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace haptic
