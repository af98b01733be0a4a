#include "haptic/core/error.hpp"

namespace haptic {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::no_information: return "no_information";
    case ErrorCode::incomplete_ledger: return "incomplete_ledger";
    case ErrorCode::no_bias_probes: return "no_bias_probes";
    case ErrorCode::non_positive_k: return "non_positive_k";
    case ErrorCode::interlock_violation: return "interlock_violation";
    case ErrorCode::rupture: return "rupture";
    case ErrorCode::empty_training_set: return "empty_training_set";
    case ErrorCode::divergent_loss: return "divergent_loss";
    case ErrorCode::undefined_improvement: return "undefined_improvement";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::protocol_state: return "protocol_state";
  }
  return "unknown";
}

}  // namespace haptic
