// SPDX-License-Identifier: Apache-2.0
#include "igo/error.hpp"

namespace igo {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::degenerate: return "degenerate-distribution";
    case ErrorCode::domain_exit: return "domain-exit";
    case ErrorCode::capacity: return "capacity";
    case ErrorCode::ill_conditioned: return "ill-conditioned";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
    case ErrorCode::unknown_suite: return "unknown-suite";
  }
  return "unknown";
}

}  // namespace igo
