// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace igo {

enum class ErrorCode {
  invalid_input,
  degenerate,       // distribution would collapse (e.g. singular covariance)
  domain_exit,      // an update left the open parameter domain
  capacity,         // enumeration too large
  ill_conditioned,  // numerical matrix lost positive definiteness
  config,           // run configuration rejected
  io,
  unknown_suite,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace igo
