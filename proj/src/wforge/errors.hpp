#pragma once

#include <stdexcept>
#include <string>

namespace wforge {

/// Error taxonomy shared by the library, the C API and the CLI.
/// The numeric values double as CLI exit codes.
enum class ErrorCode : int {
  ok = 0,
  config = 2,          ///< bad configuration / parameter outside its contract
  precondition = 3,    ///< runtime precondition violated (indefinite defect, bad point, ...)
  non_convergence = 4, ///< an iterative search or scheme failed to meet its target
  io = 5,              ///< filesystem / format problems
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct ConfigError : Error {
  explicit ConfigError(std::string msg) : Error(ErrorCode::config, std::move(msg)) {}
};
struct PreconditionError : Error {
  explicit PreconditionError(std::string msg) : Error(ErrorCode::precondition, std::move(msg)) {}
};
struct NonConvergenceError : Error {
  explicit NonConvergenceError(std::string msg) : Error(ErrorCode::non_convergence, std::move(msg)) {}
};
struct IoError : Error {
  explicit IoError(std::string msg) : Error(ErrorCode::io, std::move(msg)) {}
};

}  // namespace wforge
