#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace htem {

/// Error categories shared by the C++ core and the C API status codes.
enum class ErrorCode : int {
  Domain = 1,
  ConfigInvalid = 2,
  TrajectoryDiverged = 3,
  DimensionMismatch = 4,
  UnequalSampleCounts = 5,
  BoundViolated = 6,
  LambdaOutOfRange = 7,
  MomentUndefined = 8,
  MissingC2 = 9,
  TailBoundUnavailable = 10,
  Io = 11,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class TrajectoryDiverged : public Error {
 public:
  TrajectoryDiverged(std::size_t trajectory, std::size_t step)
      : Error(ErrorCode::TrajectoryDiverged,
              "trajectory " + std::to_string(trajectory) +
                  " diverged (non-finite state) at step " +
                  std::to_string(step)),
        trajectory_(trajectory),
        step_(step) {}
  std::size_t trajectory() const noexcept { return trajectory_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t trajectory_;
  std::size_t step_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace htem
