#pragma once

#include <stdexcept>
#include <string>

namespace majlab {

enum class ErrorCode {
  InvalidInput = 1,
  DimensionMismatch,
  NotASimplex,
  InvalidPartition,
  InvalidWitness,
  InternalInconsistency,
  OutOfRange,
  NotAContraction,
  NotSquare,
  BadBlockStructure,
  NotCommuting,
  NotDoublyStochastic,
  NoPerfectMatching,
  BadWeights,
  NormTooLarge,
  NotRational,
  ResolutionInsufficient,
  PairingInvalid,
  NotMajorized,
  NotApproxMajorized,
  NotInterior,
  DegenerateHull,
  NotInHull,
  TruncationTooSmall,
  NoRationalCombination,
  UnsupportedIrrationalVertices,
  IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace majlab
