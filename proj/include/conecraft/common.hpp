#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace conecraft {

using cx = std::complex<double>;

// File-facing qubit identifier. Builders assign ids densely in creation
// order (bath first, then per-iteration qubits as declared); parsed files may
// use arbitrary ids, which are canonicalized to creation-order track ids.
using QubitId = std::int32_t;

inline constexpr const char* kToolVersion = "0.1.0";

// Simulation ceilings. Pure-state runs stop at kPureQubitCap live qubits;
// density-matrix and Heisenberg-picture work stops at kDensityQubitCap.
inline constexpr int kPureQubitCap = 20;
inline constexpr int kDensityQubitCap = 12;

// Support trimming threshold: a qubit leaves an operator's support when the
// operator is within this max-norm distance of (partial trace)/2 (x) identity.
inline constexpr double kTrimTol = 1e-12;

enum class ErrorKind {
  usage,       // bad arguments / malformed input files
  validation,  // structurally invalid scheme, observable, or state
  cap,         // resource ceiling exceeded (qubit caps, support blow-up)
  verify,      // a verification suite found a violation
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

// Pairwise (binary-tree) summation over a fixed index order. Reductions over
// task results use this so the result is independent of which thread produced
// which slot.
double pairwise_sum(std::span<const double> xs);
cx pairwise_sum(std::span<const cx> xs);

// 17-significant-digit decimal formatting; round-trips any finite double.
std::string format_g17(double v);

}  // namespace conecraft
