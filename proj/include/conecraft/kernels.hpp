#pragma once

#include <cstddef>
#include <string>

#include "conecraft/common.hpp"

namespace conecraft::kernels {

// The dense inner loops live here as scalar reference implementations plus
// AVX2 variants selected at runtime. Both variants perform the same IEEE
// operations in the same order, so results are bit-identical; the
// equivalence tests assert exact equality. Selection: CONECRAFT_SIMD
// environment variable (auto|scalar|avx2), overridable via force_backend().

enum class Backend { scalar, avx2 };

Backend active_backend();
// Returns false if the requested backend is unavailable on this CPU.
bool force_backend(Backend b);
void reset_backend();  // back to auto-detection
bool avx2_available();
std::string backend_name(Backend b);

// Applies a two-qubit gate to the 4-amplitude groups of a 2^n_bits complex
// array. bit_first / bit_second are bit positions in the flattened index
// (bit 0 fastest); the 4x4 row-major matrix m acts on basis order
// |q_first q_second> with q_first the high bit of the group index:
//   group g = 2*bit(bit_first) + bit(bit_second).
// Used for state vectors (n_bits = qubit count) and for either side of a
// density matrix / Heisenberg operator (n_bits = 2 * qubit count).
void apply_gate2(cx* a, unsigned n_bits, unsigned bit_first,
                 unsigned bit_second, const cx* m);

// y[i] = alpha*x[i] + beta*y[i] with real coefficients (channel mixing).
void axpby(double alpha, const cx* x, double beta, cx* y, std::size_t n);

// sum_i conj(x[i]) * y[i], accumulated in two interleaved lanes (even/odd
// indices) combined at the end; tr(A B) for Hermitian A, B equals
// cdot_conj(A_flat, B_flat).
cx cdot_conj(const cx* x, const cx* y, std::size_t n);

// max_i |x[i]|: maximum modulus, computed as the max of squared magnitudes
// followed by a single sqrt so both backends round identically.
double max_abs(const cx* x, std::size_t n);

// Per-backend entry points, exposed for the equivalence tests.
namespace scalar {
void apply_gate2(cx* a, unsigned n_bits, unsigned bit_first,
                 unsigned bit_second, const cx* m);
void axpby(double alpha, const cx* x, double beta, cx* y, std::size_t n);
cx cdot_conj(const cx* x, const cx* y, std::size_t n);
double max_abs(const cx* x, std::size_t n);
}  // namespace scalar

namespace avx2 {
// Null pointers when compiled for a non-x86 target.
using ApplyGate2Fn = void (*)(cx*, unsigned, unsigned, unsigned, const cx*);
using AxpbyFn = void (*)(double, const cx*, double, cx*, std::size_t);
using CdotFn = cx (*)(const cx*, const cx*, std::size_t);
using MaxAbsFn = double (*)(const cx*, std::size_t);
ApplyGate2Fn apply_gate2_fn();
AxpbyFn axpby_fn();
CdotFn cdot_conj_fn();
MaxAbsFn max_abs_fn();
}  // namespace avx2

}  // namespace conecraft::kernels
