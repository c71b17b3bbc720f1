#include <cmath>

#include "conecraft/kernels.hpp"

// Reference kernels. The SIMD variants replay exactly these operation
// sequences (complex products expanded the same way, additions in the same
// order), which is what makes bit-exact equivalence testable.

namespace conecraft::kernels::scalar {

namespace {

// (a*b) expanded as (ar*br - ai*bi, ai*br + ar*bi); both factors finite.
inline cx cmul(const cx& a, const cx& b) {
  const double ar = a.real(), ai = a.imag(), br = b.real(), bi = b.imag();
  return cx(ar * br - ai * bi, ai * br + ar * bi);
}

// conj(a)*b as (ar*br + bi*ai, ar*bi - br*ai); matches the SIMD lane algebra.
inline cx cmul_conj(const cx& a, const cx& b) {
  const double ar = a.real(), ai = a.imag(), br = b.real(), bi = b.imag();
  return cx(ar * br + bi * ai, ar * bi - br * ai);
}

inline void apply_group(cx* a, const std::size_t offs[4], const cx* m) {
  const cx x0 = a[offs[0]], x1 = a[offs[1]], x2 = a[offs[2]], x3 = a[offs[3]];
  for (int i = 0; i < 4; ++i) {
    cx acc = cmul(m[4 * i + 0], x0);
    acc += cmul(m[4 * i + 1], x1);
    acc += cmul(m[4 * i + 2], x2);
    acc += cmul(m[4 * i + 3], x3);
    a[offs[i]] = acc;
  }
}

}  // namespace

void apply_gate2(cx* a, unsigned n_bits, unsigned bit_first,
                 unsigned bit_second, const cx* m) {
  const unsigned b_lo = bit_first < bit_second ? bit_first : bit_second;
  const unsigned b_hi = bit_first < bit_second ? bit_second : bit_first;
  const std::size_t s_first = std::size_t{1} << bit_first;
  const std::size_t s_second = std::size_t{1} << bit_second;
  const std::size_t groups = std::size_t{1} << (n_bits - 2);
  const std::size_t mask_lo = (std::size_t{1} << b_lo) - 1;
  const unsigned mid_bits = b_hi - b_lo - 1;
  const std::size_t mask_mid = (std::size_t{1} << mid_bits) - 1;
  for (std::size_t idx = 0; idx < groups; ++idx) {
    const std::size_t low = idx & mask_lo;
    const std::size_t mid = (idx >> b_lo) & mask_mid;
    const std::size_t high = idx >> (b_lo + mid_bits);
    const std::size_t base = low | (mid << (b_lo + 1)) | (high << (b_hi + 1));
    const std::size_t offs[4] = {base, base + s_second, base + s_first,
                                 base + s_first + s_second};
    apply_group(a, offs, m);
  }
}

void axpby(double alpha, const cx* x, double beta, cx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = alpha * x[i].real() + beta * y[i].real();
    const double im = alpha * x[i].imag() + beta * y[i].imag();
    y[i] = cx(re, im);
  }
}

cx cdot_conj(const cx* x, const cx* y, std::size_t n) {
  // Two interleaved accumulators (even/odd indices) mirror the SIMD lanes.
  cx acc0(0.0, 0.0), acc1(0.0, 0.0);
  const std::size_t pairs = n / 2;
  for (std::size_t p = 0; p < pairs; ++p) {
    acc0 += cmul_conj(x[2 * p], y[2 * p]);
    acc1 += cmul_conj(x[2 * p + 1], y[2 * p + 1]);
  }
  if (n & 1) acc0 += cmul_conj(x[n - 1], y[n - 1]);
  return acc0 + acc1;
}

double max_abs(const cx* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double re = x[i].real(), im = x[i].imag();
    const double a2 = re * re + im * im;
    if (a2 > m) m = a2;
  }
  return std::sqrt(m);
}

}  // namespace conecraft::kernels::scalar
