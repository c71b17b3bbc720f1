#include "conecraft/kernels.hpp"

// AVX2 kernel variants. Compiled with -mavx2 and no FMA: every complex
// product is expanded with mul/addsub in the same order as the scalar
// reference, so outputs are bit-identical and the equivalence tests can
// assert exact equality.

#if defined(__AVX2__)

#include <immintrin.h>

#include <cmath>

namespace conecraft::kernels::avx2 {

namespace {

// Two packed complex doubles times one broadcast complex scalar m:
// per complex x -> (x.re*m.re - x.im*m.im, x.im*m.re + x.re*m.im).
inline __m256d cmul_bcast(__m256d x, double m_re, double m_im) {
  const __m256d t1 = _mm256_mul_pd(x, _mm256_set1_pd(m_re));
  const __m256d xs = _mm256_permute_pd(x, 0x5);
  const __m256d t2 = _mm256_mul_pd(xs, _mm256_set1_pd(m_im));
  return _mm256_addsub_pd(t1, t2);
}

// Two packed complex doubles u (a matrix column pair) times one broadcast
// complex v: per complex u -> (u.re*v.re - u.im*v.im, u.im*v.re + u.re*v.im).
inline __m256d cmul_pair(__m256d u, __m256d v) {
  const __m256d vre = _mm256_movedup_pd(v);
  const __m256d vim = _mm256_permute_pd(v, 0xF);
  const __m256d t1 = _mm256_mul_pd(u, vre);
  const __m256d us = _mm256_permute_pd(u, 0x5);
  const __m256d t2 = _mm256_mul_pd(us, vim);
  return _mm256_addsub_pd(t1, t2);
}

inline __m256d bcast_lo(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  return _mm256_set_m128d(lo, lo);
}

inline __m256d bcast_hi(__m256d v) {
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  return _mm256_set_m128d(hi, hi);
}

inline void scalar_group(cx* a, const std::size_t offs[4], const cx* m) {
  const cx x[4] = {a[offs[0]], a[offs[1]], a[offs[2]], a[offs[3]]};
  for (int i = 0; i < 4; ++i) {
    cx acc(0.0, 0.0);
    for (int j = 0; j < 4; ++j) {
      const cx mv = m[4 * i + j];
      const double re = mv.real() * x[j].real() - mv.imag() * x[j].imag();
      const double im = mv.imag() * x[j].real() + mv.real() * x[j].imag();
      acc += cx(re, im);
    }
    a[offs[i]] = acc;
  }
}

// Both gate bits >= 1: adjacent bases share the gather pattern, so two
// groups are processed per iteration, one per 128-bit lane.
void apply_gate2_wide(cx* a, unsigned n_bits, unsigned bit_first,
                      unsigned bit_second, const cx* m) {
  const unsigned b_lo = bit_first < bit_second ? bit_first : bit_second;
  const unsigned b_hi = bit_first < bit_second ? bit_second : bit_first;
  const std::size_t s_first = std::size_t{1} << bit_first;
  const std::size_t s_second = std::size_t{1} << bit_second;
  const std::size_t groups = std::size_t{1} << (n_bits - 2);
  const std::size_t mask_lo = (std::size_t{1} << b_lo) - 1;
  const unsigned mid_bits = b_hi - b_lo - 1;
  const std::size_t mask_mid = (std::size_t{1} << mid_bits) - 1;
  double m_re[16], m_im[16];
  for (int k = 0; k < 16; ++k) {
    m_re[k] = m[k].real();
    m_im[k] = m[k].imag();
  }
  for (std::size_t idx = 0; idx < groups; idx += 2) {
    const std::size_t low = idx & mask_lo;
    const std::size_t mid = (idx >> b_lo) & mask_mid;
    const std::size_t high = idx >> (b_lo + mid_bits);
    const std::size_t base = low | (mid << (b_lo + 1)) | (high << (b_hi + 1));
    double* p0 = reinterpret_cast<double*>(a + base);
    double* p1 = reinterpret_cast<double*>(a + base + s_second);
    double* p2 = reinterpret_cast<double*>(a + base + s_first);
    double* p3 = reinterpret_cast<double*>(a + base + s_first + s_second);
    const __m256d x0 = _mm256_loadu_pd(p0);
    const __m256d x1 = _mm256_loadu_pd(p1);
    const __m256d x2 = _mm256_loadu_pd(p2);
    const __m256d x3 = _mm256_loadu_pd(p3);
    for (int i = 0; i < 4; ++i) {
      __m256d acc = cmul_bcast(x0, m_re[4 * i + 0], m_im[4 * i + 0]);
      acc = _mm256_add_pd(acc, cmul_bcast(x1, m_re[4 * i + 1], m_im[4 * i + 1]));
      acc = _mm256_add_pd(acc, cmul_bcast(x2, m_re[4 * i + 2], m_im[4 * i + 2]));
      acc = _mm256_add_pd(acc, cmul_bcast(x3, m_re[4 * i + 3], m_im[4 * i + 3]));
      double* out = (i == 0) ? p0 : (i == 1) ? p1 : (i == 2) ? p2 : p3;
      _mm256_storeu_pd(out, acc);
    }
  }
}

// One gate bit is bit 0: the group's slot pairs are contiguous in memory.
// Column-major accumulation over broadcast inputs, two output slots per
// register.
void apply_gate2_low(cx* a, unsigned n_bits, unsigned bit_first,
                     unsigned bit_second, const cx* m) {
  const unsigned b_hi = bit_first == 0 ? bit_second : bit_first;
  const std::size_t s_hi = std::size_t{1} << b_hi;
  const std::size_t groups = std::size_t{1} << (n_bits - 2);
  const unsigned mid_bits = b_hi - 1;
  const std::size_t mask_mid = (std::size_t{1} << mid_bits) - 1;
  // Group index g = 2*bit(bit_first) + bit(bit_second). Memory pair A sits
  // at base (high bit clear), pair B at base + s_hi.
  // bit_second == 0: pair A = (g0, g1), pair B = (g2, g3).
  // bit_first  == 0: pair A = (g0, g2), pair B = (g1, g3).
  int rows_a[2], rows_b[2];
  if (bit_second == 0) {
    rows_a[0] = 0; rows_a[1] = 1; rows_b[0] = 2; rows_b[1] = 3;
  } else {
    rows_a[0] = 0; rows_a[1] = 2; rows_b[0] = 1; rows_b[1] = 3;
  }
  // colsX[j] packs column j of m for the two rows of pair X.
  __m256d cols_a[4], cols_b[4];
  for (int j = 0; j < 4; ++j) {
    cols_a[j] = _mm256_setr_pd(m[4 * rows_a[0] + j].real(),
                               m[4 * rows_a[0] + j].imag(),
                               m[4 * rows_a[1] + j].real(),
                               m[4 * rows_a[1] + j].imag());
    cols_b[j] = _mm256_setr_pd(m[4 * rows_b[0] + j].real(),
                               m[4 * rows_b[0] + j].imag(),
                               m[4 * rows_b[1] + j].real(),
                               m[4 * rows_b[1] + j].imag());
  }
  for (std::size_t idx = 0; idx < groups; ++idx) {
    const std::size_t mid = idx & mask_mid;
    const std::size_t high = idx >> mid_bits;
    const std::size_t base = (mid << 1) | (high << (b_hi + 1));
    double* pa = reinterpret_cast<double*>(a + base);
    double* pb = reinterpret_cast<double*>(a + base + s_hi);
    const __m256d va = _mm256_loadu_pd(pa);
    const __m256d vb = _mm256_loadu_pd(pb);
    // Broadcast the four inputs in group order g0..g3.
    __m256d xg[4];
    if (bit_second == 0) {
      xg[0] = bcast_lo(va); xg[1] = bcast_hi(va);
      xg[2] = bcast_lo(vb); xg[3] = bcast_hi(vb);
    } else {
      xg[0] = bcast_lo(va); xg[2] = bcast_hi(va);
      xg[1] = bcast_lo(vb); xg[3] = bcast_hi(vb);
    }
    __m256d ya = cmul_pair(cols_a[0], xg[0]);
    ya = _mm256_add_pd(ya, cmul_pair(cols_a[1], xg[1]));
    ya = _mm256_add_pd(ya, cmul_pair(cols_a[2], xg[2]));
    ya = _mm256_add_pd(ya, cmul_pair(cols_a[3], xg[3]));
    __m256d yb = cmul_pair(cols_b[0], xg[0]);
    yb = _mm256_add_pd(yb, cmul_pair(cols_b[1], xg[1]));
    yb = _mm256_add_pd(yb, cmul_pair(cols_b[2], xg[2]));
    yb = _mm256_add_pd(yb, cmul_pair(cols_b[3], xg[3]));
    _mm256_storeu_pd(pa, ya);
    _mm256_storeu_pd(pb, yb);
  }
}

void apply_gate2_impl(cx* a, unsigned n_bits, unsigned bit_first,
                      unsigned bit_second, const cx* m) {
  if (n_bits == 2) {
    const std::size_t s_first = std::size_t{1} << bit_first;
    const std::size_t s_second = std::size_t{1} << bit_second;
    const std::size_t offs[4] = {0, s_second, s_first, s_first + s_second};
    scalar_group(a, offs, m);
    return;
  }
  if (bit_first == 0 || bit_second == 0) {
    apply_gate2_low(a, n_bits, bit_first, bit_second, m);
  } else {
    apply_gate2_wide(a, n_bits, bit_first, bit_second, m);
  }
}

void axpby_impl(double alpha, const cx* x, double beta, cx* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  const double* xp = reinterpret_cast<const double*>(x);
  double* yp = reinterpret_cast<double*>(y);
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xp + 2 * i);
    const __m256d yv = _mm256_loadu_pd(yp + 2 * i);
    const __m256d r =
        _mm256_add_pd(_mm256_mul_pd(va, xv), _mm256_mul_pd(vb, yv));
    _mm256_storeu_pd(yp + 2 * i, r);
  }
  for (; i < n; ++i) {
    const double re = alpha * x[i].real() + beta * y[i].real();
    const double im = alpha * x[i].imag() + beta * y[i].imag();
    y[i] = cx(re, im);
  }
}

cx cdot_conj_impl(const cx* x, const cx* y, std::size_t n) {
  const __m256d sign_flip =
      _mm256_castsi256_pd(_mm256_set1_epi64x(0x8000000000000000LL));
  __m256d acc = _mm256_setzero_pd();
  const std::size_t pairs = n / 2;
  const double* xp = reinterpret_cast<const double*>(x);
  const double* yp = reinterpret_cast<const double*>(y);
  for (std::size_t p = 0; p < pairs; ++p) {
    const __m256d xv = _mm256_loadu_pd(xp + 4 * p);
    const __m256d yv = _mm256_loadu_pd(yp + 4 * p);
    // conj(x)*y: re = x.re*y.re + y.im*x.im ; im = x.re*y.im - y.re*x.im.
    const __m256d t1 = _mm256_mul_pd(yv, _mm256_movedup_pd(xv));
    const __m256d ys = _mm256_permute_pd(yv, 0x5);
    const __m256d t2 = _mm256_mul_pd(ys, _mm256_permute_pd(xv, 0xF));
    // addsub(t1, -t2) gives (even: t1+t2, odd: t1-t2).
    const __m256d term = _mm256_addsub_pd(t1, _mm256_xor_pd(t2, sign_flip));
    acc = _mm256_add_pd(acc, term);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  cx acc0(lanes[0], lanes[1]);
  const cx acc1(lanes[2], lanes[3]);
  if (n & 1) {
    const double ar = x[n - 1].real(), ai = x[n - 1].imag();
    const double br = y[n - 1].real(), bi = y[n - 1].imag();
    acc0 += cx(ar * br + bi * ai, ar * bi - br * ai);
  }
  return acc0 + acc1;
}

double max_abs_impl(const cx* x, std::size_t n) {
  __m256d vmax = _mm256_setzero_pd();
  std::size_t i = 0;
  const double* xp = reinterpret_cast<const double*>(x);
  for (; i + 2 <= n; i += 2) {
    const __m256d v = _mm256_loadu_pd(xp + 2 * i);
    const __m256d sq = _mm256_mul_pd(v, v);
    const __m256d s = _mm256_add_pd(sq, _mm256_permute_pd(sq, 0x5));
    vmax = _mm256_max_pd(vmax, s);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vmax);
  double m = lanes[0] > lanes[2] ? lanes[0] : lanes[2];
  for (; i < n; ++i) {
    const double re = x[i].real(), im = x[i].imag();
    const double a2 = re * re + im * im;
    if (a2 > m) m = a2;
  }
  return std::sqrt(m);
}

}  // namespace

ApplyGate2Fn apply_gate2_fn() { return &apply_gate2_impl; }
AxpbyFn axpby_fn() { return &axpby_impl; }
CdotFn cdot_conj_fn() { return &cdot_conj_impl; }
MaxAbsFn max_abs_fn() { return &max_abs_impl; }

}  // namespace conecraft::kernels::avx2

#else  // !__AVX2__

namespace conecraft::kernels::avx2 {
ApplyGate2Fn apply_gate2_fn() { return nullptr; }
AxpbyFn axpby_fn() { return nullptr; }
CdotFn cdot_conj_fn() { return nullptr; }
MaxAbsFn max_abs_fn() { return nullptr; }
}  // namespace conecraft::kernels::avx2

#endif
