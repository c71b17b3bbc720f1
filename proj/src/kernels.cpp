#include "conecraft/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <string>

namespace conecraft::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

bool backend_usable(Backend b) {
  if (b == Backend::scalar) return true;
  return cpu_has_avx2() && avx2::apply_gate2_fn() != nullptr;
}

Backend detect_backend() {
  const char* env = std::getenv("CONECRAFT_SIMD");
  if (env != nullptr) {
    const std::string v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2") {
      if (!backend_usable(Backend::avx2))
        fail(ErrorKind::validation, "CONECRAFT_SIMD=avx2 but AVX2 is unavailable");
      return Backend::avx2;
    }
    if (!v.empty() && v != "auto")
      fail(ErrorKind::validation,
           "CONECRAFT_SIMD must be auto, scalar, or avx2 (got '" + v + "')");
  }
  return backend_usable(Backend::avx2) ? Backend::avx2 : Backend::scalar;
}

std::once_flag g_init_flag;
std::atomic<Backend> g_backend{Backend::scalar};

Backend current() {
  std::call_once(g_init_flag, [] { g_backend.store(detect_backend()); });
  return g_backend.load();
}

}  // namespace

Backend active_backend() { return current(); }

bool force_backend(Backend b) {
  current();  // settle auto-detection first so reset_backend stays meaningful
  if (!backend_usable(b)) return false;
  g_backend.store(b);
  return true;
}

void reset_backend() {
  current();
  g_backend.store(detect_backend());
}

bool avx2_available() { return backend_usable(Backend::avx2); }

std::string backend_name(Backend b) {
  return b == Backend::scalar ? "scalar" : "avx2";
}

void apply_gate2(cx* a, unsigned n_bits, unsigned bit_first,
                 unsigned bit_second, const cx* m) {
  if (current() == Backend::avx2) {
    avx2::apply_gate2_fn()(a, n_bits, bit_first, bit_second, m);
  } else {
    scalar::apply_gate2(a, n_bits, bit_first, bit_second, m);
  }
}

void axpby(double alpha, const cx* x, double beta, cx* y, std::size_t n) {
  if (current() == Backend::avx2) {
    avx2::axpby_fn()(alpha, x, beta, y, n);
  } else {
    scalar::axpby(alpha, x, beta, y, n);
  }
}

cx cdot_conj(const cx* x, const cx* y, std::size_t n) {
  if (current() == Backend::avx2) return avx2::cdot_conj_fn()(x, y, n);
  return scalar::cdot_conj(x, y, n);
}

double max_abs(const cx* x, std::size_t n) {
  if (current() == Backend::avx2) return avx2::max_abs_fn()(x, n);
  return scalar::max_abs(x, n);
}

}  // namespace conecraft::kernels
