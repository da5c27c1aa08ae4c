// AArch64 variants. NEON is part of the base ISA there, so no runtime probe.
#include "divcov/simd/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

namespace divcov::simd::detail {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

double squared_distance_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double sum = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void adam_update_neon(const AdamStep& s, double* param, const double* grad,
                      double* m, double* v, std::size_t n) {
  const double decay = s.learning_rate * s.weight_decay;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t g = vld1q_f64(grad + i);
    float64x2_t vm = vaddq_f64(vmulq_n_f64(vld1q_f64(m + i), s.beta1),
                               vmulq_n_f64(g, 1.0 - s.beta1));
    float64x2_t vv = vaddq_f64(vmulq_n_f64(vld1q_f64(v + i), s.beta2),
                               vmulq_n_f64(vmulq_f64(g, g), 1.0 - s.beta2));
    vst1q_f64(m + i, vm);
    vst1q_f64(v + i, vv);
    const float64x2_t m_hat = vdivq_f64(vm, vdupq_n_f64(s.bias_correction1));
    const float64x2_t v_hat = vdivq_f64(vv, vdupq_n_f64(s.bias_correction2));
    float64x2_t p = vmulq_n_f64(vld1q_f64(param + i), 1.0 - decay);
    const float64x2_t denom = vaddq_f64(vsqrtq_f64(v_hat), vdupq_n_f64(s.epsilon));
    p = vsubq_f64(p, vdivq_f64(vmulq_n_f64(m_hat, s.learning_rate), denom));
    vst1q_f64(param + i, p);
  }
  for (; i < n; ++i) {
    const double gi = grad[i];
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * gi;
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * gi * gi;
    param[i] *= 1.0 - decay;
    param[i] -= s.learning_rate * (m[i] / s.bias_correction1) /
                (std::sqrt(v[i] / s.bias_correction2) + s.epsilon);
  }
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{Isa::kNeon, dot_neon, squared_distance_neon,
                                 axpy_neon, adam_update_neon};
  return table;
}

}  // namespace divcov::simd::detail

#endif
