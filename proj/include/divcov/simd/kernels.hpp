#pragma once

// Dense double-precision kernels used by the cosine equivalence provider,
// KNN distance, and MLP training. Each kernel has a scalar reference
// implementation plus vector variants; the variant is picked once at startup
// from the host CPU (override with DIVCOV_SIMD=scalar|avx2|neon).

#include <cstddef>
#include <span>
#include <string_view>

namespace divcov::simd {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view isa_name(Isa isa);

// Per-element AdamW constants for one optimizer step.
struct AdamStep {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
  double bias_correction1 = 1.0;  // 1 - beta1^t
  double bias_correction2 = 1.0;  // 1 - beta2^t
};

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*adam_update)(const AdamStep& step, double* param, const double* grad,
                      double* m, double* v, std::size_t n);
};

bool isa_supported(Isa isa);

// Table for a specific ISA; throws std::invalid_argument if the host cannot
// run it. Used by the equivalence tests.
const KernelTable& kernels_for(Isa isa);

// Table selected for this process.
const KernelTable& kernels();

inline Isa active_isa() { return kernels().isa; }

inline double dot(std::span<const double> a, std::span<const double> b) {
  return kernels().dot(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const double> a,
                               std::span<const double> b) {
  return kernels().squared_distance(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  kernels().axpy(alpha, x.data(), y.data(), x.size());
}

inline void adam_update(const AdamStep& step, std::span<double> param,
                        std::span<const double> grad, std::span<double> m,
                        std::span<double> v) {
  kernels().adam_update(step, param.data(), grad.data(), m.data(), v.data(),
                        param.size());
}

namespace detail {
const KernelTable& scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table();
#endif
#if defined(__aarch64__)
const KernelTable& neon_table();
#endif
}  // namespace detail

}  // namespace divcov::simd
