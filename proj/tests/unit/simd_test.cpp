#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "divcov/core/rng.hpp"
#include "divcov/simd/kernels.hpp"

namespace divcov::simd {
namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform(rng, -3.0, 3.0);
  return v;
}

std::vector<Isa> vector_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::kAvx2, Isa::kNeon}) {
    if (isa_supported(isa)) out.push_back(isa);
  }
  return out;
}

TEST(Simd, ActiveTableIsSupported) {
  EXPECT_TRUE(isa_supported(Isa::kScalar));
  EXPECT_TRUE(isa_supported(active_isa()));
  EXPECT_FALSE(isa_name(active_isa()).empty());
}

TEST(Simd, UnsupportedIsaThrows) {
  for (Isa isa : {Isa::kAvx2, Isa::kNeon}) {
    if (!isa_supported(isa)) EXPECT_THROW(kernels_for(isa), std::invalid_argument);
  }
}

TEST(Simd, VectorKernelsMatchScalar) {
  const KernelTable& ref = kernels_for(Isa::kScalar);
  Rng rng(42);
  for (Isa isa : vector_isas()) {
    const KernelTable& k = kernels_for(isa);
    for (std::size_t n = 0; n <= 67; ++n) {
      const auto a = random_vec(rng, n);
      const auto b = random_vec(rng, n);
      double mag = 0.0;
      for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
      EXPECT_NEAR(k.dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n), 1e-12 * (1 + mag))
          << isa_name(isa) << " n=" << n;
      const double d_ref = ref.squared_distance(a.data(), b.data(), n);
      EXPECT_NEAR(k.squared_distance(a.data(), b.data(), n), d_ref, 1e-12 * (1 + d_ref));

      auto y1 = b;
      auto y2 = b;
      ref.axpy(0.37, a.data(), y1.data(), n);
      k.axpy(0.37, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-14 * (1 + std::abs(y1[i])));
    }
  }
}

TEST(Simd, AdamMatchesScalar) {
  const KernelTable& ref = kernels_for(Isa::kScalar);
  Rng rng(7);
  AdamStep step;
  step.learning_rate = 0.01;
  step.weight_decay = 1e-3;
  step.bias_correction1 = 1 - 0.9 * 0.9;
  step.bias_correction2 = 1 - 0.999 * 0.999;
  for (Isa isa : vector_isas()) {
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 64u}) {
      auto p1 = random_vec(rng, n), g = random_vec(rng, n);
      auto m1 = random_vec(rng, n), v1 = random_vec(rng, n);
      for (double& x : v1) x = std::abs(x);
      auto p2 = p1, m2 = m1, v2 = v1;
      ref.adam_update(step, p1.data(), g.data(), m1.data(), v1.data(), n);
      kernels_for(isa).adam_update(step, p2.data(), g.data(), m2.data(), v2.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_NEAR(p1[i], p2[i], 1e-13);
        EXPECT_NEAR(m1[i], m2[i], 1e-14);
        EXPECT_NEAR(v1[i], v2[i], 1e-14);
      }
    }
  }
}

TEST(Simd, ScalarReferenceValues) {
  const KernelTable& ref = kernels_for(Isa::kScalar);
  const double a[] = {1, 2, 3};
  const double b[] = {4, -5, 6};
  EXPECT_DOUBLE_EQ(ref.dot(a, b, 3), 12.0);
  EXPECT_DOUBLE_EQ(ref.squared_distance(a, b, 3), 9 + 49 + 9);
}

}  // namespace
}  // namespace divcov::simd
