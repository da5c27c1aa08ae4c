#include <cstdlib>
#include <stdexcept>
#include <string>

#include "divcov/simd/kernels.hpp"

namespace divcov::simd {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("SIMD variant not supported on this host: " +
                                std::string(isa_name(isa)));
  }
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::kAvx2: return detail::avx2_table();
#endif
#if defined(__aarch64__)
    case Isa::kNeon: return detail::neon_table();
#endif
    default: return detail::scalar_table();
  }
}

namespace {

const KernelTable& select_table() {
  if (const char* forced = std::getenv("DIVCOV_SIMD")) {
    const std::string name(forced);
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
      if (name == isa_name(isa) && isa_supported(isa)) return kernels_for(isa);
    }
  }
  if (isa_supported(Isa::kAvx2)) return kernels_for(Isa::kAvx2);
  if (isa_supported(Isa::kNeon)) return kernels_for(Isa::kNeon);
  return detail::scalar_table();
}

}  // namespace

const KernelTable& kernels() {
  static const KernelTable& table = select_table();
  return table;
}

}  // namespace divcov::simd
