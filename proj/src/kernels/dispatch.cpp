#include <cstdlib>
#include <string>

#include "frailty_vb/kernels.hpp"

namespace frailty_vb {

#if FRAILTY_VB_WITH_AVX2
const KernelSet& avx2_kernel_table();
#endif

const KernelSet* avx2_kernels() {
#if FRAILTY_VB_WITH_AVX2
  static const bool usable = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return usable ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

std::vector<const KernelSet*> available_kernels() {
  std::vector<const KernelSet*> out{&scalar_kernels()};
  if (const KernelSet* k = avx2_kernels()) out.push_back(k);
  return out;
}

const KernelSet* find_kernels(std::string_view name) {
  for (const KernelSet* k : available_kernels())
    if (name == k->name) return k;
  return nullptr;
}

const KernelSet& active_kernels() {
  static const KernelSet& chosen = [] () -> const KernelSet& {
    const char* env = std::getenv("FRAILTY_VB_KERNELS");
    const std::string want = env ? env : "auto";
    if (want == "auto" || want.empty()) {
      const KernelSet* k = avx2_kernels();
      return k ? *k : scalar_kernels();
    }
    const KernelSet* k = find_kernels(want);
    return k ? *k : scalar_kernels();
  }();
  return chosen;
}

}  // namespace frailty_vb
