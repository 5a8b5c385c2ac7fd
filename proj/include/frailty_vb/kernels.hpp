#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace frailty_vb {

struct ApproximationTable;

/// Per-observation passes of a sweep. Every variant must agree with the
/// scalar one: element-wise outputs bit for bit, reductions to rounding.
struct KernelSet {
  const char* name;

  /// out[j] = y[j] - sum_k design[k*n + j] * mu[k]   (design column-major n x p)
  void (*residuals)(const double* y, const double* design, std::size_t n, std::size_t p,
                    const double* mu, double* out);

  /// Coefficients of both surrogates at z = r[j] * scale.
  void (*piecewise)(const double* r, std::size_t n, double scale, const ApproximationTable& table,
                    double* rho, double* zeta, double* phi);

  double (*sum)(const double* a, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// sum_j w[j] a[j] b[j]
  double (*weighted_dot)(const double* w, const double* a, const double* b, std::size_t n);
};

const KernelSet& scalar_kernels();

/// nullptr when the build or the CPU lacks AVX2+FMA.
const KernelSet* avx2_kernels();

/// Chosen once from FRAILTY_VB_KERNELS (scalar | avx2 | auto, default auto).
const KernelSet& active_kernels();

std::vector<const KernelSet*> available_kernels();

const KernelSet* find_kernels(std::string_view name);

}  // namespace frailty_vb
