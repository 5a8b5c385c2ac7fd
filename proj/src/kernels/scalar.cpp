#include "frailty_vb/kernels.hpp"
#include "frailty_vb/piecewise.hpp"

namespace frailty_vb {

namespace {

void residuals(const double* y, const double* design, std::size_t n, std::size_t p, const double* mu, double* out) {
  for (std::size_t j = 0; j < n; ++j) out[j] = y[j];
  for (std::size_t k = 0; k < p; ++k) {
    const double* col = design + k * n;
    const double m = mu[k];
    for (std::size_t j = 0; j < n; ++j) out[j] -= col[j] * m;
  }
}

void piecewise(const double* r, std::size_t n, double scale, const ApproximationTable& t, double* rho, double* zeta,
               double* phi) {
  for (std::size_t j = 0; j < n; ++j) {
    const double z = r[j] * scale;
    std::size_t q = 0;
    while (q < t.quad_breaks.size() && z > t.quad_breaks[q]) ++q;
    std::size_t l = 0;
    while (l < t.lin_breaks.size() && z > t.lin_breaks[l]) ++l;
    rho[j] = t.rho[q];
    zeta[j] = t.zeta[q];
    phi[j] = t.phi[l];
  }
}

double sum(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += a[j];
  return s;
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += a[j] * b[j];
  return s;
}

double weighted_dot(const double* w, const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += w[j] * a[j] * b[j];
  return s;
}

}  // namespace

const KernelSet& scalar_kernels() {
  static const KernelSet k{"scalar", residuals, piecewise, sum, dot, weighted_dot};
  return k;
}

}  // namespace frailty_vb
