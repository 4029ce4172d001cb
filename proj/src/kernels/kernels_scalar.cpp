#include "hidegl/kernels.hpp"

namespace hidegl::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void distances_to_columns_scalar(const double* x, const double* c, std::size_t d, std::size_t k,
                                 double* out) {
  for (std::size_t j = 0; j < k; ++j) out[j] = squared_distance_scalar(x, c + j * d, d);
}

constexpr KernelTable kScalarTable{Isa::scalar, &dot_scalar, &squared_distance_scalar,
                                   &axpy_scalar, &distances_to_columns_scalar};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalarTable; }

}  // namespace hidegl::kernels
