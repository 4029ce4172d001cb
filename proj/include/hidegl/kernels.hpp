#pragma once

// Data-parallel inner loops used by the assignment, k-means and graph
// application paths. Each kernel has a scalar reference implementation and
// optional AVX2 (x86-64) / NEON (aarch64) variants; the variant is chosen once
// at runtime from CPU features and the HIDEGL_SIMD environment variable
// ("scalar", "avx2", "neon" or "auto").

#include <cstddef>
#include <span>
#include <string_view>

#include <Eigen/Dense>

namespace hidegl::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa) noexcept;

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[j] = ||x - C[:, j]||^2 for the k contiguous columns of C (leading dimension d)
  void (*distances_to_columns)(const double* x, const double* c, std::size_t d, std::size_t k,
                               double* out);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* table_for(Isa isa) noexcept;
/// The table all library code dispatches through.
const KernelTable& active() noexcept;
/// Overrides the dispatch choice; returns false (and changes nothing) if unavailable.
bool set_active(Isa isa) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// D(i, j) = ||X[:, i] - C[:, j]||^2, D is n x k (row-major, one point per row).
void pairwise_squared_distances(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C, RowMatrix& D);

/// out = A^T v for column-major A (one dot product per column).
void gemv_transposed(const Eigen::MatrixXd& A, std::span<const double> v, std::span<double> out);

/// out = A u (one axpy per column).
void gemv(const Eigen::MatrixXd& A, std::span<const double> u, std::span<double> out);

}  // namespace hidegl::kernels

namespace hidegl::kernels::detail {
extern const KernelTable kAvx2Table;
extern const KernelTable kNeonTable;
}  // namespace hidegl::kernels::detail
