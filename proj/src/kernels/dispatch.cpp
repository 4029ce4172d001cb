#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>

#include "hidegl/kernels.hpp"

namespace hidegl::kernels {
namespace {

bool cpu_has(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(HIDEGL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(HIDEGL_HAVE_NEON)
      return true;  // mandatory on aarch64
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* select_initial() noexcept {
  const char* env = std::getenv("HIDEGL_SIMD");
  const std::string want = env ? env : "auto";
  if (want == "scalar") return &scalar_table();
  if (want == "avx2" || want == "neon") {
    if (const auto* t = table_for(want == "avx2" ? Isa::avx2 : Isa::neon)) return t;
  }
  if (const auto* t = table_for(Isa::avx2)) return t;
  if (const auto* t = table_for(Isa::neon)) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& active_slot() noexcept {
  static std::atomic<const KernelTable*> slot{select_initial()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

const KernelTable* table_for(Isa isa) noexcept {
  if (!cpu_has(isa)) return nullptr;
  switch (isa) {
    case Isa::scalar:
      return &scalar_table();
    case Isa::avx2:
#if defined(HIDEGL_HAVE_AVX2)
      return &detail::kAvx2Table;
#else
      return nullptr;
#endif
    case Isa::neon:
#if defined(HIDEGL_HAVE_NEON)
      return &detail::kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable& active() noexcept { return *active_slot().load(std::memory_order_relaxed); }

bool set_active(Isa isa) noexcept {
  const auto* t = table_for(isa);
  if (!t) return false;
  active_slot().store(t, std::memory_order_relaxed);
  return true;
}

void pairwise_squared_distances(const Eigen::MatrixXd& X, const Eigen::MatrixXd& C, RowMatrix& D) {
  const auto d = static_cast<std::size_t>(X.rows());
  const auto n = X.cols();
  const auto k = C.cols();
  D.resize(n, k);
  const auto& t = active();
  for (Eigen::Index i = 0; i < n; ++i) {
    t.distances_to_columns(X.col(i).data(), C.data(), d, static_cast<std::size_t>(k),
                           D.row(i).data());
  }
}

void gemv_transposed(const Eigen::MatrixXd& A, std::span<const double> v, std::span<double> out) {
  const auto& t = active();
  const auto n = static_cast<std::size_t>(A.rows());
  for (Eigen::Index j = 0; j < A.cols(); ++j) out[j] = t.dot(A.col(j).data(), v.data(), n);
}

void gemv(const Eigen::MatrixXd& A, std::span<const double> u, std::span<double> out) {
  const auto& t = active();
  const auto n = static_cast<std::size_t>(A.rows());
  std::fill(out.begin(), out.end(), 0.0);
  for (Eigen::Index j = 0; j < A.cols(); ++j) t.axpy(u[j], A.col(j).data(), out.data(), n);
}

}  // namespace hidegl::kernels
