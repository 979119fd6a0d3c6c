#include "kernels_impl.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace parlab::kernels {

namespace {

constexpr KernelTable kScalar{
    Backend::Scalar,     scalar::gemm, scalar::add_bias_rows, scalar::column_sums,
    scalar::relu,        scalar::relu_backward, scalar::ema,  scalar::adam,
    scalar::dot,
};

#if defined(PARLAB_HAVE_AVX2)
constexpr KernelTable kAvx2{
    Backend::Avx2,     avx2::gemm, avx2::add_bias_rows, avx2::column_sums,
    avx2::relu,        avx2::relu_backward, avx2::ema,  avx2::adam,
    avx2::dot,
};
#endif

const KernelTable* initial_table() {
  const char* env = std::getenv("PARLAB_KERNELS");
  const std::string wanted = env ? env : "";
  if (wanted == "scalar") return &kScalar;
#if defined(PARLAB_HAVE_AVX2)
  if (cpu_supports_avx2()) return &kAvx2;
#endif
  return &kScalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#if defined(PARLAB_HAVE_AVX2)
  return cpu_supports_avx2() ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

Backend active_backend() { return active().backend; }

void select_backend(Backend backend) {
  if (backend == Backend::Scalar) {
    current().store(&kScalar);
    return;
  }
  const KernelTable* t = avx2_table();
  if (t == nullptr) throw std::runtime_error("AVX2 kernels are not available on this build/CPU");
  current().store(t);
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::Avx2 ? "avx2" : "scalar";
}

}  // namespace parlab::kernels
