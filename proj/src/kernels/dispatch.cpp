#include "reefmap/kernels.hpp"

#include "kernels_impl.hpp"

namespace reefmap::kernels {

namespace {

bool avx2_available() {
#if defined(REEFMAP_BUILD_AVX2)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

Isa& current() {
  static Isa isa = detect_best_isa();
  return isa;
}

} // namespace

Isa detect_best_isa() {
  return avx2_available() ? Isa::avx2 : Isa::scalar;
}

Isa active_isa() { return current(); }

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && !avx2_available()) {
    isa = Isa::scalar;
  }
  current() = isa;
}

void range_moments(const float* pdf, std::size_t n, std::size_t n_classes,
                   const float* reps, float* mean_out, float* var_out) {
#if defined(REEFMAP_BUILD_AVX2)
  if (current() == Isa::avx2) {
    detail::range_moments_avx2(pdf, n, n_classes, reps, mean_out, var_out);
    return;
  }
#endif
  detail::range_moments_scalar(pdf, n, n_classes, reps, mean_out, var_out);
}

void blend_uniform(float* pdf, std::size_t n, std::size_t n_classes, float eps) {
#if defined(REEFMAP_BUILD_AVX2)
  if (current() == Isa::avx2) {
    detail::blend_uniform_avx2(pdf, n, n_classes, eps);
    return;
  }
#endif
  detail::blend_uniform_scalar(pdf, n, n_classes, eps);
}

void bin_ranges(const float* range, std::size_t n, std::size_t n_classes,
                const float* edges, float* pdf_out) {
#if defined(REEFMAP_BUILD_AVX2)
  if (current() == Isa::avx2) {
    detail::bin_ranges_avx2(range, n, n_classes, edges, pdf_out);
    return;
  }
#endif
  detail::bin_ranges_scalar(range, n, n_classes, edges, pdf_out);
}

void argmax_classes(const float* pdf, std::size_t n, std::size_t n_classes,
                    std::uint8_t* out) {
#if defined(REEFMAP_BUILD_AVX2)
  if (current() == Isa::avx2) {
    detail::argmax_classes_avx2(pdf, n, n_classes, out);
    return;
  }
#endif
  detail::argmax_classes_scalar(pdf, n, n_classes, out);
}

void motion_inflate(double* height, double* hvar, double* xyvar, std::size_t n,
                    double dh, double zvar, double txyvar,
                    double a, double b, double c,
                    double x0, double step, double y) {
#if defined(REEFMAP_BUILD_AVX2)
  if (current() == Isa::avx2) {
    detail::motion_inflate_avx2(height, hvar, xyvar, n, dh, zvar, txyvar,
                                a, b, c, x0, step, y);
    return;
  }
#endif
  detail::motion_inflate_scalar(height, hvar, xyvar, n, dh, zvar, txyvar,
                                a, b, c, x0, step, y);
}

} // namespace reefmap::kernels
