#pragma once

#include <cstddef>
#include <cstdint>

// Internal per-ISA entry points. Signatures mirror the public API.
namespace reefmap::kernels::detail {

void range_moments_scalar(const float* pdf, std::size_t n, std::size_t n_classes,
                          const float* reps, float* mean_out, float* var_out);
void blend_uniform_scalar(float* pdf, std::size_t n, std::size_t n_classes, float eps);
void bin_ranges_scalar(const float* range, std::size_t n, std::size_t n_classes,
                       const float* edges, float* pdf_out);
void argmax_classes_scalar(const float* pdf, std::size_t n, std::size_t n_classes,
                           std::uint8_t* out);
void motion_inflate_scalar(double* height, double* hvar, double* xyvar, std::size_t n,
                           double dh, double zvar, double txyvar,
                           double a, double b, double c,
                           double x0, double step, double y);

#if defined(REEFMAP_BUILD_AVX2)
void range_moments_avx2(const float* pdf, std::size_t n, std::size_t n_classes,
                        const float* reps, float* mean_out, float* var_out);
void blend_uniform_avx2(float* pdf, std::size_t n, std::size_t n_classes, float eps);
void bin_ranges_avx2(const float* range, std::size_t n, std::size_t n_classes,
                     const float* edges, float* pdf_out);
void argmax_classes_avx2(const float* pdf, std::size_t n, std::size_t n_classes,
                         std::uint8_t* out);
void motion_inflate_avx2(double* height, double* hvar, double* xyvar, std::size_t n,
                         double dh, double zvar, double txyvar,
                         double a, double b, double c,
                         double x0, double step, double y);
#endif

} // namespace reefmap::kernels::detail
