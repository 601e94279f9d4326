#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops of the mapping pipeline. Every kernel has a
// scalar reference implementation and may have SIMD variants; the variant
// is selected once at runtime from CPU capabilities. Scalar and SIMD paths
// are written to produce bit-identical outputs (no FMA, same operation
// order per element), which the equivalence tests assert.
namespace reefmap::kernels {

enum class Isa { scalar, avx2 };

// Best ISA supported by the running CPU and this build.
Isa detect_best_isa();

// Currently selected ISA (lazy-initialized to detect_best_isa()).
Isa active_isa();

// Override the selected ISA. Requests for an unavailable ISA fall back to
// scalar. Intended for equivalence tests and benchmarks.
void force_isa(Isa isa);

// Per-pixel mean and variance of a class-probability image.
// `pdf` holds class-major planes: plane c starts at pdf + c*n. `reps` has
// n_classes representative ranges. mean_out/var_out receive n values each.
void range_moments(const float* pdf, std::size_t n, std::size_t n_classes,
                   const float* reps, float* mean_out, float* var_out);

// In-place blend toward the uniform distribution:
//   p' = (1 - eps) * p + eps / n_classes
void blend_uniform(float* pdf, std::size_t n, std::size_t n_classes, float eps);

// One-hot class planes from a range image. `edges` has n_classes + 1
// ascending entries; the last may be +inf. Class 0 takes everything below
// edges[1] (sub-minimum ranges clamp to the nearest class); the last class
// takes everything at or above edges[n_classes - 1].
void bin_ranges(const float* range, std::size_t n, std::size_t n_classes,
                const float* edges, float* pdf_out);

// Per-pixel argmax over class planes; ties resolve to the lowest index.
void argmax_classes(const float* pdf, std::size_t n, std::size_t n_classes,
                    std::uint8_t* out);

// Motion-update pass over one contiguous row segment of map layers:
//   height[i] += dh
//   hvar[i]   += zvar + a*y*y + x_i*(c*y + b*x_i)   with x_i = x0 + i*step
//   xyvar[i]  += txyvar
// Unobserved cells hold NaN and stay NaN through the unconditional adds.
void motion_inflate(double* height, double* hvar, double* xyvar, std::size_t n,
                    double dh, double zvar, double txyvar,
                    double a, double b, double c,
                    double x0, double step, double y);

} // namespace reefmap::kernels
