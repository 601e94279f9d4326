// Scalar reference kernels. This translation unit is compiled with
// -ffp-contract=off so the operation sequence matches the SIMD variants
// exactly (no compiler-introduced FMA).

#include "kernels_impl.hpp"

namespace reefmap::kernels::detail {

void range_moments_scalar(const float* pdf, std::size_t n, std::size_t n_classes,
                          const float* reps, float* mean_out, float* var_out) {
  for (std::size_t i = 0; i < n; ++i) {
    float mean = 0.0f;
    for (std::size_t c = 0; c < n_classes; ++c) {
      mean += reps[c] * pdf[c * n + i];
    }
    float var = 0.0f;
    for (std::size_t c = 0; c < n_classes; ++c) {
      float d = reps[c] - mean;
      float t = d * d;
      t = t * pdf[c * n + i];
      var += t;
    }
    mean_out[i] = mean;
    var_out[i] = var;
  }
}

void blend_uniform_scalar(float* pdf, std::size_t n, std::size_t n_classes, float eps) {
  const float a = 1.0f - eps;
  const float b = eps / static_cast<float>(n_classes);
  const std::size_t total = n * n_classes;
  for (std::size_t i = 0; i < total; ++i) {
    pdf[i] = a * pdf[i] + b;
  }
}

void bin_ranges_scalar(const float* range, std::size_t n, std::size_t n_classes,
                       const float* edges, float* pdf_out) {
  for (std::size_t c = 0; c < n_classes; ++c) {
    const bool first = c == 0;
    const bool last = c + 1 == n_classes;
    const float lo = edges[c];
    const float hi = edges[c + 1];
    float* plane = pdf_out + c * n;
    for (std::size_t i = 0; i < n; ++i) {
      const float r = range[i];
      const bool in = (first || r >= lo) && (last || r < hi);
      plane[i] = in ? 1.0f : 0.0f;
    }
  }
}

void argmax_classes_scalar(const float* pdf, std::size_t n, std::size_t n_classes,
                           std::uint8_t* out) {
  for (std::size_t i = 0; i < n; ++i) {
    float best = pdf[i];
    std::uint8_t idx = 0;
    for (std::size_t c = 1; c < n_classes; ++c) {
      const float v = pdf[c * n + i];
      if (v > best) {
        best = v;
        idx = static_cast<std::uint8_t>(c);
      }
    }
    out[i] = idx;
  }
}

void motion_inflate_scalar(double* height, double* hvar, double* xyvar, std::size_t n,
                           double dh, double zvar, double txyvar,
                           double a, double b, double c,
                           double x0, double step, double y) {
  const double ayy = a * y * y;
  const double cy = c * y;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = x0 + static_cast<double>(i) * step;
    height[i] += dh;
    hvar[i] += zvar + (ayy + x * (cy + b * x));
    xyvar[i] += txyvar;
  }
}

} // namespace reefmap::kernels::detail
