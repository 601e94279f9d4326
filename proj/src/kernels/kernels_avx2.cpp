// AVX2 kernel variants. Compiled with -mavx2 (no -mfma): every arithmetic
// step mirrors the scalar reference one-to-one, so outputs are bit-identical.

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace reefmap::kernels::detail {

void range_moments_avx2(const float* pdf, std::size_t n, std::size_t n_classes,
                        const float* reps, float* mean_out, float* var_out) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 mean = _mm256_setzero_ps();
    for (std::size_t c = 0; c < n_classes; ++c) {
      const __m256 p = _mm256_loadu_ps(pdf + c * n + i);
      const __m256 rep = _mm256_set1_ps(reps[c]);
      mean = _mm256_add_ps(mean, _mm256_mul_ps(rep, p));
    }
    __m256 var = _mm256_setzero_ps();
    for (std::size_t c = 0; c < n_classes; ++c) {
      const __m256 p = _mm256_loadu_ps(pdf + c * n + i);
      const __m256 d = _mm256_sub_ps(_mm256_set1_ps(reps[c]), mean);
      __m256 t = _mm256_mul_ps(d, d);
      t = _mm256_mul_ps(t, p);
      var = _mm256_add_ps(var, t);
    }
    _mm256_storeu_ps(mean_out + i, mean);
    _mm256_storeu_ps(var_out + i, var);
  }
  // Remainder, identical to the scalar path.
  for (; i < n; ++i) {
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

void blend_uniform_avx2(float* pdf, std::size_t n, std::size_t n_classes, float eps) {
  const float a = 1.0f - eps;
  const float b = eps / static_cast<float>(n_classes);
  const __m256 av = _mm256_set1_ps(a);
  const __m256 bv = _mm256_set1_ps(b);
  const std::size_t total = n * n_classes;
  std::size_t i = 0;
  for (; i + 8 <= total; i += 8) {
    const __m256 p = _mm256_loadu_ps(pdf + i);
    _mm256_storeu_ps(pdf + i, _mm256_add_ps(_mm256_mul_ps(av, p), bv));
  }
  for (; i < total; ++i) {
    pdf[i] = a * pdf[i] + b;
  }
}

void bin_ranges_avx2(const float* range, std::size_t n, std::size_t n_classes,
                     const float* edges, float* pdf_out) {
  const __m256 one = _mm256_set1_ps(1.0f);
  for (std::size_t c = 0; c < n_classes; ++c) {
    const bool first = c == 0;
    const bool last = c + 1 == n_classes;
    const __m256 lo = _mm256_set1_ps(edges[c]);
    const __m256 hi = _mm256_set1_ps(edges[c + 1]);
    float* plane = pdf_out + c * n;
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
      const __m256 r = _mm256_loadu_ps(range + i);
      __m256 mask;
      if (first && last) {
        mask = _mm256_castsi256_ps(_mm256_set1_epi32(-1));
      } else if (first) {
        mask = _mm256_cmp_ps(r, hi, _CMP_LT_OQ);
      } else if (last) {
        mask = _mm256_cmp_ps(r, lo, _CMP_GE_OQ);
      } else {
        mask = _mm256_and_ps(_mm256_cmp_ps(r, lo, _CMP_GE_OQ),
                             _mm256_cmp_ps(r, hi, _CMP_LT_OQ));
      }
      _mm256_storeu_ps(plane + i, _mm256_and_ps(mask, one));
    }
    for (; i < n; ++i) {
      const float r = range[i];
      const bool in = (first || r >= edges[c]) && (last || r < edges[c + 1]);
      plane[i] = in ? 1.0f : 0.0f;
    }
  }
}

void argmax_classes_avx2(const float* pdf, std::size_t n, std::size_t n_classes,
                         std::uint8_t* out) {
  std::size_t i = 0;
  alignas(32) std::int32_t idx_buf[8];
  for (; i + 8 <= n; i += 8) {
    __m256 best = _mm256_loadu_ps(pdf + i);
    __m256i idx = _mm256_setzero_si256();
    for (std::size_t c = 1; c < n_classes; ++c) {
      const __m256 v = _mm256_loadu_ps(pdf + c * n + i);
      const __m256 gt = _mm256_cmp_ps(v, best, _CMP_GT_OQ);
      best = _mm256_blendv_ps(best, v, gt);
      idx = _mm256_blendv_epi8(idx, _mm256_set1_epi32(static_cast<int>(c)),
                               _mm256_castps_si256(gt));
    }
    _mm256_store_si256(reinterpret_cast<__m256i*>(idx_buf), idx);
    for (int k = 0; k < 8; ++k) {
      out[i + static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(idx_buf[k]);
    }
  }
  for (; i < n; ++i) {
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

void motion_inflate_avx2(double* height, double* hvar, double* xyvar, std::size_t n,
                         double dh, double zvar, double txyvar,
                         double a, double b, double c,
                         double x0, double step, double y) {
  const double ayy = a * y * y;
  const double cy = c * y;
  const __m256d dhv = _mm256_set1_pd(dh);
  const __m256d zv = _mm256_set1_pd(zvar);
  const __m256d tv = _mm256_set1_pd(txyvar);
  const __m256d ayyv = _mm256_set1_pd(ayy);
  const __m256d cyv = _mm256_set1_pd(cy);
  const __m256d bv = _mm256_set1_pd(b);
  const __m256d x0v = _mm256_set1_pd(x0);
  const __m256d stepv = _mm256_set1_pd(step);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d iv = _mm256_set_pd(static_cast<double>(i + 3), static_cast<double>(i + 2),
                                     static_cast<double>(i + 1), static_cast<double>(i));
    const __m256d x = _mm256_add_pd(x0v, _mm256_mul_pd(iv, stepv));
    _mm256_storeu_pd(height + i, _mm256_add_pd(_mm256_loadu_pd(height + i), dhv));
    // zvar + (ayy + x*(cy + b*x))
    __m256d inner = _mm256_add_pd(cyv, _mm256_mul_pd(bv, x));
    inner = _mm256_add_pd(ayyv, _mm256_mul_pd(x, inner));
    inner = _mm256_add_pd(zv, inner);
    _mm256_storeu_pd(hvar + i, _mm256_add_pd(_mm256_loadu_pd(hvar + i), inner));
    _mm256_storeu_pd(xyvar + i, _mm256_add_pd(_mm256_loadu_pd(xyvar + i), tv));
  }
  for (; i < n; ++i) {
    const double x = x0 + static_cast<double>(i) * step;
    height[i] += dh;
    hvar[i] += zvar + (ayy + x * (cy + b * x));
    xyvar[i] += txyvar;
  }
}

} // namespace reefmap::kernels::detail
