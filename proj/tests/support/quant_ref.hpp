#pragma once

// Scalar reference for blockwise NF4 with double-quantized constants. Written
// independently of the library: plain loops over a flat vector, its own
// codebook derived from the normal CDF by bisection.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace quantref {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double normal_ppf(double p) {
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 2000 && lo < hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (normal_cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out;
  const double step = (b - a) / (n - 1);
  for (int i = 0; i < n; ++i) out.push_back(i == n - 1 ? b : a + i * step);
  return out;
}

inline std::array<double, 16> derive_nf4() {
  const double offset = 0.5 * (1.0 / 32.0 + 1.0 / 30.0);
  std::vector<double> v;
  const auto pos = linspace(1.0 - offset, 0.5, 8);
  for (int i = 0; i < 7; ++i) v.push_back(normal_ppf(pos[static_cast<std::size_t>(i)]));
  const auto neg = linspace(1.0 - offset, 0.5, 9);
  for (int i = 0; i < 8; ++i) v.push_back(-normal_ppf(neg[static_cast<std::size_t>(i)]));
  v.push_back(0.0);
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  for (double& x : v) x /= m;
  std::sort(v.begin(), v.end());
  std::array<double, 16> out{};
  for (std::size_t i = 0; i < 16; ++i) out[i] = v[i];
  return out;
}

struct Quantized {
  std::vector<int> codes;
  std::vector<int> c2;
  std::vector<double> c1_scale;
  std::vector<double> c1_zero;
};

inline Quantized quantize(const std::vector<double>& w, const std::array<double, 16>& cb) {
  Quantized q;
  const std::size_t n = w.size();
  const std::size_t nb = (n + 63) / 64;
  std::vector<double> amax(nb, 0.0);
  for (std::size_t i = 0; i < n; ++i) amax[i / 64] = std::max(amax[i / 64], std::fabs(w[i]));

  const std::size_t ng = (nb + 255) / 256;
  q.c2.resize(nb);
  for (std::size_t g = 0; g < ng; ++g) {
    double lo = amax[g * 256];
    double hi = lo;
    for (std::size_t b = g * 256; b < nb && b < (g + 1) * 256; ++b) {
      lo = std::min(lo, amax[b]);
      hi = std::max(hi, amax[b]);
    }
    const double scale = (hi - lo) / 255.0;
    q.c1_scale.push_back(scale);
    q.c1_zero.push_back(lo);
    for (std::size_t b = g * 256; b < nb && b < (g + 1) * 256; ++b) {
      int k = 0;
      if (scale > 0.0) {
        double r = std::round((amax[b] - lo) / scale);
        if (r < 0) r = 0;
        if (r > 255) r = 255;
        k = static_cast<int>(r);
      }
      if (k == 0 && lo == 0.0 && amax[b] > 0.0) k = 1;
      q.c2[b] = k;
    }
  }

  int zero = 0;
  for (int j = 0; j < 16; ++j) {
    if (cb[static_cast<std::size_t>(j)] == 0.0) zero = j;
  }
  q.codes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = amax[i / 64];
    if (a == 0.0) {
      q.codes[i] = zero;
      continue;
    }
    const double x = w[i] / a;
    int best = 0;
    for (int j = 1; j < 16; ++j) {
      if (std::fabs(x - cb[static_cast<std::size_t>(j)]) < std::fabs(x - cb[static_cast<std::size_t>(best)])) best = j;
    }
    q.codes[i] = best;
  }
  return q;
}

inline std::vector<double> dequantize(const Quantized& q, const std::array<double, 16>& cb) {
  std::vector<double> out(q.codes.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t b = i / 64;
    const std::size_t g = b / 256;
    const double a = q.c1_zero[g] + q.c2[b] * q.c1_scale[g];
    out[i] = cb[static_cast<std::size_t>(q.codes[i])] * a;
  }
  return out;
}

}  // namespace quantref
