#include "edagent/quantlab/quantlab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace edagent::quantlab {

namespace {

// Normal quantiles at linspace(0.9677083333333334, 0.5, 9)[:-1] (negated) and
// linspace(0.9677083333333334, 0.5, 8)[:-1], plus 0, divided by the largest
// magnitude. tests/quantlab_test.cpp recomputes them from erfc.
constexpr Codebook kNf4 = {
    -1.0,
    -0.7229566441594734,
    -0.5626168879699849,
    -0.44070973186421625,
    -0.3379151367131279,
    -0.2461122513474594,
    -0.1609301443802907,
    -0.07958031495840909,
    0.0,
    0.09104997598578049,
    0.1847734028004556,
    0.28444130892108205,
    0.3949174259199071,
    0.5250729594465005,
    0.696192805632343,
    1.0,
};

Codebook make_uniform() {
  Codebook c{};
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = -1.0 + 2.0 * static_cast<double>(i) / 15.0;
  return c;
}

std::uint8_t nearest(const Codebook& cb, double x) {
  std::uint8_t best = 0;
  double best_d = std::abs(x - cb[0]);
  for (std::uint8_t i = 1; i < cb.size(); ++i) {
    const double d = std::abs(x - cb[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::uint8_t zero_index(const Codebook& cb) { return nearest(cb, 0.0); }

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

void check_shape(const char* what, std::size_t er, std::size_t ec, std::size_t gr, std::size_t gc) {
  if (er != gr || ec != gc) {
    throw ShapeMismatch(std::string(what) + " " + shape_string(er, ec), std::string(what) + " " + shape_string(gr, gc));
  }
}

void check_adapter(const BlockQuantized& q, const LowRankAdapter& a) {
  check_shape("L1", q.rows, a.l1.cols, a.l1.rows, a.l1.cols);
  check_shape("L2", a.l1.cols, q.cols, a.l2.rows, a.l2.cols);
}

}  // namespace

ShapeMismatch::ShapeMismatch(std::string expected, std::string got)
    : QuantError("ShapeMismatch: expected " + expected + ", got " + got),
      expected_(std::move(expected)),
      got_(std::move(got)) {}

NonFiniteInput::NonFiniteInput(std::size_t index)
    : QuantError("NonFiniteInput: element " + std::to_string(index) + " is not finite"), index_(index) {}

std::string shape_string(std::size_t rows, std::size_t cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

LowRankAdapter LowRankAdapter::zeros(std::size_t d, std::size_t r, std::size_t k) {
  return LowRankAdapter{Matrix(d, r), Matrix(r, k)};
}

const Codebook& nf4_codebook() { return kNf4; }

const Codebook& uniform_codebook() {
  static const Codebook c = make_uniform();
  return c;
}

BlockQuantized quantize(const Matrix& w) { return quantize(w, kNf4); }

BlockQuantized quantize(const Matrix& w, const Codebook& codebook) {
  if (w.data.size() != w.rows * w.cols) throw ShapeMismatch(shape_string(w.rows, w.cols), std::to_string(w.data.size()) + " elements");
  for (std::size_t i = 0; i < w.data.size(); ++i) {
    if (!std::isfinite(w.data[i])) throw NonFiniteInput(i);
  }

  BlockQuantized q;
  q.rows = w.rows;
  q.cols = w.cols;
  q.codebook = codebook;
  const std::size_t n = w.data.size();
  const std::size_t blocks = ceil_div(n, kBlockW);

  std::vector<double> absmax(blocks, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t end = std::min(n, (b + 1) * kBlockW);
    for (std::size_t i = b * kBlockW; i < end; ++i) absmax[b] = std::max(absmax[b], std::abs(w.data[i]));
  }

  // Second level: affine 8-bit codes per group of kBlockC constants.
  q.c2_codes.assign(blocks, 0);
  q.c1.assign(ceil_div(blocks, kBlockC), C1{});
  for (std::size_t g = 0; g < q.c1.size(); ++g) {
    const std::size_t begin = g * kBlockC;
    const std::size_t end = std::min(blocks, begin + kBlockC);
    const auto [lo, hi] = std::minmax_element(absmax.begin() + static_cast<std::ptrdiff_t>(begin),
                                              absmax.begin() + static_cast<std::ptrdiff_t>(end));
    C1 c{(*hi - *lo) / 255.0, *lo};
    q.c1[g] = c;
    for (std::size_t b = begin; b < end; ++b) {
      double code = 0.0;
      if (c.scale > 0.0) code = std::clamp(std::round((absmax[b] - c.zero_point) / c.scale), 0.0, 255.0);
      auto k = static_cast<std::uint8_t>(code);
      // A nonzero block must not collapse to an all-zero block.
      if (absmax[b] > 0.0 && k == 0 && c.zero_point == 0.0) k = 1;
      q.c2_codes[b] = k;
    }
  }

  // Weights are coded against the exact absmax.
  q.codes.assign(n, zero_index(codebook));
  for (std::size_t b = 0; b < blocks; ++b) {
    if (absmax[b] == 0.0) continue;
    const std::size_t end = std::min(n, (b + 1) * kBlockW);
    for (std::size_t i = b * kBlockW; i < end; ++i) q.codes[i] = nearest(codebook, w.data[i] / absmax[b]);
  }
  return q;
}

std::vector<double> dequantize_constants(const BlockQuantized& q) {
  std::vector<double> absmax(q.c2_codes.size());
  for (std::size_t b = 0; b < absmax.size(); ++b) {
    const C1& c = q.c1[b / kBlockC];
    absmax[b] = c.zero_point + static_cast<double>(q.c2_codes[b]) * c.scale;
  }
  return absmax;
}

Matrix double_dequantize(const BlockQuantized& q) {
  const std::vector<double> absmax = dequantize_constants(q);
  Matrix w(q.rows, q.cols);
  for (std::size_t i = 0; i < q.codes.size(); ++i) w.data[i] = q.codebook[q.codes[i]] * absmax[i / kBlockW];
  return w;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw ShapeMismatch("inner dimension " + std::to_string(a.cols), std::to_string(b.rows));
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  check_shape("addend", a.rows, a.cols, b.rows, b.cols);
  Matrix out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  return out;
}

Matrix adapter_forward(const Matrix& x, const BlockQuantized& q, const LowRankAdapter& adapter) {
  check_adapter(q, adapter);
  check_shape("X", x.rows, q.rows, x.rows, x.cols);
  return add(matmul(x, double_dequantize(q)), matmul(matmul(x, adapter.l1), adapter.l2));
}

Matrix merge_weights(const BlockQuantized& q, const LowRankAdapter& adapter) {
  check_adapter(q, adapter);
  return add(double_dequantize(q), matmul(adapter.l1, adapter.l2));
}

double relative_l2_error(const Matrix& a, const Matrix& b) {
  check_shape("operand", b.rows, b.cols, a.rows, a.cols);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    num += d * d;
    den += b.data[i] * b.data[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

double max_relative_discrepancy(const Matrix& a, const Matrix& b) {
  check_shape("operand", b.rows, b.cols, a.rows, a.cols);
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    diff = std::max(diff, std::abs(a.data[i] - b.data[i]));
    scale = std::max(scale, std::abs(b.data[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

Matrix normal_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double sigma) {
  std::mt19937_64 rng(seed);
  constexpr double kUnit = 0x1.0p-53;
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.data.size(); i += 2) {
    const double u1 = static_cast<double>((rng() >> 11) + 1) * kUnit;
    const double u2 = static_cast<double>(rng() >> 11) * kUnit;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    m.data[i] = sigma * r * std::cos(t);
    if (i + 1 < m.data.size()) m.data[i + 1] = sigma * r * std::sin(t);
  }
  return m;
}

}  // namespace edagent::quantlab
