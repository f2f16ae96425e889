#pragma once

// Blockwise 4-bit NormalFloat quantization with double-quantized block
// constants, and the quantized-base plus low-rank adapter forward pass.
// Everything is computed in double precision.

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace edagent::quantlab {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::size_t size() const noexcept { return data.size(); }

  static Matrix identity(std::size_t n);
  bool operator==(const Matrix&) const = default;
};

using Codebook = std::array<double, 16>;

class QuantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeMismatch : public QuantError {
 public:
  ShapeMismatch(std::string expected, std::string got);
  const std::string& expected() const noexcept { return expected_; }
  const std::string& got() const noexcept { return got_; }

 private:
  std::string expected_;
  std::string got_;
};

class NonFiniteInput : public QuantError {
 public:
  explicit NonFiniteInput(std::size_t index);
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// The NF4 table, ascending. Index 8 holds the exact zero.
const Codebook& nf4_codebook();
/// 16 evenly spaced levels on [-1, 1]; the comparison baseline.
const Codebook& uniform_codebook();

inline constexpr std::size_t kBlockW = 64;
inline constexpr std::size_t kBlockC = 256;

/// Second-level constants for one group of kBlockC absmax values:
/// absmax = zero_point + code * scale.
struct C1 {
  double scale = 0.0;
  double zero_point = 0.0;
  bool operator==(const C1&) const = default;
};

struct BlockQuantized {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> codes;     // one 4-bit index per weight
  std::vector<std::uint8_t> c2_codes;  // one per kBlockW weights
  std::vector<C1> c1;                  // one per kBlockC blocks
  Codebook codebook{};

  std::size_t block_count() const noexcept { return c2_codes.size(); }
};

struct LowRankAdapter {
  Matrix l1;  // d x r
  Matrix l2;  // r x k
  std::size_t rank() const noexcept { return l1.cols; }

  static LowRankAdapter zeros(std::size_t d, std::size_t r, std::size_t k);
};

/// Throws NonFiniteInput when W holds a NaN or infinity.
BlockQuantized quantize(const Matrix& w);
BlockQuantized quantize(const Matrix& w, const Codebook& codebook);

/// Block absmax values recovered from (c1, c2_codes).
std::vector<double> dequantize_constants(const BlockQuantized& q);
Matrix double_dequantize(const BlockQuantized& q);

/// X * deq(q) + (X * L1) * L2. Throws ShapeMismatch.
Matrix adapter_forward(const Matrix& x, const BlockQuantized& q, const LowRankAdapter& adapter);
/// deq(q) + L1 * L2. Throws ShapeMismatch.
Matrix merge_weights(const BlockQuantized& q, const LowRankAdapter& adapter);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);

/// ||a - b||_2 / ||b||_2, or ||a||_2 when b is zero.
double relative_l2_error(const Matrix& a, const Matrix& b);
/// max|a - b| / max|b|, or max|a - b| when b is zero.
double max_relative_discrepancy(const Matrix& a, const Matrix& b);

/// Standard normal samples from mt19937_64 via Box-Muller, identical on
/// every platform.
Matrix normal_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double sigma = 1.0);

std::string shape_string(std::size_t rows, std::size_t cols);

}  // namespace edagent::quantlab
