#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "valbench/checkpoint.hpp"

namespace valbench {

/// Row-major 64-bit matrix used for all computation. Storage stays 32-bit
/// (ArrayF32); widening on entry keeps long sums accurate.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values);
  explicit Matrix(const ArrayF32& array);

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
};

/// Rows stacked: `top` then `bottom`. Column counts must agree.
Matrix vstack(const Matrix& top, const Matrix& bottom);

/// Row-wise softmax of `logits / temperature`; subtracts the row max first.
/// The result is a probability matrix (rows sum to 1).
Matrix softmax(const Matrix& logits, double temperature = 1.0);

/// Natural-log entropy of a probability vector with 0 log 0 = 0.
double shannon_entropy(std::span<const double> p);

/// Mean of row entropies of a probability matrix.
double mean_row_entropy(const Matrix& probs);

struct NormalizedRows {
  Matrix matrix;
  std::vector<std::size_t> zero_rows;  // passed through unchanged
};

NormalizedRows l2_normalize_rows(const Matrix& matrix);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(Matrix symmetric);

/// Sum of singular values, from the eigenvalues of the smaller Gram matrix.
double nuclear_norm(const Matrix& matrix);

/// N x N cosine similarity of L2-normalized rows. Throws DegenerateInput when a
/// row norm deviates from 1 by more than 1e-4.
Matrix pairwise_similarity(const Matrix& normalized_rows);

/// Dense rank (1 = lowest, ties share, consecutive). Throws on NaN.
std::vector<std::int64_t> dense_rank(std::span<const double> values);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);
std::size_t argmax(std::span<const float> values);

}  // namespace valbench
