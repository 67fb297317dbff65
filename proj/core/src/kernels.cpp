#include "valbench/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "valbench/error.hpp"

namespace valbench {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != rows * cols) {
    throw Error(ErrorKind::ShapeMismatch, "matrix data length does not match rows x cols");
  }
}

Matrix::Matrix(const ArrayF32& array)
    : rows(array.rows), cols(array.cols), data(array.data.begin(), array.data.end()) {}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
  if (top.cols != bottom.cols) {
    throw Error(ErrorKind::ShapeMismatch, "vstack: column counts differ (" + std::to_string(top.cols) +
                                              " vs " + std::to_string(bottom.cols) + ")");
  }
  Matrix out(top.rows + bottom.rows, top.cols);
  std::copy(top.data.begin(), top.data.end(), out.data.begin());
  std::copy(bottom.data.begin(), bottom.data.end(),
            out.data.begin() + static_cast<std::ptrdiff_t>(top.data.size()));
  return out;
}

Matrix softmax(const Matrix& logits, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorKind::InvalidArgument, "softmax temperature must be positive");
  }
  Matrix out(logits.rows, logits.cols);
  for (std::size_t r = 0; r < logits.rows; ++r) {
    const auto in = logits.row(r);
    auto dst = out.row(r);
    if (in.empty()) continue;
    const double peak = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      dst[c] = std::exp((in[c] - peak) / temperature);
      total += dst[c];
    }
    for (double& v : dst) v /= total;
  }
  return out;
}

double shannon_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v < 0.0 || std::isnan(v)) {
      throw Error(ErrorKind::InvalidArgument, "entropy of a vector with a negative entry");
    }
    if (v > 0.0) h -= v * std::log(v);
  }
  return std::max(h, 0.0);
}

double mean_row_entropy(const Matrix& probs) {
  if (probs.rows == 0) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < probs.rows; ++r) total += shannon_entropy(probs.row(r));
  return total / static_cast<double>(probs.rows);
}

NormalizedRows l2_normalize_rows(const Matrix& matrix) {
  NormalizedRows out{matrix, {}};
  for (std::size_t r = 0; r < matrix.rows; ++r) {
    auto row = out.matrix.row(r);
    double sq = 0.0;
    for (double v : row) sq += v * v;
    if (sq == 0.0) {
      out.zero_rows.push_back(r);
      continue;
    }
    const double norm = std::sqrt(sq);
    for (double& v : row) v /= norm;
  }
  return out;
}

std::vector<double> symmetric_eigenvalues(Matrix a) {
  const std::size_t n = a.rows;
  if (a.cols != n) throw Error(ErrorKind::ShapeMismatch, "eigenvalues of a non-square matrix");

  double scale = 0.0;
  for (double v : a.data) scale += v * v;
  const double threshold = scale * 1e-30;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= threshold) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = a(p, r) = c * arp - s * arq;
          a(r, q) = a(q, r) = c * arq + s * arp;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
      }
    }
  }

  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

double nuclear_norm(const Matrix& m) {
  const bool use_cols = m.cols <= m.rows;
  const std::size_t k = use_cols ? m.cols : m.rows;
  Matrix gram(k, k);
  if (use_cols) {
    for (std::size_t r = 0; r < m.rows; ++r) {
      const auto row = m.row(r);
      for (std::size_t i = 0; i < k; ++i) {
        const double ri = row[i];
        if (ri == 0.0) continue;
        for (std::size_t j = i; j < k; ++j) gram(i, j) += ri * row[j];
      }
    }
  } else {
    for (std::size_t i = 0; i < k; ++i) {
      const auto ri = m.row(i);
      for (std::size_t j = i; j < k; ++j) {
        const auto rj = m.row(j);
        double dot = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) dot += ri[c] * rj[c];
        gram(i, j) = dot;
      }
    }
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < i; ++j) gram(i, j) = gram(j, i);

  double total = 0.0;
  for (double lambda : symmetric_eigenvalues(std::move(gram))) total += std::sqrt(std::max(lambda, 0.0));
  return total;
}

Matrix pairwise_similarity(const Matrix& f) {
  for (std::size_t r = 0; r < f.rows; ++r) {
    double sq = 0.0;
    for (double v : f.row(r)) sq += v * v;
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-4) {
      throw Error(ErrorKind::DegenerateInput,
                  "pairwise_similarity: row " + std::to_string(r) + " is not L2-normalized");
    }
  }
  const std::size_t n = f.rows;
  Matrix x(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto fi = f.row(i);
    for (std::size_t j = i; j < n; ++j) {
      const auto fj = f.row(j);
      double dot = 0.0;
      for (std::size_t c = 0; c < f.cols; ++c) dot += fi[c] * fj[c];
      dot = std::clamp(dot, -1.0, 1.0);
      x(i, j) = x(j, i) = dot;
    }
  }
  return x;
}

std::vector<std::int64_t> dense_rank(std::span<const double> values) {
  std::vector<double> unique(values.begin(), values.end());
  for (double v : unique) {
    if (std::isnan(v)) throw Error(ErrorKind::InvalidArgument, "dense_rank: NaN input");
  }
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<std::int64_t> ranks(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    ranks[i] = std::lower_bound(unique.begin(), unique.end(), values[i]) - unique.begin() + 1;
  }
  return ranks;
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

std::size_t argmax(std::span<const float> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace valbench
