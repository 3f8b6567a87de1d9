#include "zspeedl/matrix.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "zspeedl/errors.hpp"

namespace zspeedl {

namespace {

std::atomic<unsigned> g_threads{1};

// Splits [0, n) into contiguous blocks, one per worker. `work` is a rough
// operation count used to skip threading for small products.
template <typename Fn>
void parallel_rows(std::size_t n, double work, Fn&& fn) {
  unsigned t = g_threads.load(std::memory_order_relaxed);
  if (t <= 1 || n < 2 || work < 2e6) {
    fn(std::size_t{0}, n);
    return;
  }
  t = static_cast<unsigned>(std::min<std::size_t>(t, n));
  std::vector<std::jthread> workers;
  workers.reserve(t - 1);
  const std::size_t chunk = (n + t - 1) / t;
  for (unsigned w = 1; w < t; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    workers.emplace_back([&fn, b, e] { fn(b, e); });
  }
  fn(std::size_t{0}, std::min(n, chunk));
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DataError(std::string(what) + ": shape mismatch");
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) throw DataError("Matrix: value count does not match shape");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DataError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DataError("matmul: inner dimension mismatch");
  Matrix c(a.rows(), b.cols());
  const std::size_t k = a.cols();
  const std::size_t m = b.cols();
  parallel_rows(a.rows(), double(a.rows()) * k * m, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double* out = c.data() + i * m;
      const double* arow = a.data() + i * k;
      for (std::size_t p = 0; p < k; ++p) {
        const double s = arow[p];
        if (s == 0.0) continue;
        const double* brow = b.data() + p * m;
        for (std::size_t j = 0; j < m; ++j) out[j] += s * brow[j];
      }
    }
  });
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DataError("matmul_tn: inner dimension mismatch");
  Matrix c(a.cols(), b.cols());
  const std::size_t n = a.rows();
  const std::size_t d = a.cols();
  const std::size_t m = b.cols();
  parallel_rows(d, double(n) * d * m, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = 0; p < n; ++p) {
      const double* arow = a.data() + p * d;
      const double* brow = b.data() + p * m;
      for (std::size_t i = begin; i < end; ++i) {
        const double s = arow[i];
        if (s == 0.0) continue;
        double* out = c.data() + i * m;
        for (std::size_t j = 0; j < m; ++j) out[j] += s * brow[j];
      }
    }
  });
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw DataError("matmul_nt: inner dimension mismatch");
  Matrix c(a.rows(), b.rows());
  const std::size_t k = a.cols();
  const std::size_t m = b.rows();
  parallel_rows(a.rows(), double(a.rows()) * k * m, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double* arow = a.data() + i * k;
      for (std::size_t j = 0; j < m; ++j) {
        const double* brow = b.data() + j * k;
        // Four interleaved partial sums in a fixed order.
        double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
        std::size_t p = 0;
        for (; p + 4 <= k; p += 4) {
          s0 += arow[p] * brow[p];
          s1 += arow[p + 1] * brow[p + 1];
          s2 += arow[p + 2] * brow[p + 2];
          s3 += arow[p + 3] * brow[p + 3];
        }
        for (; p < k; ++p) s0 += arow[p] * brow[p];
        c(i, j) = (s0 + s1) + (s2 + s3);
      }
    }
  });
  return c;
}

Matrix gram(const Matrix& a) {
  const std::size_t n = a.rows();
  const std::size_t d = a.cols();
  Matrix c(d, d);
  parallel_rows(d, double(n) * d * d / 2, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = 0; p < n; ++p) {
      const double* arow = a.data() + p * d;
      for (std::size_t i = begin; i < end; ++i) {
        const double s = arow[i];
        if (s == 0.0) continue;
        double* out = c.data() + i * d;
        for (std::size_t j = i; j < d; ++j) out[j] += s * arow[j];
      }
    }
  });
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j) c(i, j) = c(j, i);
  return c;
}

Matrix add(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "add");
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] += b.data()[i];
  return c;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "subtract");
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] -= b.data()[i];
  return c;
}

Matrix scaled(const Matrix& a, double s) {
  Matrix c = a;
  for (double& v : c.values()) v *= s;
  return c;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  return std::sqrt(s);
}

double max_abs_asymmetry(const Matrix& a) {
  if (a.rows() != a.cols()) throw DataError("matrix is not square");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - a(j, i)));
  return worst;
}

Matrix select_rows(const Matrix& a, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), a.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= a.rows()) throw DataError("select_rows: index out of range");
    std::copy_n(a.row(idx[r]).begin(), a.cols(), out.row(r).begin());
  }
  return out;
}

void set_num_threads(unsigned n) { g_threads.store(std::max(1u, n), std::memory_order_relaxed); }

unsigned num_threads() noexcept { return g_threads.load(std::memory_order_relaxed); }

}  // namespace zspeedl
