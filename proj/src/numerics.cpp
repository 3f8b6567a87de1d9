#include "zspeedl/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

#include "zspeedl/errors.hpp"

namespace zspeedl::numerics {

namespace {

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

void require_symmetric(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) throw DataError(std::string(what) + ": matrix is not square");
  if (max_abs_asymmetry(a) > 1e-8 * std::max(1.0, max_abs(a)))
    throw DataError(std::string(what) + ": matrix is not symmetric");
}

// Solves (L L^T) X = B in place on B.
void cholesky_solve_in_place(const Matrix& l, Matrix& b) {
  const std::size_t n = l.rows();
  const std::size_t m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* bi = b.data() + i * m;
    for (std::size_t k = 0; k < i; ++k) {
      const double lik = l(i, k);
      if (lik == 0.0) continue;
      const double* bk = b.data() + k * m;
      for (std::size_t j = 0; j < m; ++j) bi[j] -= lik * bk[j];
    }
    const double inv = 1.0 / l(i, i);
    for (std::size_t j = 0; j < m; ++j) bi[j] *= inv;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double* bi = b.data() + ii * m;
    for (std::size_t k = ii + 1; k < n; ++k) {
      const double lki = l(k, ii);
      if (lki == 0.0) continue;
      const double* bk = b.data() + k * m;
      for (std::size_t j = 0; j < m; ++j) bi[j] -= lki * bk[j];
    }
    const double inv = 1.0 / l(ii, ii);
    for (std::size_t j = 0; j < m; ++j) bi[j] *= inv;
  }
}

void warn_zero_norm_once() {
  static std::atomic<bool> warned{false};
  if (!warned.exchange(true))
    std::cerr << "warning: cosine distance with a zero-norm row; using distance 1\n";
}

}  // namespace

Matrix cholesky(const Matrix& a) {
  const std::size_t n = a.rows();
  require_symmetric(a, "cholesky");
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* li = l.data() + i * n;
    for (std::size_t j = 0; j <= i; ++j) {
      const double* lj = l.data() + j * n;
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      if (i == j) {
        if (!(s > 0.0) || !std::isfinite(s))
          throw NumericalError("cholesky: matrix is not positive definite (pivot " + std::to_string(i) +
                               "); increase the ridge term");
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return l;
}

Matrix ridge_solve(const Matrix& a, double gamma, const Matrix& b) {
  require_symmetric(a, "ridge_solve");
  if (!(gamma >= 0.0)) throw UsageError("ridge_solve: gamma must be nonnegative");
  if (b.rows() != a.rows()) throw DataError("ridge_solve: right-hand side row count mismatch");
  Matrix reg = a;
  for (std::size_t i = 0; i < reg.rows(); ++i) reg(i, i) += gamma;
  Matrix l;
  try {
    l = cholesky(reg);
  } catch (const NumericalError&) {
    throw NumericalError("ridge_solve: A + gamma I is not positive definite (gamma = " + std::to_string(gamma) +
                         "); use a larger gamma");
  }
  Matrix x = b;
  cholesky_solve_in_place(l, x);
  // One step of iterative refinement.
  Matrix r = subtract(b, matmul(reg, x));
  cholesky_solve_in_place(l, r);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] += r.data()[i];
  return x;
}

EigDecomp sym_eig(const Matrix& m) {
  require_symmetric(m, "sym_eig");
  const std::size_t n = m.rows();
  EigDecomp out;
  if (n == 0) return out;

  // vt holds the transformation transposed: vt[j*n + k] is V(k, j), so the
  // inner loops over k run along contiguous memory.
  std::vector<double> vt(m.values().begin(), m.values().end());
  auto V = [&](std::size_t r, std::size_t c) -> double& { return vt[c * n + r]; };
  std::vector<double> d(n), e(n);

  // Householder reduction to tridiagonal form.
  for (std::size_t j = 0; j < n; ++j) d[j] = V(n - 1, j);
  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
        V(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        V(j, i) = f;
        g = e[j] + V(j, j) * f;
        double* col = &vt[j * n];
        for (std::size_t k = j + 1; k < i; ++k) {
          g += col[k] * d[k];
          e[k] += col[k] * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        double* col = &vt[j * n];
        for (std::size_t k = j; k < i; ++k) col[k] -= (f * e[k] + g * d[k]);
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  // Accumulate transformations.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    V(n - 1, i) = V(i, i);
    V(i, i) = 1.0;
    const double h = d[i + 1];
    double* next = &vt[(i + 1) * n];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = next[k] / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double* col = &vt[j * n];
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += next[k] * col[k];
        for (std::size_t k = 0; k <= i; ++k) col[k] -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) next[k] = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = V(n - 1, j);
    V(n - 1, j) = 0.0;
  }
  V(n - 1, n - 1) = 1.0;
  e[0] = 0.0;

  // Implicit-shift QL on the tridiagonal matrix.
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  const std::size_t iteration_cap = 30 * n;
  std::size_t iterations = 0;
  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t mm = l;
    while (mm < n) {
      if (std::abs(e[mm]) <= eps * tst1) break;
      ++mm;
    }
    if (mm == n) mm = n - 1;
    if (mm > l) {
      do {
        if (++iterations > iteration_cap)
          throw NumericalError("sym_eig: no convergence within " + std::to_string(iteration_cap) + " QL iterations");
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[mm];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = mm; i-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          double* vi = &vt[i * n];
          double* vi1 = &vt[(i + 1) * n];
          for (std::size_t k = 0; k < n; ++k) {
            const double t = vi1[k];
            vi1[k] = s * vi[k] + c * t;
            vi[k] = c * vi[k] - s * t;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }

  // Ascending order; stable with respect to the original position.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = d[order[c]];
    const double* src = &vt[order[c] * n];
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = src[r];
  }
  return out;
}

Matrix solve_sylvester(const EigDecomp& a, const EigDecomp& b, const Matrix& c) {
  const std::size_t k = a.values.size();
  const std::size_t d = b.values.size();
  if (c.rows() != k || c.cols() != d) throw DataError("solve_sylvester: C has the wrong shape");
  double max_a = 0.0, max_b = 0.0;
  for (double v : a.values) max_a = std::max(max_a, std::abs(v));
  for (double v : b.values) max_b = std::max(max_b, std::abs(v));
  // Guards denominators of (near-)null eigenpairs; exact elsewhere.
  const double eps = 1e-8 * (max_a + max_b);

  Matrix rotated = matmul(matmul_tn(a.vectors, c), b.vectors);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double den = a.values[i] + b.values[j];
      if (den < eps) den += eps;
      if (!(den >= 1e-10))
        throw NumericalError("solve_sylvester: singular system (alpha_" + std::to_string(i) + " + beta_" +
                             std::to_string(j) + " = " + std::to_string(a.values[i] + b.values[j]) +
                             "); use a larger lambda");
      rotated(i, j) /= den;
    }
  }
  return matmul(a.vectors, matmul_nt(rotated, b.vectors));
}

Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c) {
  if (c.rows() != a.rows() || c.cols() != b.rows()) throw DataError("solve_sylvester: C has the wrong shape");
  return solve_sylvester(sym_eig(a), sym_eig(b), c);
}

double sylvester_residual(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& w) {
  const Matrix r = subtract(add(matmul(a, w), matmul(w, b)), c);
  const double cn = frobenius_norm(c);
  const double rn = frobenius_norm(r);
  return cn > 0.0 ? rn / cn : rn;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double mx = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double& v : out) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

std::string_view to_string(Metric m) noexcept {
  return m == Metric::euclidean ? "euclidean" : "cosine";
}

Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::euclidean;
  if (name == "cosine") return Metric::cosine;
  throw UsageError("unknown metric '" + std::string(name) + "'");
}

double distance(std::span<const double> x, std::span<const double> y, Metric metric) {
  if (x.size() != y.size()) throw DataError("distance: dimension mismatch");
  if (metric == Metric::euclidean) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = x[i] - y[i];
      s += t * t;
    }
    return std::sqrt(s);
  }
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  if (nx == 0.0 || ny == 0.0) {
    warn_zero_norm_once();
    return 1.0;
  }
  return 1.0 - dot / (std::sqrt(nx) * std::sqrt(ny));
}

Matrix pairwise_distance(const Matrix& x, const Matrix& y, Metric metric) {
  if (x.cols() != y.cols()) throw DataError("pairwise_distance: dimension mismatch");
  Matrix out(x.rows(), y.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < y.rows(); ++j) out(i, j) = distance(x.row(i), y.row(j), metric);
  return out;
}

}  // namespace zspeedl::numerics
