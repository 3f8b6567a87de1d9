#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "zspeedl/matrix.hpp"

namespace zspeedl::numerics {

struct EigDecomp {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column i pairs with values[i]
};

// Lower-triangular L with L L^T = A. Throws NumericalError if A is not
// positive definite.
Matrix cholesky(const Matrix& a);

// X with (A + gamma I) X = B for symmetric PSD A.
Matrix ridge_solve(const Matrix& a, double gamma, const Matrix& b);

// Householder tridiagonalization followed by implicit-shift QL.
EigDecomp sym_eig(const Matrix& m);

// W (k x d) with A W + W B = C, A (k x k) and B (d x d) symmetric PSD.
Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c);
// Same, reusing decompositions of A and B.
Matrix solve_sylvester(const EigDecomp& a, const EigDecomp& b, const Matrix& c);

// ||A W + W B - C||_F / ||C||_F (absolute norm when C = 0).
double sylvester_residual(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& w);

std::vector<double> softmax(std::span<const double> logits);

enum class Metric { euclidean, cosine };

std::string_view to_string(Metric m) noexcept;
Metric parse_metric(std::string_view name);

double distance(std::span<const double> x, std::span<const double> y, Metric metric);

// D[i][j] = distance(X row i, Y row j).
Matrix pairwise_distance(const Matrix& x, const Matrix& y, Metric metric);

}  // namespace zspeedl::numerics
