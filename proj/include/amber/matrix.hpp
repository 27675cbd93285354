#pragma once

#include <cstddef>
#include <vector>

namespace amber {

// Dense row-major matrix of doubles. The only numeric container in the
// project; everything (datasets, weights, activations) lives in these.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return v[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return v[r * cols + c]; }

    double* row(std::size_t r) { return v.data() + r * cols; }
    const double* row(std::size_t r) const { return v.data() + r * cols; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// c = a * b            (n x k) * (k x m) -> (n x m)
Matrix matmul(const Matrix& a, const Matrix& b);
// c = a * b^T          (n x k) * (m x k)^T -> (n x m)
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// c = a^T * b          (k x n)^T * (k x m) -> (n x m)
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// Solves A x = B for symmetric positive definite A (in-place Cholesky on a
// copy). B holds one right-hand side per column. Throws NumericError if the
// factorization hits a non-positive pivot.
Matrix solve_spd(const Matrix& a, const Matrix& b);

}  // namespace amber
