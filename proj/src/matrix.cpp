#include "amber/matrix.hpp"

#include <cmath>
#include <mutex>
#include <string>

#include "amber/errors.hpp"

#ifdef AMBER_USE_CBLAS
#include <cblas.h>
extern "C" void openblas_set_num_threads(int);
#endif

namespace amber {

namespace {

void check(bool ok, const std::string& what) {
    if (!ok) throw ShapeError("matmul: " + what);
}

#ifdef AMBER_USE_CBLAS
// BLAS runs single-threaded so results cannot depend on its thread pool;
// concurrency happens above the matrix layer (see threads.hpp).
void pin_blas_threads() {
    static std::once_flag once;
    std::call_once(once, [] { openblas_set_num_threads(1); });
}
#endif

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    check(a.cols == b.rows, "inner dimensions differ");
    Matrix c(a.rows, b.cols);
    if (a.rows == 0 || a.cols == 0 || b.cols == 0) return c;
#ifdef AMBER_USE_CBLAS
    pin_blas_threads();
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(a.rows),
                static_cast<int>(b.cols), static_cast<int>(a.cols), 1.0, a.v.data(),
                static_cast<int>(a.cols), b.v.data(), static_cast<int>(b.cols), 0.0, c.v.data(),
                static_cast<int>(c.cols));
#else
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
        }
    }
#endif
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    check(a.cols == b.cols, "inner dimensions differ");
    Matrix c(a.rows, b.rows);
    if (a.rows == 0 || a.cols == 0 || b.rows == 0) return c;
#ifdef AMBER_USE_CBLAS
    pin_blas_threads();
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, static_cast<int>(a.rows),
                static_cast<int>(b.rows), static_cast<int>(a.cols), 1.0, a.v.data(),
                static_cast<int>(a.cols), b.v.data(), static_cast<int>(b.cols), 0.0, c.v.data(),
                static_cast<int>(c.cols));
#else
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* bj = b.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += ai[k] * bj[k];
            ci[j] = s;
        }
    }
#endif
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    check(a.rows == b.rows, "inner dimensions differ");
    Matrix c(a.cols, b.cols);
    if (a.cols == 0 || a.rows == 0 || b.cols == 0) return c;
#ifdef AMBER_USE_CBLAS
    pin_blas_threads();
    cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, static_cast<int>(a.cols),
                static_cast<int>(b.cols), static_cast<int>(a.rows), 1.0, a.v.data(),
                static_cast<int>(a.cols), b.v.data(), static_cast<int>(b.cols), 0.0, c.v.data(),
                static_cast<int>(c.cols));
#else
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double* ak = a.row(k);
        const double* bk = b.row(k);
        for (std::size_t i = 0; i < a.cols; ++i) {
            double aki = ak[i];
            if (aki == 0.0) continue;
            double* ci = c.row(i);
            for (std::size_t j = 0; j < b.cols; ++j) ci[j] += aki * bk[j];
        }
    }
#endif
    return c;
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
    if (a.rows != a.cols) throw ShapeError("solve_spd: matrix not square");
    if (a.rows != b.rows) throw ShapeError("solve_spd: rhs row count mismatch");
    const std::size_t n = a.rows;
    Matrix l = a;
    // lower Cholesky in place
    for (std::size_t j = 0; j < n; ++j) {
        double d = l(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0) || !std::isfinite(d))
            throw NumericError("solve_spd: non-positive pivot at row " + std::to_string(j));
        d = std::sqrt(d);
        l(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = l(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / d;
        }
    }
    // forward then back substitution per column of b
    Matrix x = b;
    for (std::size_t c = 0; c < b.cols; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = x(i, c);
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
            x(i, c) = s / l(i, i);
        }
        for (std::size_t ii = n; ii > 0; --ii) {
            std::size_t i = ii - 1;
            double s = x(i, c);
            for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x(k, c);
            x(i, c) = s / l(i, i);
        }
    }
    return x;
}

}  // namespace amber
