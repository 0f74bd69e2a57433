#include "hmimvc/matrix.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hmimvc {

namespace {

std::atomic<int> g_threads{0};
std::once_flag g_env_once;

void init_threads_from_env() {
    const char* env = std::getenv("HMIMVC_THREADS");
    if (env != nullptr) {
        const int n = std::atoi(env);
        if (n > 0) g_threads.store(n);
    }
}

int effective_threads() {
    std::call_once(g_env_once, init_threads_from_env);
    int n = g_threads.load();
#ifdef _OPENMP
    if (n <= 0) n = omp_get_max_threads();
#else
    n = 1;
#endif
    return std::max(1, n);
}

void check_inner(index_t ak, index_t bk, const char* name) {
    if (ak != bk)
        throw std::invalid_argument(std::string(name) + ": inner dimension mismatch (" +
                                    std::to_string(ak) + " vs " + std::to_string(bk) + ")");
}

}  // namespace

void set_num_threads(int n) { g_threads.store(n); }

int num_threads() { return effective_threads(); }

// C = A·B with A m×k, B k×n. The i,k,j ordering keeps the inner loop
// unit-stride over both B and C so the compiler vectorizes it; each C row
// is owned by one thread and accumulated serially in k.
Matrix gemm_nn(const Matrix& a, const Matrix& b) {
    check_inner(a.cols(), b.rows(), "gemm_nn");
    const index_t m = a.rows(), k = a.cols(), n = b.cols();
    Matrix c(m, n, 0.0);
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
        const index_t i = static_cast<index_t>(ii);
        double* crow = pc + i * n;
        const double* arow = pa + i * k;
        for (index_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = pb + p * n;
            for (index_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

// C = A·Bᵀ with A m×k, B n×k. Transposing B first costs O(n·k) against
// the O(m·n·k) multiply and lets the gemm_nn kernel's unit-stride inner
// loop do the work; the per-element accumulation order is unchanged.
Matrix gemm_nt(const Matrix& a, const Matrix& b) {
    check_inner(a.cols(), b.cols(), "gemm_nt");
    const index_t k = b.cols(), n = b.rows();
    Matrix bt(k, n);
    for (index_t j = 0; j < n; ++j)
        for (index_t p = 0; p < k; ++p) bt(p, j) = b(j, p);
    return gemm_nn(a, bt);
}

// C = Aᵀ·B with A k×m, B k×n. Parallelized over output rows (columns of A);
// accumulation over k stays serial per element.
Matrix gemm_tn(const Matrix& a, const Matrix& b) {
    check_inner(a.rows(), b.rows(), "gemm_tn");
    const index_t k = a.rows(), m = a.cols(), n = b.cols();
    Matrix c(m, n, 0.0);
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
#pragma omp parallel for schedule(static) num_threads(effective_threads())
    for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
        const index_t i = static_cast<index_t>(ii);
        double* crow = pc + i * n;
        for (index_t p = 0; p < k; ++p) {
            const double av = pa[p * m + i];
            const double* brow = pb + p * n;
            for (index_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

void add_row_broadcast(Matrix& y, std::span<const double> v) {
    if (v.size() != y.cols()) throw std::invalid_argument("add_row_broadcast: length mismatch");
    for (index_t i = 0; i < y.rows(); ++i) {
        double* row = y.data() + i * y.cols();
        for (index_t j = 0; j < y.cols(); ++j) row[j] += v[j];
    }
}

Matrix concat_cols(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("concat_cols: row mismatch");
    Matrix c(a.rows(), a.cols() + b.cols());
    for (index_t i = 0; i < a.rows(); ++i) {
        std::copy_n(a.data() + i * a.cols(), a.cols(), c.data() + i * c.cols());
        std::copy_n(b.data() + i * b.cols(), b.cols(), c.data() + i * c.cols() + a.cols());
    }
    return c;
}

void split_cols(const Matrix& ab, index_t a_cols, Matrix& a, Matrix& b) {
    if (a_cols > ab.cols()) throw std::invalid_argument("split_cols: split past end");
    const index_t b_cols = ab.cols() - a_cols;
    a = Matrix(ab.rows(), a_cols);
    b = Matrix(ab.rows(), b_cols);
    for (index_t i = 0; i < ab.rows(); ++i) {
        std::copy_n(ab.data() + i * ab.cols(), a_cols, a.data() + i * a_cols);
        std::copy_n(ab.data() + i * ab.cols() + a_cols, b_cols, b.data() + i * b_cols);
    }
}

Matrix gather_rows(const Matrix& m, std::span<const index_t> idx) {
    Matrix out(idx.size(), m.cols());
    for (index_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= m.rows()) throw std::invalid_argument("gather_rows: index out of range");
        std::copy_n(m.data() + idx[i] * m.cols(), m.cols(), out.data() + i * m.cols());
    }
    return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("squared_distance: length mismatch");
    double acc = 0.0;
    for (index_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

}  // namespace hmimvc
