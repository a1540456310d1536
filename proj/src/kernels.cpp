#include "dgfair/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dgfair::kernels {

namespace {

void check_gemm_shapes(bool ta, bool tb, const Mat& A, const Mat& B, int& m, int& n, int& k) {
    m = ta ? A.cols : A.rows;
    k = ta ? A.rows : A.cols;
    int kb = tb ? B.cols : B.rows;
    n = tb ? B.rows : B.cols;
    if (k != kb) throw Error("gemm: inner dimension mismatch");
}

// One output row of C = op(A)*op(B). Inner loops are ordered identically for
// the serial and parallel paths.
inline void gemm_row(bool ta, bool tb, const Mat& A, const Mat& B, Mat& C, int i, int n, int k) {
    double* crow = &C.d[static_cast<size_t>(i) * n];
    for (int j = 0; j < n; ++j) crow[j] = 0.0;
    if (!ta && !tb) {
        const double* arow = &A.d[static_cast<size_t>(i) * k];
        for (int p = 0; p < k; ++p) {
            double a = arow[p];
            if (a == 0.0) continue;
            const double* brow = &B.d[static_cast<size_t>(p) * n];
            for (int j = 0; j < n; ++j) crow[j] += a * brow[j];
        }
    } else if (!ta && tb) {
        const double* arow = &A.d[static_cast<size_t>(i) * k];
        for (int j = 0; j < n; ++j) {
            const double* brow = &B.d[static_cast<size_t>(j) * k];
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] = acc;
        }
    } else if (ta && !tb) {
        for (int p = 0; p < k; ++p) {
            double a = A.d[static_cast<size_t>(p) * A.cols + i];
            if (a == 0.0) continue;
            const double* brow = &B.d[static_cast<size_t>(p) * n];
            for (int j = 0; j < n; ++j) crow[j] += a * brow[j];
        }
    } else {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p)
                acc += A.d[static_cast<size_t>(p) * A.cols + i] * B.d[static_cast<size_t>(j) * B.cols + p];
            crow[j] = acc;
        }
    }
}

}  // namespace

void gemm_serial(bool ta, bool tb, const Mat& A, const Mat& B, Mat& C) {
    int m, n, k;
    check_gemm_shapes(ta, tb, A, B, m, n, k);
    C = Mat(m, n);
    for (int i = 0; i < m; ++i) gemm_row(ta, tb, A, B, C, i, n, k);
}

void gemm(bool ta, bool tb, const Mat& A, const Mat& B, Mat& C) {
    int m, n, k;
    check_gemm_shapes(ta, tb, A, B, m, n, k);
    C = Mat(m, n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) gemm_row(ta, tb, A, B, C, i, n, k);
}

namespace {

inline void spmm_row(const Csr& S, const Mat& B, Mat& C, int i) {
    int c = B.cols;
    double* crow = &C.d[static_cast<size_t>(i) * c];
    for (int j = 0; j < c; ++j) crow[j] = 0.0;
    for (int e = S.ptr[i]; e < S.ptr[i + 1]; ++e) {
        double v = S.val[e];
        const double* brow = &B.d[static_cast<size_t>(S.idx[e]) * c];
        for (int j = 0; j < c; ++j) crow[j] += v * brow[j];
    }
}

}  // namespace

void spmm_serial(const Csr& S, const Mat& B, Mat& C) {
    if (S.n != B.rows) throw Error("spmm: dimension mismatch");
    C = Mat(S.n, B.cols);
    for (int i = 0; i < S.n; ++i) spmm_row(S, B, C, i);
}

void spmm(const Csr& S, const Mat& B, Mat& C) {
    if (S.n != B.rows) throw Error("spmm: dimension mismatch");
    C = Mat(S.n, B.cols);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < S.n; ++i) spmm_row(S, B, C, i);
}

void sqdist_to_rows(const double* q, const Mat& points, std::vector<double>& out) {
    out.resize(points.rows);
    int c = points.cols;
    for (int i = 0; i < points.rows; ++i) {
        const double* p = &points.d[static_cast<size_t>(i) * c];
        double acc = 0.0;
        for (int j = 0; j < c; ++j) {
            double diff = q[j] - p[j];
            acc += diff * diff;
        }
        out[i] = acc;
    }
}

}  // namespace dgfair::kernels
