#pragma once

#include <vector>

#include "dgfair/tensor.hpp"

namespace dgfair::kernels {

// C = op(A) * op(B) where op transposes when the flag is set. C is resized.
// The parallel variant splits work over rows of C; each row is owned by one
// thread and accumulated in the same order as the serial reference, so the
// two produce bitwise-identical output regardless of thread count.
void gemm_serial(bool trans_a, bool trans_b, const Mat& A, const Mat& B, Mat& C);
void gemm(bool trans_a, bool trans_b, const Mat& A, const Mat& B, Mat& C);

// Compressed sparse row matrix, used for normalized adjacency operators.
struct Csr {
    int n = 0;  // square: n x n
    std::vector<int> ptr;   // size n+1
    std::vector<int> idx;   // column indices
    std::vector<double> val;
};

// C = S * B with S sparse n x n and B dense n x c.
void spmm_serial(const Csr& S, const Mat& B, Mat& C);
void spmm(const Csr& S, const Mat& B, Mat& C);

// Squared Euclidean distance from one row vector to every row of `points`.
void sqdist_to_rows(const double* q, const Mat& points, std::vector<double>& out);

}  // namespace dgfair::kernels
