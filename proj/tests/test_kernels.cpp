#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "dgfair/kernels.hpp"
#include "dgfair/tensor.hpp"
#include "dgfair/util.hpp"

using namespace dgfair;

namespace {

// Plain triple loop, written without looking at the library kernels.
Mat gemm_oracle(bool ta, bool tb, const Mat& A, const Mat& B) {
    int m = ta ? A.cols : A.rows;
    int k = ta ? A.rows : A.cols;
    int n = tb ? B.rows : B.cols;
    Mat C(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) {
                double a = ta ? A(p, i) : A(i, p);
                double b = tb ? B(j, p) : B(p, j);
                acc += a * b;
            }
            C(i, j) = acc;
        }
    return C;
}

Mat csr_to_dense(const kernels::Csr& S) {
    Mat D(S.n, S.n);
    for (int r = 0; r < S.n; ++r)
        for (int p = S.ptr[r]; p < S.ptr[r + 1]; ++p) D(r, S.idx[p]) += S.val[p];
    return D;
}

kernels::Csr random_csr(int n, int per_row, std::mt19937_64& rng) {
    kernels::Csr s;
    s.n = n;
    s.ptr.assign(n + 1, 0);
    std::uniform_int_distribution<int> col(0, n - 1);
    std::uniform_real_distribution<double> w(-1.0, 1.0);
    for (int r = 0; r < n; ++r) {
        std::vector<int> cols;
        for (int k = 0; k < per_row; ++k) cols.push_back(col(rng));
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
        for (int c : cols) {
            s.idx.push_back(c);
            s.val.push_back(w(rng));
        }
        s.ptr[r + 1] = (int)s.idx.size();
    }
    return s;
}

bool bitwise_equal(const Mat& a, const Mat& b) {
    return a.rows == b.rows && a.cols == b.cols &&
           (a.d.empty() ||
            std::memcmp(a.d.data(), b.d.data(), a.d.size() * sizeof(double)) == 0);
}

}  // namespace

TEST_CASE("gemm matches the naive oracle for every transpose combination") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 8; ++trial) {
        int m = 1 + (int)(rng() % 9), k = 1 + (int)(rng() % 9), n = 1 + (int)(rng() % 9);
        for (int ta = 0; ta < 2; ++ta)
            for (int tb = 0; tb < 2; ++tb) {
                Mat A = ta ? Mat::uniform(k, m, 1.0, rng) : Mat::uniform(m, k, 1.0, rng);
                Mat B = tb ? Mat::uniform(n, k, 1.0, rng) : Mat::uniform(k, n, 1.0, rng);
                Mat want = gemm_oracle(ta, tb, A, B);
                Mat got;
                kernels::gemm(ta, tb, A, B, got);
                REQUIRE(got.rows == want.rows);
                REQUIRE(got.cols == want.cols);
                for (size_t i = 0; i < want.d.size(); ++i)
                    CHECK(got.d[i] == doctest::Approx(want.d[i]).epsilon(1e-12));
            }
    }
}

TEST_CASE("parallel gemm is bitwise identical to the serial reference") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 6; ++trial) {
        int m = 1 + (int)(rng() % 40), k = 1 + (int)(rng() % 40), n = 1 + (int)(rng() % 40);
        Mat A = Mat::uniform(m, k, 1.0, rng);
        Mat B = Mat::uniform(k, n, 1.0, rng);
        Mat serial, parallel;
        kernels::gemm_serial(false, false, A, B, serial);
        kernels::gemm(false, false, A, B, parallel);
        CHECK(bitwise_equal(serial, parallel));
    }
}

TEST_CASE("gemm rejects mismatched inner dimensions") {
    std::mt19937_64 rng(13);
    Mat A = Mat::uniform(3, 4, 1.0, rng);
    Mat B = Mat::uniform(5, 2, 1.0, rng);
    Mat C;
    CHECK_THROWS_AS(kernels::gemm(false, false, A, B, C), Error);
}

TEST_CASE("spmm matches dense multiplication") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 6; ++trial) {
        int n = 2 + (int)(rng() % 30), c = 1 + (int)(rng() % 10);
        kernels::Csr S = random_csr(n, 4, rng);
        Mat B = Mat::uniform(n, c, 1.0, rng);
        Mat want = gemm_oracle(false, false, csr_to_dense(S), B);
        Mat got;
        kernels::spmm(S, B, got);
        REQUIRE(got.rows == n);
        REQUIRE(got.cols == c);
        for (size_t i = 0; i < want.d.size(); ++i)
            CHECK(got.d[i] == doctest::Approx(want.d[i]).epsilon(1e-12));
    }
}

TEST_CASE("parallel spmm is bitwise identical to the serial reference") {
    std::mt19937_64 rng(15);
    kernels::Csr S = random_csr(64, 6, rng);
    Mat B = Mat::uniform(64, 16, 1.0, rng);
    Mat serial, parallel;
    kernels::spmm_serial(S, B, serial);
    kernels::spmm(S, B, parallel);
    CHECK(bitwise_equal(serial, parallel));
}

TEST_CASE("spmm rejects a row-count mismatch") {
    std::mt19937_64 rng(16);
    kernels::Csr S = random_csr(8, 3, rng);
    Mat B = Mat::uniform(9, 4, 1.0, rng);
    Mat C;
    CHECK_THROWS_AS(kernels::spmm(S, B, C), Error);
}

TEST_CASE("sqdist_to_rows matches a direct evaluation") {
    std::mt19937_64 rng(17);
    Mat P = Mat::uniform(20, 7, 2.0, rng);
    Mat q = Mat::uniform(1, 7, 2.0, rng);
    std::vector<double> got;
    kernels::sqdist_to_rows(q.d.data(), P, got);
    REQUIRE(got.size() == 20);
    for (int i = 0; i < 20; ++i) {
        double want = 0.0;
        for (int j = 0; j < 7; ++j) {
            double diff = q(0, j) - P(i, j);
            want += diff * diff;
        }
        CHECK(got[i] == doctest::Approx(want).epsilon(1e-12));
    }
}
