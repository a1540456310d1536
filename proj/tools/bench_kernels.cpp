// Timing comparison between the serial reference kernels and the
// OpenMP-parallel ones. Also asserts bitwise-equal results, since the
// parallel versions promise the same accumulation order per output row.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dgfair/kernels.hpp"
#include "dgfair/tensor.hpp"

using namespace dgfair;
using Clock = std::chrono::steady_clock;

namespace {

double time_of(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    auto start = Clock::now();
    for (int i = 0; i < reps; ++i) fn();
    std::chrono::duration<double> dt = Clock::now() - start;
    return dt.count() / reps;
}

bool same_bits(const Mat& a, const Mat& b) {
    return a.rows == b.rows && a.cols == b.cols &&
           std::memcmp(a.d.data(), b.d.data(), a.d.size() * sizeof(double)) == 0;
}

kernels::Csr random_csr(int n, int per_row, std::mt19937_64& rng) {
    kernels::Csr s;
    s.n = n;
    s.ptr.resize(n + 1, 0);
    std::uniform_int_distribution<int> col(0, n - 1);
    std::uniform_real_distribution<double> w(0.1, 1.0);
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

}  // namespace

int main(int argc, char** argv) {
    int n = argc > 1 ? std::atoi(argv[1]) : 512;
    int dim = argc > 2 ? std::atoi(argv[2]) : 64;
    int reps = argc > 3 ? std::atoi(argv[3]) : 5;

#ifdef _OPENMP
    std::printf("openmp enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("openmp disabled, serial build\n");
#endif
    std::printf("matrices %dx%d, dense width %d, %d reps\n\n", n, n, dim, reps);

    std::mt19937_64 rng(7);
    Mat A = Mat::uniform(n, dim, 1.0, rng);
    Mat B = Mat::uniform(dim, n, 1.0, rng);
    kernels::Csr S = random_csr(n, 12, rng);

    Mat c_ser, c_par;
    double t_ser = time_of([&] { kernels::gemm_serial(false, false, A, B, c_ser); }, reps);
    double t_par = time_of([&] { kernels::gemm(false, false, A, B, c_par); }, reps);
    std::printf("%-12s serial %8.4f ms  parallel %8.4f ms  speedup %5.2fx  bitwise %s\n",
                "gemm", 1e3 * t_ser, 1e3 * t_par, t_ser / t_par,
                same_bits(c_ser, c_par) ? "equal" : "DIFFERENT");

    Mat D = Mat::uniform(n, dim, 1.0, rng);
    double s_ser = time_of([&] { kernels::spmm_serial(S, D, c_ser); }, reps);
    double s_par = time_of([&] { kernels::spmm(S, D, c_par); }, reps);
    std::printf("%-12s serial %8.4f ms  parallel %8.4f ms  speedup %5.2fx  bitwise %s\n",
                "spmm", 1e3 * s_ser, 1e3 * s_par, s_ser / s_par,
                same_bits(c_ser, c_par) ? "equal" : "DIFFERENT");
    return 0;
}
