#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "dgfair/util.hpp"

namespace dgfair {

// Dense row-major matrix of doubles. Row vectors are 1 x n, column vectors
// n x 1, scalars 1 x 1. All model math happens at 64-bit precision.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> d;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), d(static_cast<size_t>(r) * c, 0.0) {}
    Mat(int r, int c, std::vector<double> data) : rows(r), cols(c), d(std::move(data)) {
        if (d.size() != static_cast<size_t>(r) * c) throw Error("Mat: data size mismatch");
    }

    double& operator()(int i, int j) { return d[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return d[static_cast<size_t>(i) * cols + j]; }

    size_t size() const { return d.size(); }
    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    static Mat zeros(int r, int c) { return Mat(r, c); }

    static Mat full(int r, int c, double v) {
        Mat m(r, c);
        std::fill(m.d.begin(), m.d.end(), v);
        return m;
    }

    // Uniform init in [-range, range], consuming rows*cols draws in row-major order.
    static Mat uniform(int r, int c, double range, std::mt19937_64& rng) {
        Mat m(r, c);
        std::uniform_real_distribution<double> dist(-range, range);
        for (auto& x : m.d) x = dist(rng);
        return m;
    }
};

}  // namespace dgfair
