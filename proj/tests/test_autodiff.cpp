#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dgfair/autodiff.hpp"
#include "dgfair/kernels.hpp"
#include "dgfair/nn.hpp"
#include "test_helpers.hpp"

using namespace dgfair;
using testutil::finite_diff_check;

namespace {

// Mixes a matrix into a scalar with fixed, non-uniform weights so gradient
// errors cannot cancel.
ad::Var mix_to_scalar(ad::Tape& t, ad::Var x) {
    const Mat& v = t.value(x);
    Mat w(v.rows, v.cols);
    for (size_t i = 0; i < w.d.size(); ++i) w.d[i] = 0.3 + 0.1 * (double)(i % 7);
    return t.sum_all(t.mul(x, t.constant(w)));
}

nn::ParamStore one_param(const Mat& x) {
    nn::ParamStore ps;
    std::mt19937_64 rng(1);
    int id = ps.add("x", x.rows, x.cols, 1.0, rng);
    ps.values[(size_t)id] = x;
    return ps;
}

Mat random_mat(int r, int c, double range, unsigned long seed) {
    std::mt19937_64 rng(seed);
    return Mat::uniform(r, c, range, rng);
}

}  // namespace

TEST_CASE("values: basic op outputs") {
    ad::Tape t;
    ad::Var x = t.constant(Mat(1, 3, {0.0, 1.0, -1.0}));
    CHECK(t.value(t.sigmoid(x))(0, 0) == doctest::Approx(0.5));
    CHECK(t.value(t.relu(x))(0, 2) == 0.0);
    CHECK(t.value(t.relu(x))(0, 1) == 1.0);
    CHECK(t.value(t.tanh_(x))(0, 0) == doctest::Approx(0.0));
    CHECK(t.value(t.exp_(x))(0, 1) == doctest::Approx(std::exp(1.0)));
    CHECK(t.value(t.abs_(x))(0, 2) == 1.0);
    CHECK(t.value(t.affine(x, 2.0, 5.0))(0, 1) == doctest::Approx(7.0));

    ad::Var sm = t.softmax_rows(t.constant(Mat(2, 3, {1.0, 1.0, 1.0, 5.0, 1.0, 1.0})));
    const Mat& s = t.value(sm);
    CHECK(s(0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(s(1, 0) + s(1, 1) + s(1, 2) == doctest::Approx(1.0));
    CHECK(s(1, 0) > s(1, 1));

    ad::Var ms = t.mean_all(t.constant(Mat(2, 2, {1.0, 2.0, 3.0, 6.0})));
    CHECK(t.scalar(ms) == doctest::Approx(3.0));
}

TEST_CASE("gradients: elementwise chains") {
    auto check_unary = [](const char* name, auto apply, const Mat& x) {
        CAPTURE(name);
        nn::ParamStore ps = one_param(x);
        auto out = finite_diff_check(ps, [&](ad::Tape& t, const nn::BoundParams& bp) {
            return mix_to_scalar(t, apply(t, bp[0]));
        });
        CHECK(out.failed == 0);
        CHECK(out.checked == (int)x.d.size());
    };

    Mat x = random_mat(3, 4, 0.8, 21);
    check_unary("sigmoid", [](ad::Tape& t, ad::Var v) { return t.sigmoid(v); }, x);
    check_unary("tanh", [](ad::Tape& t, ad::Var v) { return t.tanh_(v); }, x);
    check_unary("exp", [](ad::Tape& t, ad::Var v) { return t.exp_(v); }, x);
    check_unary("affine", [](ad::Tape& t, ad::Var v) { return t.affine(v, -1.7, 0.4); }, x);
    check_unary("reshape", [](ad::Tape& t, ad::Var v) { return t.reshape(v, 4, 3); }, x);
    check_unary("softmax_rows", [](ad::Tape& t, ad::Var v) { return t.softmax_rows(v); }, x);
    check_unary("sum_rows", [](ad::Tape& t, ad::Var v) { return t.sum_rows(v); }, x);
    check_unary("mean_all", [](ad::Tape& t, ad::Var v) { return t.mean_all(v); }, x);

    // Kink points excluded: keep inputs away from 0 for relu/abs and inside
    // the clamp interval for clamp.
    Mat far(3, 4);
    for (size_t i = 0; i < far.d.size(); ++i) far.d[i] = (i % 2 ? 0.5 : -0.7) * (1.0 + (double)i / 10.0);
    check_unary("relu", [](ad::Tape& t, ad::Var v) { return t.relu(v); }, far);
    check_unary("abs", [](ad::Tape& t, ad::Var v) { return t.abs_(v); }, far);
    check_unary("clamp_inside", [](ad::Tape& t, ad::Var v) { return t.clamp(v, -5.0, 5.0); }, far);

    Mat pos(3, 4);
    for (size_t i = 0; i < pos.d.size(); ++i) pos.d[i] = 0.2 + 0.13 * (double)i;
    check_unary("log", [](ad::Tape& t, ad::Var v) { return t.log_(v); }, pos);
}

TEST_CASE("gradients: clamp blocks flow outside the interval") {
    nn::ParamStore ps = one_param(Mat(1, 2, {3.0, -3.0}));
    ad::Tape t;
    nn::BoundParams bp = nn::bind(t, ps);
    ad::Var loss = t.sum_all(t.clamp(bp[0], -1.0, 1.0));
    t.backward(loss);
    Mat g = nn::collect_grads(t, bp)[0];
    CHECK(g(0, 0) == 0.0);
    CHECK(g(0, 1) == 0.0);
}

TEST_CASE("gradients: binary ops") {
    Mat a = random_mat(3, 4, 0.9, 31);
    Mat b = random_mat(3, 4, 0.9, 32);

    nn::ParamStore ps;
    std::mt19937_64 rng(2);
    ps.add("a", 3, 4, 1.0, rng);
    ps.add("b", 3, 4, 1.0, rng);
    ps.values[0] = a;
    ps.values[1] = b;

    auto run = [&](const char* name, auto apply) {
        CAPTURE(name);
        auto out = finite_diff_check(ps, [&](ad::Tape& t, const nn::BoundParams& bp) {
            return mix_to_scalar(t, apply(t, bp[0], bp[1]));
        });
        CHECK(out.failed == 0);
        CHECK(out.checked == 24);
    };
    run("add", [](ad::Tape& t, ad::Var x, ad::Var y) { return t.add(x, y); });
    run("sub", [](ad::Tape& t, ad::Var x, ad::Var y) { return t.sub(x, y); });
    run("mul", [](ad::Tape& t, ad::Var x, ad::Var y) { return t.mul(x, y); });
    run("concat_cols", [](ad::Tape& t, ad::Var x, ad::Var y) { return t.concat_cols(x, y); });
    run("cosine_rows", [](ad::Tape& t, ad::Var x, ad::Var y) { return t.cosine_rows(x, y); });
    run("sqdist_rows", [](ad::Tape& t, ad::Var x, ad::Var y) { return t.sqdist_rows(x, y); });
}

TEST_CASE("gradients: matmul and row broadcast") {
    nn::ParamStore ps;
    std::mt19937_64 rng(3);
    ps.add("a", 3, 5, 1.0, rng);
    ps.add("b", 5, 2, 1.0, rng);
    ps.add("row", 1, 2, 1.0, rng);
    auto out = finite_diff_check(ps, [&](ad::Tape& t, const nn::BoundParams& bp) {
        return mix_to_scalar(t, t.add_rowvec(t.matmul(bp[0], bp[1]), bp[2]));
    });
    CHECK(out.failed == 0);
    CHECK(out.checked == 15 + 10 + 2);
}

TEST_CASE("gradients: gather accumulates over repeated rows") {
    nn::ParamStore ps;
    std::mt19937_64 rng(4);
    ps.add("x", 4, 3, 1.0, rng);
    auto out = finite_diff_check(ps, [&](ad::Tape& t, const nn::BoundParams& bp) {
        return mix_to_scalar(t, t.gather_rows(bp[0], {2, 0, 2, 2, 1}));
    });
    CHECK(out.failed == 0);

    // Row 3 is never gathered, so its gradient stays zero.
    ad::Tape t;
    nn::BoundParams bp = nn::bind(t, ps);
    ad::Var loss = t.sum_all(t.gather_rows(bp[0], {2, 0, 2, 2, 1}));
    t.backward(loss);
    Mat g = nn::collect_grads(t, bp)[0];
    CHECK(g(3, 0) == 0.0);
    CHECK(g(2, 0) == doctest::Approx(3.0));
}

TEST_CASE("gradients: sparse symmetric propagation") {
    kernels::Csr S;
    S.n = 4;
    // Symmetric operator with self-loops, the shape the backbone feeds in.
    Mat D(4, 4);
    auto set = [&](int i, int j, double v) {
        D(i, j) = v;
        D(j, i) = v;
    };
    set(0, 0, 0.5);
    set(1, 1, 0.4);
    set(2, 2, 0.7);
    set(3, 3, 1.0);
    set(0, 1, 0.3);
    set(1, 2, 0.2);
    S.ptr.assign(1, 0);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j)
            if (D(i, j) != 0.0) {
                S.idx.push_back(j);
                S.val.push_back(D(i, j));
            }
        S.ptr.push_back((int)S.idx.size());
    }

    nn::ParamStore ps;
    std::mt19937_64 rng(5);
    ps.add("x", 4, 3, 1.0, rng);
    auto out = finite_diff_check(ps, [&](ad::Tape& t, const nn::BoundParams& bp) {
        return mix_to_scalar(t, t.sym_spmm(&S, bp[0]));
    });
    CHECK(out.failed == 0);
}

TEST_CASE("gradients: deep composite expression") {
    nn::ParamStore ps;
    std::mt19937_64 rng(6);
    ps.add("w1", 4, 6, 0.5, rng);
    ps.add("w2", 6, 3, 0.5, rng);
    ps.add("b", 1, 3, 0.5, rng);
    Mat x = random_mat(5, 4, 1.0, 41);
    auto out = finite_diff_check(ps, [&](ad::Tape& t, const nn::BoundParams& bp) {
        ad::Var h = t.tanh_(t.matmul(t.constant(x), bp[0]));
        ad::Var z = t.add_rowvec(t.matmul(h, bp[1]), bp[2]);
        ad::Var p = t.softmax_rows(z);
        ad::Var picked = t.gather_rows(p, {0, 2, 4});
        return t.mean_all(t.mul(picked, picked));
    });
    CHECK(out.failed == 0);
    CHECK(out.checked == 24 + 18 + 3);
}

TEST_CASE("backward only touches nodes that feed the loss") {
    nn::ParamStore ps;
    std::mt19937_64 rng(7);
    ps.add("x", 2, 2, 1.0, rng);
    ad::Tape t;
    nn::BoundParams bp = nn::bind(t, ps);
    ad::Var used = t.sum_all(t.mul(bp[0], bp[0]));
    // Nodes appended after the loss point must not contribute gradient.
    ad::Var later = t.sum_all(t.exp_(bp[0]));
    (void)later;
    t.backward(used);
    Mat g = nn::collect_grads(t, bp)[0];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(g(i, j) == doctest::Approx(2.0 * ps.values[0](i, j)).epsilon(1e-12));
}

TEST_CASE("backward rejects a non-scalar loss") {
    ad::Tape t;
    ad::Var x = t.leaf(Mat(2, 2, {1.0, 2.0, 3.0, 4.0}));
    CHECK_THROWS_AS(t.backward(x), Error);
}
