#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "dgfair/fusion_head.hpp"
#include "test_helpers.hpp"

using namespace dgfair;

namespace {

const Mat& named(const nn::ParamStore& ps, const std::string& name) {
    int id = ps.find(name);
    REQUIRE(id >= 0);
    return ps.values[static_cast<size_t>(id)];
}

Mat dense_linear(const Mat& x, const Mat& w, const Mat& b) {
    Mat y(x.rows, w.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < w.cols; ++j) {
            double acc = b(0, j);
            for (int k = 0; k < x.cols; ++k) acc += x(i, k) * w(k, j);
            y(i, j) = acc;
        }
    return y;
}

std::vector<EvolutionLabel> cycle_labels(int n) {
    std::vector<EvolutionLabel> out;
    for (int i = 0; i < n; ++i) out.push_back(static_cast<EvolutionLabel>(i % 3));
    return out;
}

}  // namespace

TEST_CASE("fusion concatenates trend and structural rows before projecting") {
    nn::ParamStore ps;
    std::mt19937_64 rng(3);
    FusionHead head(2, true, ps, rng);
    CHECK(head.has_trend_branch());

    Mat h_deg = Mat::uniform(3, 2, 1.0, rng);
    Mat h_str = Mat::uniform(3, 2, 1.0, rng);
    Mat cat(3, 4);
    for (int i = 0; i < 3; ++i) {
        cat(i, 0) = h_deg(i, 0);
        cat(i, 1) = h_deg(i, 1);
        cat(i, 2) = h_str(i, 0);
        cat(i, 3) = h_str(i, 1);
    }
    Mat want = dense_linear(cat, named(ps, "fusion.W"), named(ps, "fusion.b"));

    ad::Tape t;
    nn::BoundParams bp = nn::bind(t, ps);
    Mat got = t.value(head.fuse(t, t.constant(h_deg), t.constant(h_str), bp));
    REQUIRE(got.rows == 3);
    REQUIRE(got.cols == 2);
    for (size_t i = 0; i < got.d.size(); ++i)
        CHECK(got.d[i] == doctest::Approx(want.d[i]).epsilon(1e-12));
}

TEST_CASE("without the trend branch fusion projects the structural rows alone") {
    nn::ParamStore ps;
    std::mt19937_64 rng(4);
    FusionHead head(3, false, ps, rng);
    CHECK_FALSE(head.has_trend_branch());
    CHECK(named(ps, "fusion.W").rows == 3);

    Mat h_str = Mat::uniform(2, 3, 1.0, rng);
    Mat want = dense_linear(h_str, named(ps, "fusion.W"), named(ps, "fusion.b"));

    ad::Tape t;
    nn::BoundParams bp = nn::bind(t, ps);
    Mat got = t.value(head.fuse(t, ad::Var(), t.constant(h_str), bp));
    for (size_t i = 0; i < got.d.size(); ++i)
        CHECK(got.d[i] == doctest::Approx(want.d[i]).epsilon(1e-12));
}

TEST_CASE("enabled trend branch requires a trend embedding") {
    nn::ParamStore ps;
    std::mt19937_64 rng(5);
    FusionHead head(2, true, ps, rng);
    ad::Tape t;
    nn::BoundParams bp = nn::bind(t, ps);
    CHECK_THROWS_AS(head.fuse(t, ad::Var(), t.constant(Mat(1, 2)), bp), Error);
}

TEST_CASE("probabilities rectify and then normalize each row") {
    nn::ParamStore ps;
    std::mt19937_64 rng(6);
    FusionHead head(2, true, ps, rng);

    Mat logits(2, 3);
    logits(0, 0) = -5.0;
    logits(0, 1) = 0.0;
    logits(0, 2) = 3.0;
    logits(1, 0) = 1.0;
    logits(1, 1) = 1.0;
    logits(1, 2) = 1.0;

    ad::Tape t;
    Mat p = t.value(head.probabilities(t, t.constant(logits)));
    // row 0 rectifies to (0, 0, 3): softmax = (1, 1, e^3)/(2 + e^3)
    double denom = 2.0 + std::exp(3.0);
    CHECK(p(0, 0) == doctest::Approx(1.0 / denom).epsilon(1e-12));
    CHECK(p(0, 1) == doctest::Approx(1.0 / denom).epsilon(1e-12));
    CHECK(p(0, 2) == doctest::Approx(std::exp(3.0) / denom).epsilon(1e-12));
    for (int i = 0; i < 2; ++i) {
        double sum = p(i, 0) + p(i, 1) + p(i, 2);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    // equal logits normalize to thirds
    CHECK(p(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("renormalized cross-entropy at zero logits is ln 3 per row") {
    nn::ParamStore ps;
    std::mt19937_64 rng(7);
    FusionHead head(2, true, ps, rng);

    Mat logits(4, 3);
    auto labels = cycle_labels(4);
    ad::Tape t;
    double mean_loss = t.scalar(
        head.class_loss(t, t.constant(logits), labels, ClassLossMode::double_softmax, true));
    CHECK(mean_loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    double sum_loss = t.scalar(
        head.class_loss(t, t.constant(logits), labels, ClassLossMode::double_softmax, false));
    CHECK(sum_loss == doctest::Approx(4.0 * std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("plain cross-entropy closed form at a single separated logit") {
    nn::ParamStore ps;
    std::mt19937_64 rng(8);
    FusionHead head(2, true, ps, rng);

    // logits (m, 0, 0) with the true class first: loss = log(1 + 2 e^-m)
    double m = 2.0;
    Mat logits(1, 3);
    logits(0, 0) = m;
    std::vector<EvolutionLabel> labels{EvolutionLabel::SfH};
    ad::Tape t;
    double loss = t.scalar(
        head.class_loss(t, t.constant(logits), labels, ClassLossMode::single_softmax, true));
    CHECK(loss == doctest::Approx(std::log(1.0 + 2.0 * std::exp(-m))).epsilon(1e-12));
}

TEST_CASE("in-graph renormalized loss equals the standalone helper") {
    nn::ParamStore ps;
    std::mt19937_64 rng(9);
    FusionHead head(2, true, ps, rng);

    Mat logits = Mat::uniform(5, 3, 2.0, rng);
    auto labels = cycle_labels(5);

    ad::Tape t;
    ad::Var lv = t.constant(logits);
    Mat probs = t.value(head.probabilities(t, lv));
    std::vector<std::array<double, 3>> scores;
    for (int i = 0; i < probs.rows; ++i)
        scores.push_back({probs(i, 0), probs(i, 1), probs(i, 2)});

    double want = classification_loss_value(scores, labels);
    double got = t.scalar(head.class_loss(t, lv, labels, ClassLossMode::double_softmax, false));
    CHECK(got == doctest::Approx(want).epsilon(1e-12));

    CHECK_THROWS_AS(classification_loss_value(scores, cycle_labels(4)), Error);
}

TEST_CASE("mean scaling divides the summed loss by the batch size") {
    nn::ParamStore ps;
    std::mt19937_64 rng(10);
    FusionHead head(2, true, ps, rng);
    Mat logits = Mat::uniform(6, 3, 1.5, rng);
    auto labels = cycle_labels(6);
    ad::Tape t;
    ad::Var lv = t.constant(logits);
    double total = t.scalar(head.class_loss(t, lv, labels, ClassLossMode::single_softmax, false));
    double mean = t.scalar(head.class_loss(t, lv, labels, ClassLossMode::single_softmax, true));
    CHECK(mean == doctest::Approx(total / 6.0).epsilon(1e-12));
}

TEST_CASE("label count must match logit rows; empty batches cost nothing") {
    nn::ParamStore ps;
    std::mt19937_64 rng(11);
    FusionHead head(2, true, ps, rng);
    ad::Tape t;
    CHECK_THROWS_AS(head.class_loss(t, t.constant(Mat(2, 3)), cycle_labels(3),
                                    ClassLossMode::single_softmax, true),
                    Error);
    double empty = t.scalar(head.class_loss(t, t.constant(Mat(0, 3)), {},
                                            ClassLossMode::single_softmax, true));
    CHECK(empty == 0.0);
}

TEST_CASE("gradients through fuse, logits and both loss modes match finite differences") {
    for (ClassLossMode mode : {ClassLossMode::double_softmax, ClassLossMode::single_softmax}) {
        nn::ParamStore ps;
        std::mt19937_64 rng(12);
        FusionHead head(3, true, ps, rng);
        Mat h_deg = Mat::uniform(4, 3, 1.0, rng);
        Mat h_str = Mat::uniform(4, 3, 1.0, rng);
        auto labels = cycle_labels(4);

        auto outcome = testutil::finite_diff_check(ps, [&](ad::Tape& t, const nn::BoundParams& bp) {
            ad::Var fused = head.fuse(t, t.constant(h_deg), t.constant(h_str), bp);
            ad::Var logits = head.logits(t, fused, bp);
            return head.class_loss(t, logits, labels, mode, true);
        });
        CHECK(outcome.checked > 0);
        CHECK_MESSAGE(outcome.failed == 0, "worst: " << outcome.worst << " rel " << outcome.max_rel);
    }
}

TEST_CASE("constructor rejects a non-positive width") {
    nn::ParamStore ps;
    std::mt19937_64 rng(13);
    CHECK_THROWS_AS(FusionHead(0, true, ps, rng), Error);
}
