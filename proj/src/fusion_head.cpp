#include "dgfair/fusion_head.hpp"

#include <cmath>

namespace dgfair {

FusionHead::FusionHead(int dim, bool with_trend_branch, nn::ParamStore& ps,
                       std::mt19937_64& rng)
    : with_trend_(with_trend_branch) {
    if (dim < 1) throw Error("fusion head dim must be >= 1");
    fuse_.init(ps, "fusion", with_trend_branch ? 2 * dim : dim, dim, true, rng);
    mlp1_.init(ps, "head.mlp1", dim, dim, true, rng);
    mlp2_.init(ps, "head.mlp2", dim, 3, true, rng);
}

ad::Var FusionHead::fuse(ad::Tape& t, ad::Var h_deg, ad::Var h_str,
                         const nn::BoundParams& bp) const {
    if (!with_trend_) return fuse_.forward(t, h_str, bp);
    if (!h_deg.valid()) throw Error("fusion head: missing degree-trend embedding");
    return fuse_.forward(t, t.concat_cols(h_deg, h_str), bp);
}

ad::Var FusionHead::logits(ad::Tape& t, ad::Var fused, const nn::BoundParams& bp) const {
    return mlp2_.forward(t, t.relu(mlp1_.forward(t, fused, bp)), bp);
}

ad::Var FusionHead::probabilities(ad::Tape& t, ad::Var logits) const {
    return t.softmax_rows(t.relu(logits));
}

ad::Var FusionHead::class_loss(ad::Tape& t, ad::Var logits,
                               const std::vector<EvolutionLabel>& labels, ClassLossMode mode,
                               bool mean) const {
    const Mat& lv = t.value(logits);
    if (static_cast<size_t>(lv.rows) != labels.size())
        throw Error("class loss: label count does not match logit rows");
    if (labels.empty()) return t.constant(Mat(1, 1));  // empty batch contributes zero

    ad::Var scores = (mode == ClassLossMode::double_softmax) ? probabilities(t, logits) : logits;
    ad::Var log_probs = t.log_(t.softmax_rows(scores));

    Mat onehot(static_cast<int>(labels.size()), 3);
    for (size_t i = 0; i < labels.size(); ++i)
        onehot(static_cast<int>(i), static_cast<int>(labels[i])) = 1.0;
    ad::Var picked = t.sum_all(t.mul(log_probs, t.constant(std::move(onehot))));
    double scale = mean ? -1.0 / static_cast<double>(labels.size()) : -1.0;
    return t.affine(picked, scale, 0.0);
}

double classification_loss_value(const std::vector<std::array<double, 3>>& scores,
                                 const std::vector<EvolutionLabel>& labels) {
    if (scores.size() != labels.size()) throw Error("classification loss: size mismatch");
    double loss = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        double mx = std::max({scores[i][0], scores[i][1], scores[i][2]});
        double denom = 0.0;
        for (double s : scores[i]) denom += std::exp(s - mx);
        loss -= (scores[i][static_cast<size_t>(labels[i])] - mx) - std::log(denom);
    }
    return loss;
}

}  // namespace dgfair
