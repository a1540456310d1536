#pragma once

#include <array>
#include <random>
#include <vector>

#include "dgfair/autodiff.hpp"
#include "dgfair/evolution_labeler.hpp"
#include "dgfair/nn.hpp"

namespace dgfair {

enum class ClassLossMode {
    double_softmax,   // cross-entropy applied to the already-normalized scores
    single_softmax,   // conventional cross-entropy on raw logits
};

// Combines the degree-trend and structural embeddings and classifies each
// vertex into the three evolution classes (logit order SfH, T2H, FaT).
class FusionHead {
public:
    // with_trend_branch=false narrows the fusion input to the structural
    // embedding alone (dim instead of 2*dim).
    FusionHead(int dim, bool with_trend_branch, nn::ParamStore& ps, std::mt19937_64& rng);

    bool has_trend_branch() const { return with_trend_; }

    // h_deg may be invalid when the trend branch is disabled.
    ad::Var fuse(ad::Tape& t, ad::Var h_deg, ad::Var h_str, const nn::BoundParams& bp) const;

    ad::Var logits(ad::Tape& t, ad::Var fused, const nn::BoundParams& bp) const;

    // Normalized class scores: softmax over rectified logits.
    ad::Var probabilities(ad::Tape& t, ad::Var logits) const;

    // Classification loss from raw logits under the chosen mode; `mean`
    // divides by the batch size so the weight of the term is batch-invariant.
    ad::Var class_loss(ad::Tape& t, ad::Var logits, const std::vector<EvolutionLabel>& labels,
                       ClassLossMode mode, bool mean) const;

private:
    bool with_trend_;
    nn::Linear fuse_;
    nn::Linear mlp1_;
    nn::Linear mlp2_;
};

// Cross-entropy of a second softmax over already-normalized scores, summed
// over rows. Pure helper mirroring the in-graph loss for hand-value tests.
double classification_loss_value(const std::vector<std::array<double, 3>>& scores,
                                 const std::vector<EvolutionLabel>& labels);

}  // namespace dgfair
