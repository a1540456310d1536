#pragma once

#include <random>
#include <vector>

#include "dgfair/autodiff.hpp"
#include "dgfair/evolution_labeler.hpp"
#include "dgfair/nn.hpp"

namespace dgfair {

// One anchor with its in-group positive and out-group negatives.
struct ContrastBatch {
    int anchor = -1;
    int positive = -1;
    std::vector<int> negatives;
};

// For every vertex whose label group has another member, draw one positive
// uniformly from the group and n_neg distinct negatives uniformly from the
// other groups. Anchors whose group is a singleton are skipped.
std::vector<ContrastBatch> sample_contrast_pairs(const std::vector<EvolutionLabel>& labels,
                                                 int n_neg, std::mt19937_64& rng);

// Temperature-scaled InfoNCE over cosine similarities, averaged per anchor.
ad::Var contrastive_loss(ad::Tape& t, ad::Var emb, const std::vector<ContrastBatch>& batch,
                         double tau);
double contrastive_loss_value(const Mat& emb, const std::vector<ContrastBatch>& batch,
                              double tau);

struct DecoderConfig {
    double radius = 2.0;       // squared-distance offset r
    double temperature = 1.0;  // decoder temperature t
};

// Fermi-Dirac edge probability: 1 / (exp((d^2 - r) / t) + 1).
double link_probability(const std::vector<double>& a, const std::vector<double>& b,
                        const DecoderConfig& cfg);

// Negative endpoints for v: uniform without replacement from vertices that
// are neither v nor union-graph neighbors of v. Falls back to every available
// candidate (with a warning) when the pool is smaller than count.
std::vector<int> sample_negative_endpoints(const std::vector<std::vector<int>>& union_adj,
                                           int v, int count, std::mt19937_64& rng);

// Link-reconstruction batch: every union-graph edge appears once per
// endpoint, each endpoint also contributes the same number of sampled
// negatives. anchor arrays record which vertex each term belongs to.
struct LinkBatch {
    std::vector<int> pos_u, pos_v, pos_anchor;
    std::vector<int> neg_u, neg_v, neg_anchor;
    size_t term_count() const { return pos_u.size() + neg_u.size(); }
};

LinkBatch build_link_batch(const std::vector<std::vector<int>>& union_adj,
                           std::mt19937_64& rng);

// Per-term negative log-likelihoods (positives first, then negatives), with
// probabilities clamped to [1e-7, 1 - 1e-7].
ad::Var link_loss_terms(ad::Tape& t, ad::Var emb, const LinkBatch& batch,
                        const DecoderConfig& cfg);

// Plain sum over all terms of the batch.
double link_prediction_loss_value(const Mat& emb, const LinkBatch& batch,
                                  const DecoderConfig& cfg);

// Absolute gap between two group-level downstream losses.
ad::Var fairness_gap(ad::Tape& t, ad::Var a, ad::Var b);
double fairness_gap_value(double a, double b);

struct LossWeights {
    double gamma_ds = 0.25;
    double gamma_class = 0.25;
    double gamma_contrast = 0.25;
    double gamma_fair = 0.25;
    double lambda_l1 = 1e-6;
    double lambda_l2 = 1e-5;
};

// lambda_l2 * sum(theta^2) + lambda_l1 * sum(|theta|) over every parameter.
ad::Var regularization(ad::Tape& t, const nn::BoundParams& bp, double lambda_l1,
                       double lambda_l2);

// Weighted combination of the four components plus regularization. Throws,
// naming the component, if any input is NaN.
ad::Var joint_loss(ad::Tape& t, ad::Var ds, ad::Var cls, ad::Var contrast, ad::Var fair,
                   const LossWeights& w, const nn::BoundParams& bp);
double joint_loss_value(double ds, double cls, double contrast, double fair,
                        const LossWeights& w, double l1_sum = 0.0, double l2_sq_sum = 0.0);

}  // namespace dgfair
