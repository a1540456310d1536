#pragma once

#include <memory>
#include <random>
#include <vector>

#include "dgfair/backbone.hpp"
#include "dgfair/config.hpp"
#include "dgfair/debias_losses.hpp"
#include "dgfair/fusion_head.hpp"
#include "dgfair/trend_encoder.hpp"

namespace dgfair {

// One contiguous window of the snapshot sequence, remapped to model indices.
struct WindowInputs {
    SnapshotOperators ops;
    Mat degrees;  // n x snapshots_in_window raw counts
    std::vector<std::vector<int>> union_adj;  // union graph of this window
};

struct ModelInputs {
    int n = 0;
    std::vector<WindowInputs> windows;
    std::vector<EvolutionLabel> labels;  // full-horizon labels
    // Fairness groups as vertex index lists plus membership bitmaps.
    std::vector<int> group_a, group_b;
    std::vector<std::uint8_t> in_group_a, in_group_b;
    std::string group_a_name = "T2H", group_b_name = "SfH";
};

// Full embedding model: free vertex features, structural backbone, optional
// degree-trend branch, fusion and classification head. In plugin mode only
// the backbone runs and its output is the embedding (no trend branch, no
// classifier); that is the shape used to retrofit the fairness loss onto a
// plain baseline encoder.
class EmbeddingModel {
public:
    EmbeddingModel(const ExperimentConfig& cfg, int n_vertices, bool plugin_mode,
                   nn::ParamStore& ps, std::mt19937_64& rng);

    bool plugin_mode() const { return plugin_; }
    bool has_trend() const { return trend_ != nullptr; }

    struct Forward {
        ad::Var emb;
        ad::Var logits;  // invalid in plugin mode
    };
    Forward forward_window(ad::Tape& t, const ModelInputs& in, int w,
                           const nn::BoundParams& bp) const;

    // Classification loss on window logits; must not be called in plugin mode.
    ad::Var classification(ad::Tape& t, ad::Var logits,
                           const std::vector<EvolutionLabel>& labels,
                           const ExperimentConfig& cfg) const;

    // Evaluation view: per-window embeddings averaged, no gradients.
    Mat mean_embeddings(const ModelInputs& in, const nn::ParamStore& ps) const;

private:
    bool plugin_ = false;
    int features_ = -1;  // n x dim free feature table
    std::unique_ptr<TrendEncoder> trend_;
    std::unique_ptr<Backbone> backbone_;
    std::unique_ptr<FusionHead> head_;
};

// Per-step samples for one window. Contrast pairs are skipped in plugin mode.
struct WindowBatch {
    std::vector<ContrastBatch> contrast;
    LinkBatch link;
};

WindowBatch sample_window_batch(const ModelInputs& in, int w,
                                const ExperimentConfig& cfg, bool plugin,
                                std::mt19937_64& rng);

struct LossNodes {
    ad::Var total, ds, cls, contrast, fair;
};

// Assembles the weighted joint objective from an existing window forward,
// so several batches (training step, convergence probe) can share one trunk.
// With cfg.normalize_losses the link and classification terms are per-term
// means (group terms likewise), otherwise raw sums.
LossNodes batch_loss(ad::Tape& t, const EmbeddingModel& model,
                     const EmbeddingModel::Forward& f, const ModelInputs& in,
                     const WindowBatch& batch, const ExperimentConfig& cfg,
                     const nn::BoundParams& bp);

// Convenience: forward + batch_loss for one window.
LossNodes window_loss(ad::Tape& t, const EmbeddingModel& model, const ModelInputs& in,
                      int w, const WindowBatch& batch, const ExperimentConfig& cfg,
                      const nn::BoundParams& bp);

}  // namespace dgfair
