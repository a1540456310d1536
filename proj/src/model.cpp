#include "dgfair/model.hpp"

#include <cmath>

#include "dgfair/util.hpp"

namespace dgfair {

EmbeddingModel::EmbeddingModel(const ExperimentConfig& cfg, int n_vertices,
                               bool plugin_mode, nn::ParamStore& ps,
                               std::mt19937_64& rng)
    : plugin_(plugin_mode) {
    features_ = ps.add("features", n_vertices, cfg.dim,
                       1.0 / std::sqrt((double)cfg.dim), rng);
    bool with_trend = !plugin_ && cfg.ablation != "no_deg";
    if (with_trend) {
        TrendEncoderConfig tc;
        tc.dim = cfg.dim;
        tc.gru_layers = cfg.trend_gru_layers;
        tc.log1p_input = cfg.trend_log1p;
        trend_ = std::make_unique<TrendEncoder>(tc, ps, rng);
    }
    BackboneConfig bc;
    bc.dim = cfg.dim;
    bc.gnn_layers = cfg.gnn_layers;
    bc.gru_layers = cfg.backbone_gru_layers;
    backbone_ = make_backbone(cfg.backbone, bc);
    backbone_->init_params(ps, rng);
    if (!plugin_)
        head_ = std::make_unique<FusionHead>(cfg.dim, with_trend, ps, rng);
}

EmbeddingModel::Forward EmbeddingModel::forward_window(
    ad::Tape& t, const ModelInputs& in, int w, const nn::BoundParams& bp) const {
    const WindowInputs& win = in.windows[(size_t)w];
    ad::Var h_str = backbone_->forward(t, win.ops, bp[features_], bp);
    if (plugin_) return {h_str, {}};
    ad::Var h_deg;
    if (trend_) h_deg = trend_->encode(t, win.degrees, bp);
    ad::Var fused = head_->fuse(t, h_deg, h_str, bp);
    ad::Var logits = head_->logits(t, fused, bp);
    return {fused, logits};
}

ad::Var EmbeddingModel::classification(ad::Tape& t, ad::Var logits,
                                       const std::vector<EvolutionLabel>& labels,
                                       const ExperimentConfig& cfg) const {
    if (!head_) throw Error("classification loss unavailable in plugin mode");
    return head_->class_loss(t, logits, labels, cfg.class_loss, cfg.normalize_losses);
}

Mat EmbeddingModel::mean_embeddings(const ModelInputs& in,
                                    const nn::ParamStore& ps) const {
    ad::Tape t;
    nn::BoundParams bp = nn::bind(t, ps);
    Mat acc;
    for (size_t w = 0; w < in.windows.size(); ++w) {
        Forward f = forward_window(t, in, (int)w, bp);
        const Mat& v = t.value(f.emb);
        if (w == 0) {
            acc = v;
        } else {
            for (size_t i = 0; i < acc.d.size(); ++i) acc.d[i] += v.d[i];
        }
    }
    double inv = 1.0 / (double)in.windows.size();
    for (double& x : acc.d) x *= inv;
    return acc;
}

WindowBatch sample_window_batch(const ModelInputs& in, int w,
                                const ExperimentConfig& cfg, bool plugin,
                                std::mt19937_64& rng) {
    WindowBatch batch;
    if (!plugin)
        batch.contrast = sample_contrast_pairs(in.labels, cfg.contrast_negatives, rng);
    batch.link = build_link_batch(in.windows[(size_t)w].union_adj, rng);
    return batch;
}

namespace {

// Term indices (positives first, then negatives) owned by a fairness group.
std::vector<int> group_term_indices(const LinkBatch& link,
                                    const std::vector<std::uint8_t>& member) {
    std::vector<int> idx;
    int p = (int)link.pos_anchor.size();
    for (int i = 0; i < p; ++i)
        if (member[(size_t)link.pos_anchor[(size_t)i]]) idx.push_back(i);
    for (int j = 0; j < (int)link.neg_anchor.size(); ++j)
        if (member[(size_t)link.neg_anchor[(size_t)j]]) idx.push_back(p + j);
    return idx;
}

}  // namespace

LossNodes batch_loss(ad::Tape& t, const EmbeddingModel& model,
                     const EmbeddingModel::Forward& f, const ModelInputs& in,
                     const WindowBatch& batch, const ExperimentConfig& cfg,
                     const nn::BoundParams& bp) {
    ad::Var zero = t.constant(Mat::zeros(1, 1));

    LossNodes out;
    if (batch.link.term_count() > 0) {
        ad::Var terms = link_loss_terms(t, f.emb, batch.link, cfg.decoder);
        out.ds = cfg.normalize_losses ? t.mean_all(terms) : t.sum_all(terms);
        std::vector<int> ia = group_term_indices(batch.link, in.in_group_a);
        std::vector<int> ib = group_term_indices(batch.link, in.in_group_b);
        if (ia.empty() || ib.empty()) {
            out.fair = zero;
        } else {
            ad::Var ga = t.gather_rows(terms, std::move(ia));
            ad::Var gb = t.gather_rows(terms, std::move(ib));
            ad::Var la = cfg.normalize_losses ? t.mean_all(ga) : t.sum_all(ga);
            ad::Var lb = cfg.normalize_losses ? t.mean_all(gb) : t.sum_all(gb);
            out.fair = fairness_gap(t, la, lb);
        }
    } else {
        out.ds = zero;
        out.fair = zero;
    }

    out.cls = model.plugin_mode()
                  ? zero
                  : model.classification(t, f.logits, in.labels, cfg);

    out.contrast = batch.contrast.empty()
                       ? zero
                       : contrastive_loss(t, f.emb, batch.contrast, cfg.tau);

    out.total = joint_loss(t, out.ds, out.cls, out.contrast, out.fair,
                           cfg.weights, bp);
    return out;
}

LossNodes window_loss(ad::Tape& t, const EmbeddingModel& model, const ModelInputs& in,
                      int w, const WindowBatch& batch, const ExperimentConfig& cfg,
                      const nn::BoundParams& bp) {
    EmbeddingModel::Forward f = model.forward_window(t, in, w, bp);
    return batch_loss(t, model, f, in, batch, cfg, bp);
}

}  // namespace dgfair
