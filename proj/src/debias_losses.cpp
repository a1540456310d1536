#include "dgfair/debias_losses.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

namespace dgfair {

std::vector<ContrastBatch> sample_contrast_pairs(const std::vector<EvolutionLabel>& labels,
                                                 int n_neg, std::mt19937_64& rng) {
    if (n_neg < 1) throw Error("contrast sampling needs n_neg >= 1");
    int n = static_cast<int>(labels.size());

    std::vector<std::vector<int>> members(3);
    for (int v = 0; v < n; ++v) members[static_cast<size_t>(labels[static_cast<size_t>(v)])].push_back(v);

    int groups_present = 0;
    for (const auto& m : members)
        if (!m.empty()) ++groups_present;
    if (groups_present < 2)
        throw Error("contrast sampling needs at least two label groups");

    // Out-group pools, one per label, in ascending vertex order.
    std::vector<std::vector<int>> others(3);
    for (int l = 0; l < 3; ++l)
        for (int o = 0; o < 3; ++o)
            if (o != l)
                others[static_cast<size_t>(l)].insert(others[static_cast<size_t>(l)].end(),
                                                      members[static_cast<size_t>(o)].begin(),
                                                      members[static_cast<size_t>(o)].end());
    for (auto& pool : others) std::sort(pool.begin(), pool.end());

    long skipped = 0;
    std::vector<ContrastBatch> out;
    out.reserve(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) {
        size_t l = static_cast<size_t>(labels[static_cast<size_t>(v)]);
        const auto& group = members[l];
        const auto& pool = others[l];
        if (group.size() < 2) {
            ++skipped;
            continue;
        }
        ContrastBatch cb;
        cb.anchor = v;
        // positive: uniform over the group excluding the anchor itself
        std::uniform_int_distribution<size_t> pick_pos(0, group.size() - 2);
        size_t my_pos = static_cast<size_t>(
            std::lower_bound(group.begin(), group.end(), v) - group.begin());
        size_t j = pick_pos(rng);
        cb.positive = group[j >= my_pos ? j + 1 : j];

        if (pool.size() <= static_cast<size_t>(n_neg)) {
            cb.negatives = pool;  // whole out-group; smaller than requested
        } else {
            std::uniform_int_distribution<size_t> pick_neg(0, pool.size() - 1);
            std::unordered_set<int> seen;
            while (cb.negatives.size() < static_cast<size_t>(n_neg)) {
                int cand = pool[pick_neg(rng)];
                if (seen.insert(cand).second) cb.negatives.push_back(cand);
            }
        }
        out.push_back(std::move(cb));
    }
    if (skipped > 0)
        log_warn("contrast sampling skipped " + std::to_string(skipped) +
                 " anchors from singleton groups");
    if (out.empty()) throw Error("contrast sampling produced no usable anchors");
    return out;
}

ad::Var contrastive_loss(ad::Tape& t, ad::Var emb, const std::vector<ContrastBatch>& batch,
                         double tau) {
    if (tau <= 0.0) throw Error("contrastive temperature must be positive");
    if (batch.empty()) throw Error("contrastive loss: empty batch");

    // Anchors may carry different negative counts when a pool ran short;
    // bucket them so each bucket reshapes into a rectangle.
    std::map<size_t, std::vector<const ContrastBatch*>> buckets;
    for (const auto& cb : batch) {
        if (cb.negatives.empty()) throw Error("contrastive loss: anchor without negatives");
        buckets[cb.negatives.size()].push_back(&cb);
    }

    ad::Var total;
    for (const auto& [n_neg, items] : buckets) {
        std::vector<int> a_idx, p_idx, rep_idx, n_idx;
        for (const auto* cb : items) {
            a_idx.push_back(cb->anchor);
            p_idx.push_back(cb->positive);
            for (int neg : cb->negatives) {
                rep_idx.push_back(cb->anchor);
                n_idx.push_back(neg);
            }
        }
        int rows = static_cast<int>(items.size());
        ad::Var s_pos = t.cosine_rows(t.gather_rows(emb, a_idx), t.gather_rows(emb, p_idx));
        ad::Var s_neg = t.cosine_rows(t.gather_rows(emb, rep_idx), t.gather_rows(emb, n_idx));
        ad::Var e_neg = t.exp_(t.affine(s_neg, 1.0 / tau, 0.0));
        ad::Var neg_sum = t.sum_rows(t.reshape(e_neg, rows, static_cast<int>(n_neg)));
        ad::Var scaled_pos = t.affine(s_pos, 1.0 / tau, 0.0);
        ad::Var denom = t.add(t.exp_(scaled_pos), neg_sum);
        ad::Var per_anchor = t.sub(t.log_(denom), scaled_pos);
        ad::Var bucket_sum = t.sum_all(per_anchor);
        total = total.valid() ? t.add(total, bucket_sum) : bucket_sum;
    }
    return t.affine(total, 1.0 / static_cast<double>(batch.size()), 0.0);
}

double contrastive_loss_value(const Mat& emb, const std::vector<ContrastBatch>& batch,
                              double tau) {
    ad::Tape t;
    return t.scalar(contrastive_loss(t, t.constant(emb), batch, tau));
}

double link_probability(const std::vector<double>& a, const std::vector<double>& b,
                        const DecoderConfig& cfg) {
    if (a.size() != b.size()) throw Error("link probability: embedding width mismatch");
    if (cfg.temperature <= 0.0) throw Error("decoder temperature must be positive");
    double d2 = 0.0;
    for (size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    return 1.0 / (std::exp((d2 - cfg.radius) / cfg.temperature) + 1.0);
}

namespace {

std::vector<int> sample_negatives_impl(const std::vector<std::vector<int>>& adj, int v,
                                       int count, std::mt19937_64& rng, bool* short_pool) {
    int n = static_cast<int>(adj.size());
    const auto& nbrs = adj[static_cast<size_t>(v)];
    long avail = n - 1 - static_cast<long>(nbrs.size());
    std::vector<int> out;
    if (avail <= 0) {
        if (short_pool) *short_pool = true;
        return out;
    }
    if (avail <= count) {
        if (short_pool && avail < count) *short_pool = true;
        for (int u = 0; u < n; ++u) {
            if (u == v) continue;
            if (std::binary_search(nbrs.begin(), nbrs.end(), u)) continue;
            out.push_back(u);
        }
        return out;
    }
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::unordered_set<int> seen;
    while (out.size() < static_cast<size_t>(count)) {
        int u = pick(rng);
        if (u == v) continue;
        if (std::binary_search(nbrs.begin(), nbrs.end(), u)) continue;
        if (seen.insert(u).second) out.push_back(u);
    }
    return out;
}

}  // namespace

std::vector<int> sample_negative_endpoints(const std::vector<std::vector<int>>& union_adj,
                                           int v, int count, std::mt19937_64& rng) {
    if (v < 0 || static_cast<size_t>(v) >= union_adj.size())
        throw Error("negative sampling: vertex out of range");
    if (count < 0) throw Error("negative sampling: count must be >= 0");
    bool short_pool = false;
    auto out = sample_negatives_impl(union_adj, v, count, rng, &short_pool);
    if (short_pool)
        log_warn("vertex " + std::to_string(v) + " has only " + std::to_string(out.size()) +
                 " non-neighbors, requested " + std::to_string(count));
    return out;
}

LinkBatch build_link_batch(const std::vector<std::vector<int>>& union_adj,
                           std::mt19937_64& rng) {
    LinkBatch batch;
    long short_vertices = 0;
    int n = static_cast<int>(union_adj.size());
    for (int v = 0; v < n; ++v) {
        const auto& nbrs = union_adj[static_cast<size_t>(v)];
        if (nbrs.empty()) continue;
        for (int u : nbrs) {
            batch.pos_u.push_back(v);
            batch.pos_v.push_back(u);
            batch.pos_anchor.push_back(v);
        }
        bool short_pool = false;
        auto negs = sample_negatives_impl(union_adj, v, static_cast<int>(nbrs.size()), rng,
                                          &short_pool);
        if (short_pool) ++short_vertices;
        for (int u : negs) {
            batch.neg_u.push_back(v);
            batch.neg_v.push_back(u);
            batch.neg_anchor.push_back(v);
        }
    }
    if (short_vertices > 0)
        log_warn("negative sampling pools ran short for " + std::to_string(short_vertices) +
                 " vertices");
    return batch;
}

namespace {

constexpr double kProbEps = 1e-7;

// -log(p) for the positive side and -log(1-p) for the negative side, with p
// clamped away from 0 and 1 before the log.
ad::Var side_terms(ad::Tape& t, ad::Var emb, const std::vector<int>& us,
                   const std::vector<int>& vs, const DecoderConfig& cfg, bool positive,
                   long* clamped) {
    ad::Var d2 = t.sqdist_rows(t.gather_rows(emb, us), t.gather_rows(emb, vs));
    ad::Var p = t.sigmoid(t.affine(d2, -1.0 / cfg.temperature, cfg.radius / cfg.temperature));
    for (double x : t.value(p).d)
        if (x < kProbEps || x > 1.0 - kProbEps) ++(*clamped);
    ad::Var pc = t.clamp(p, kProbEps, 1.0 - kProbEps);
    ad::Var inside = positive ? pc : t.affine(pc, -1.0, 1.0);
    return t.affine(t.log_(inside), -1.0, 0.0);
}

ad::Var concat_terms(ad::Tape& t, ad::Var a, ad::Var b) {
    int na = t.value(a).rows, nb = t.value(b).rows;
    ad::Var row = t.concat_cols(t.reshape(a, 1, na), t.reshape(b, 1, nb));
    return t.reshape(row, na + nb, 1);
}

}  // namespace

ad::Var link_loss_terms(ad::Tape& t, ad::Var emb, const LinkBatch& batch,
                        const DecoderConfig& cfg) {
    if (cfg.temperature <= 0.0) throw Error("decoder temperature must be positive");
    if (batch.term_count() == 0) throw Error("link loss: empty batch");
    long clamped = 0;
    ad::Var terms;
    if (!batch.pos_u.empty())
        terms = side_terms(t, emb, batch.pos_u, batch.pos_v, cfg, true, &clamped);
    if (!batch.neg_u.empty()) {
        ad::Var neg = side_terms(t, emb, batch.neg_u, batch.neg_v, cfg, false, &clamped);
        terms = terms.valid() ? concat_terms(t, terms, neg) : neg;
    }
    if (clamped > 0)
        log_warn("link decoder clamped " + std::to_string(clamped) + " probabilities");
    return terms;
}

double link_prediction_loss_value(const Mat& emb, const LinkBatch& batch,
                                  const DecoderConfig& cfg) {
    ad::Tape t;
    return t.scalar(t.sum_all(link_loss_terms(t, t.constant(emb), batch, cfg)));
}

ad::Var fairness_gap(ad::Tape& t, ad::Var a, ad::Var b) { return t.abs_(t.sub(a, b)); }

double fairness_gap_value(double a, double b) { return std::fabs(a - b); }

ad::Var regularization(ad::Tape& t, const nn::BoundParams& bp, double lambda_l1,
                       double lambda_l2) {
    if (lambda_l1 == 0.0 && lambda_l2 == 0.0) return t.constant(Mat(1, 1));
    ad::Var acc;
    for (ad::Var p : bp.vars) {
        ad::Var term;
        if (lambda_l2 != 0.0) term = t.affine(t.sum_all(t.mul(p, p)), lambda_l2, 0.0);
        if (lambda_l1 != 0.0) {
            ad::Var l1 = t.affine(t.sum_all(t.abs_(p)), lambda_l1, 0.0);
            term = term.valid() ? t.add(term, l1) : l1;
        }
        acc = acc.valid() ? t.add(acc, term) : term;
    }
    return acc;
}

namespace {
void check_component(ad::Tape& t, ad::Var v, const char* name) {
    if (std::isnan(t.scalar(v)))
        throw Error(std::string("joint loss: ") + name + " component is NaN");
}
}  // namespace

ad::Var joint_loss(ad::Tape& t, ad::Var ds, ad::Var cls, ad::Var contrast, ad::Var fair,
                   const LossWeights& w, const nn::BoundParams& bp) {
    check_component(t, ds, "downstream");
    check_component(t, cls, "classification");
    check_component(t, contrast, "contrastive");
    check_component(t, fair, "fairness");
    ad::Var total = t.affine(ds, w.gamma_ds, 0.0);
    total = t.add(total, t.affine(cls, w.gamma_class, 0.0));
    total = t.add(total, t.affine(contrast, w.gamma_contrast, 0.0));
    total = t.add(total, t.affine(fair, w.gamma_fair, 0.0));
    total = t.add(total, regularization(t, bp, w.lambda_l1, w.lambda_l2));
    return total;
}

double joint_loss_value(double ds, double cls, double contrast, double fair,
                        const LossWeights& w, double l1_sum, double l2_sq_sum) {
    for (double x : {ds, cls, contrast, fair})
        if (std::isnan(x)) throw Error("joint loss: NaN component");
    return w.gamma_ds * ds + w.gamma_class * cls + w.gamma_contrast * contrast +
           w.gamma_fair * fair + w.lambda_l2 * l2_sq_sum + w.lambda_l1 * l1_sum;
}

}  // namespace dgfair
