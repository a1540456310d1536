#include "dgfair/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace dgfair {

namespace {

long hits_in_top_k(const RankedList& l, int k) {
    std::unordered_set<int> pos(l.positives.begin(), l.positives.end());
    long hits = 0;
    int depth = std::min<int>(k, static_cast<int>(l.ranking.size()));
    for (int i = 0; i < depth; ++i)
        if (pos.count(l.ranking[static_cast<size_t>(i)])) ++hits;
    return hits;
}

void check_k(int k) {
    if (k < 1) throw Error("metric depth k must be >= 1");
}

}  // namespace

double hit_rate_at(const std::vector<RankedList>& lists, int k) {
    check_k(k);
    long hits = 0, positives = 0;
    for (const auto& l : lists) {
        if (l.positives.empty()) continue;
        hits += hits_in_top_k(l, k);
        positives += static_cast<long>(l.positives.size());
    }
    if (positives == 0) throw Error("hit rate undefined: no positives in any list");
    return static_cast<double>(hits) / static_cast<double>(positives);
}

double precision_at(const std::vector<RankedList>& lists, int k) {
    check_k(k);
    long hits = 0, slots = 0;
    for (const auto& l : lists) {
        if (l.positives.empty()) continue;
        hits += hits_in_top_k(l, k);
        slots += k;
    }
    if (slots == 0) throw Error("precision undefined: no prediction lists to score");
    return static_cast<double>(hits) / static_cast<double>(slots);
}

double ndcg_at(const std::vector<RankedList>& lists, int k) {
    check_k(k);
    double acc = 0.0;
    long counted = 0;
    for (const auto& l : lists) {
        if (l.positives.empty()) continue;
        std::unordered_set<int> pos(l.positives.begin(), l.positives.end());
        double gain = 0.0;
        int depth = std::min<int>(k, static_cast<int>(l.ranking.size()));
        for (int i = 0; i < depth; ++i)
            if (pos.count(l.ranking[static_cast<size_t>(i)]))
                gain += 1.0 / std::log2(static_cast<double>(i) + 2.0);
        acc += gain / static_cast<double>(l.positives.size());
        ++counted;
    }
    if (counted == 0) throw Error("ndcg undefined: no positives in any list");
    return acc / static_cast<double>(counted);
}

std::vector<int> truncate_cutoffs(const std::vector<int>& cutoffs, long universe) {
    std::vector<int> out;
    for (int k : cutoffs)
        if (k <= universe) out.push_back(k);
    return out;
}

namespace {

// Shared skeleton of the two bias scores; weight(k) differs and rnd drops
// the k = 1 depth (its log weight is undefined).
double bias_score(const std::vector<int>& ranking, const FairnessContext& ctx, bool log_weight) {
    if (ctx.protected_flags == nullptr) throw Error("fairness context missing protected flags");
    if (ctx.universe < 1) throw Error("fairness context has an empty universe");
    if (ctx.protected_count < 0 || ctx.protected_count > ctx.universe)
        throw Error("fairness context: protected count out of range");

    std::vector<int> ks = truncate_cutoffs(ctx.cutoffs, ctx.universe);
    if (log_weight) {
        std::vector<int> kept;
        for (int k : ks)
            if (k >= 2) kept.push_back(k);
        ks = std::move(kept);
    }
    if (ks.empty()) return 0.0;
    if (static_cast<long>(ranking.size()) < ks.back())
        throw Error("ranking shorter than the largest evaluation depth");

    double global = static_cast<double>(ctx.protected_count) / static_cast<double>(ctx.universe);
    auto weight = [log_weight](int k) {
        return log_weight ? 1.0 / std::log2(static_cast<double>(k)) : 1.0;
    };

    const auto& flags = *ctx.protected_flags;
    double actual = 0.0;
    {
        long count = 0;
        size_t next = 0;
        for (int k : ks) {
            while (next < static_cast<size_t>(k)) {
                int id = ranking[next];
                if (id < 0 || static_cast<size_t>(id) >= flags.size())
                    throw Error("ranking contains an id outside the protected-flag table");
                count += flags[static_cast<size_t>(id)] ? 1 : 0;
                ++next;
            }
            actual += weight(k) *
                      std::fabs(static_cast<double>(count) / static_cast<double>(k) - global);
        }
    }

    double z_first = 0.0, z_last = 0.0;
    for (int k : ks) {
        long first = std::min<long>(k, ctx.protected_count);
        long last = std::max<long>(0, k - (ctx.universe - ctx.protected_count));
        z_first += weight(k) *
                   std::fabs(static_cast<double>(first) / static_cast<double>(k) - global);
        z_last += weight(k) *
                  std::fabs(static_cast<double>(last) / static_cast<double>(k) - global);
    }
    double z = std::max(z_first, z_last);
    if (z == 0.0) return 0.0;  // degenerate parity: nothing to misrank
    return actual / z;
}

}  // namespace

double rhr(const std::vector<int>& ranking, const FairnessContext& ctx) {
    return bias_score(ranking, ctx, false);
}

double rnd(const std::vector<int>& ranking, const FairnessContext& ctx) {
    return bias_score(ranking, ctx, true);
}

}  // namespace dgfair
