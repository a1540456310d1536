#include "dgfair/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dgfair/util.hpp"

namespace dgfair {
namespace {

constexpr int kIntervalWidth = 86400;
constexpr int kMaxAttempts = 10;

struct SideState {
    int count = 0;
    std::vector<EvolutionLabel> cls;
    std::vector<int> community;
    std::vector<std::vector<int>> sched;  // [vertex][snapshot] -> stub count
};

int pareto_extra(double exponent, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double x = std::pow(1.0 - unit(rng), -1.0 / (exponent - 1.0));
    return std::min(30, (int)x - 1);
}

std::vector<EvolutionLabel> side_classes(int n, const SyntheticSpec& spec,
                                         std::mt19937_64& rng) {
    int n_sfh = (int)std::lround(spec.ratio_sfh * n);
    int n_t2h = (int)std::lround(spec.ratio_t2h * n);
    n_sfh = std::min(n_sfh, n);
    n_t2h = std::min(n_t2h, n - n_sfh);
    std::vector<EvolutionLabel> cls(n, EvolutionLabel::FaT);
    for (int i = 0; i < n_sfh; ++i) cls[i] = EvolutionLabel::SfH;
    for (int i = 0; i < n_t2h; ++i) cls[n_sfh + i] = EvolutionLabel::T2H;
    std::shuffle(cls.begin(), cls.end(), rng);
    return cls;
}

SideState build_side(int n, const SyntheticSpec& spec, std::mt19937_64& rng) {
    SideState side;
    side.count = n;
    side.cls = side_classes(n, spec, rng);
    side.community.resize(n);
    std::uniform_int_distribution<int> comm(0, spec.communities - 1);
    for (int v = 0; v < n; ++v) side.community[v] = comm(rng);

    int T = spec.snapshots;
    std::uniform_int_distribution<int> start(1, 3);
    std::uniform_int_distribution<int> jitter(-1, 1);
    side.sched.assign(n, std::vector<int>(T, 0));
    for (int v = 0; v < n; ++v) {
        auto& d = side.sched[v];
        if (side.cls[v] == EvolutionLabel::T2H) {
            double s = start(rng);
            double e = spec.theta + 3 + pareto_extra(spec.exponent, rng);
            for (int t = 0; t < T; ++t)
                d[t] = (int)std::llround(s + (e - s) * t / (T - 1));
        } else if (side.cls[v] == EvolutionLabel::SfH) {
            int base = spec.theta + 3 + pareto_extra(spec.exponent, rng);
            for (int t = 0; t < T; ++t)
                d[t] = std::max(spec.theta + 1, base + jitter(rng));
        }
        // FaT schedules are filled later once the tail intensity is known.
    }
    return side;
}

void fill_tail_schedules(SideState& side, const SyntheticSpec& spec,
                         const std::vector<double>& tail_mean,
                         std::mt19937_64& rng) {
    int T = spec.snapshots;
    int cap = std::min(3, spec.theta - 1);
    for (int v = 0; v < side.count; ++v) {
        if (side.cls[v] != EvolutionLabel::FaT) continue;
        auto& d = side.sched[v];
        for (int t = 0; t < T; ++t) {
            std::poisson_distribution<int> pois(tail_mean[t]);
            d[t] = std::min(cap, pois(rng));
        }
        if (std::all_of(d.begin(), d.end(), [](int x) { return x == 0; })) {
            std::uniform_int_distribution<int> pick(0, T - 1);
            d[pick(rng)] = 1;  // keep every vertex in the log
        }
    }
}

// Mean tail stub count per snapshot so realized edge counts approach the
// requested target once head schedules are fixed.
std::vector<double> tail_intensity(const SideState& users, const SideState& items,
                                   const SyntheticSpec& spec) {
    int T = spec.snapshots;
    std::vector<double> mu(T, 1.0);
    if (spec.edges_per_snapshot <= 0) return mu;
    int n_tail = 0;
    std::vector<long> head_stubs(T, 0);
    for (const SideState* side : {&users, &items}) {
        for (int v = 0; v < side->count; ++v) {
            if (side->cls[v] == EvolutionLabel::FaT) {
                ++n_tail;
                continue;
            }
            for (int t = 0; t < T; ++t) head_stubs[t] += side->sched[v][t];
        }
    }
    double cap = std::min(3, spec.theta - 1);
    for (int t = 0; t < T; ++t) {
        double want = 2.0 * spec.edges_per_snapshot - (double)head_stubs[t];
        double m = n_tail > 0 ? want / n_tail : 0.0;
        mu[t] = std::clamp(m, 0.05, cap);
    }
    return mu;
}

// Grow tail schedules on the deficient side until stub counts match. Keeps
// every bumped vertex strictly below theta so planted labels stay valid.
void balance_stubs(SideState& lo, int deficit, int snapshot, int theta,
                   std::mt19937_64& rng) {
    std::vector<int> tail;
    for (int v = 0; v < lo.count; ++v)
        if (lo.cls[v] == EvolutionLabel::FaT) tail.push_back(v);
    std::shuffle(tail.begin(), tail.end(), rng);
    size_t cursor = 0;
    size_t stalled = 0;
    while (deficit > 0 && stalled < tail.size()) {
        int v = tail[cursor];
        cursor = (cursor + 1) % tail.size();
        if (lo.sched[v][snapshot] < theta - 1) {
            ++lo.sched[v][snapshot];
            --deficit;
            stalled = 0;
        } else {
            ++stalled;
        }
    }
    if (deficit > 0)
        throw Error("synthetic generator: cannot balance stub counts, "
                    "too few tail vertices");
}

std::vector<int> stub_list(const SideState& side, int snapshot) {
    std::vector<int> stubs;
    for (int v = 0; v < side.count; ++v)
        for (int k = 0; k < side.sched[v][snapshot]; ++k) stubs.push_back(v);
    return stubs;
}

// Pair user stubs with item stubs, preferring same-community partners for a
// spec.affinity share of the shorter bucket.
std::vector<std::pair<int, int>> match_stubs(const SideState& users,
                                             const SideState& items,
                                             int snapshot, double affinity,
                                             int communities,
                                             std::mt19937_64& rng) {
    std::vector<std::vector<int>> ub(communities), ib(communities);
    for (int v : stub_list(users, snapshot)) ub[users.community[v]].push_back(v);
    for (int v : stub_list(items, snapshot)) ib[items.community[v]].push_back(v);

    std::vector<std::pair<int, int>> pairs;
    std::vector<int> upool, ipool;
    for (int c = 0; c < communities; ++c) {
        std::shuffle(ub[c].begin(), ub[c].end(), rng);
        std::shuffle(ib[c].begin(), ib[c].end(), rng);
        size_t local = (size_t)(affinity * std::min(ub[c].size(), ib[c].size()));
        for (size_t k = 0; k < local; ++k) pairs.emplace_back(ub[c][k], ib[c][k]);
        upool.insert(upool.end(), ub[c].begin() + local, ub[c].end());
        ipool.insert(ipool.end(), ib[c].begin() + local, ib[c].end());
    }
    std::shuffle(upool.begin(), upool.end(), rng);
    std::shuffle(ipool.begin(), ipool.end(), rng);
    size_t rest = std::min(upool.size(), ipool.size());
    for (size_t k = 0; k < rest; ++k) pairs.emplace_back(upool[k], ipool[k]);
    return pairs;
}

void validate(const SyntheticSpec& spec) {
    if (spec.vertices < 8) throw Error("synthetic spec: need at least 8 vertices");
    if (spec.snapshots < 2) throw Error("synthetic spec: need at least 2 snapshots");
    if (spec.theta < 4) throw Error("synthetic spec: theta must be at least 4");
    if (spec.communities < 1) throw Error("synthetic spec: communities must be positive");
    if (spec.affinity < 0.0 || spec.affinity > 1.0)
        throw Error("synthetic spec: affinity must lie in [0,1]");
    if (spec.exponent <= 1.0) throw Error("synthetic spec: exponent must exceed 1");
    double sum = spec.ratio_fat + spec.ratio_t2h + spec.ratio_sfh;
    if (spec.ratio_fat < 0 || spec.ratio_t2h < 0 || spec.ratio_sfh < 0 ||
        std::abs(sum - 1.0) > 1e-6)
        throw Error("synthetic spec: class ratios must be non-negative and sum to 1");
}

SyntheticData generate_once(const SyntheticSpec& spec, std::mt19937_64& rng) {
    int n_users = spec.vertices / 2;
    int n_items = spec.vertices - n_users;
    SideState users = build_side(n_users, spec, rng);
    SideState items = build_side(n_items, spec, rng);
    std::vector<double> mu = tail_intensity(users, items, spec);
    fill_tail_schedules(users, spec, mu, rng);
    fill_tail_schedules(items, spec, mu, rng);

    int T = spec.snapshots;
    for (int t = 0; t < T; ++t) {
        long su = 0, si = 0;
        for (int v = 0; v < users.count; ++v) su += users.sched[v][t];
        for (int v = 0; v < items.count; ++v) si += items.sched[v][t];
        if (su < si) balance_stubs(users, (int)(si - su), t, spec.theta, rng);
        if (si < su) balance_stubs(items, (int)(su - si), t, spec.theta, rng);
    }

    SyntheticData data;
    data.interval_width = kIntervalWidth;
    std::uniform_int_distribution<int> offset(0, kIntervalWidth - 2);
    for (int t = 0; t < T; ++t) {
        auto pairs = match_stubs(users, items, t, spec.affinity,
                                 spec.communities, rng);
        std::set<std::pair<int, int>> seen;
        bool first_in_snapshot = true;
        for (auto [u, i] : pairs) {
            if (!seen.insert({u, i}).second) continue;
            std::int64_t ts = (std::int64_t)t * kIntervalWidth + offset(rng);
            if (t == 0 && first_in_snapshot) ts = 0;
            if (t == T - 1 && first_in_snapshot)
                ts = (std::int64_t)T * kIntervalWidth - 1;
            first_in_snapshot = false;
            data.records.push_back({std::to_string(u), std::to_string(i), ts});
        }
        if (first_in_snapshot)
            throw Error("synthetic generator: snapshot produced no edges");
    }
    std::sort(data.records.begin(), data.records.end(),
              [](const InteractionRecord& a, const InteractionRecord& b) {
                  return std::tie(a.timestamp, a.user_id, a.item_id) <
                         std::tie(b.timestamp, b.user_id, b.item_id);
              });

    std::vector<std::pair<std::string, EvolutionLabel>> tagged;
    for (int v = 0; v < users.count; ++v)
        tagged.emplace_back(user_vertex(std::to_string(v)), users.cls[v]);
    for (int v = 0; v < items.count; ++v)
        tagged.emplace_back(item_vertex(std::to_string(v)), items.cls[v]);
    std::sort(tagged.begin(), tagged.end());
    for (auto& [id, cls] : tagged) {
        data.vertex_ids.push_back(id);
        data.planted.push_back(cls);
    }
    return data;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec, unsigned long seed) {
    validate(spec);
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull * (unsigned long)attempt);
        try {
            return generate_once(spec, rng);
        } catch (const Error& e) {
            log_warn(std::string("synthetic generator retry: ") + e.what());
        }
    }
    throw Error("synthetic generator: spec produced no valid log after retries");
}

std::map<EvolutionLabel, double> planted_ratios(const SyntheticData& data) {
    std::map<EvolutionLabel, double> out;
    if (data.planted.empty()) return out;
    for (EvolutionLabel l : data.planted) out[l] += 1.0;
    for (auto& [k, v] : out) v /= (double)data.planted.size();
    return out;
}

}  // namespace dgfair
