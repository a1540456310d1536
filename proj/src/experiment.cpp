#include "dgfair/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "dgfair/synthetic.hpp"
#include "dgfair/util.hpp"

namespace dgfair {
namespace {

constexpr unsigned long kInitSalt = 0x5deece66dull;
constexpr unsigned long kSampleSalt = 0x9e3779b97f4a7c15ull;
constexpr unsigned long kMonitorSalt = 0xc2b2ae3d27d4eb4full;
constexpr unsigned long kScaleSalt = 0xd6e8feb86659fd93ull;

std::vector<InteractionRecord> acquire_records(const ExperimentConfig& cfg,
                                               unsigned long seed,
                                               bool* synthetic) {
    if (!cfg.data_path.empty()) {
        *synthetic = false;
        return ingest_log(cfg.data_path);
    }
    SyntheticSpec spec = cfg.synth;
    spec.snapshots = cfg.snapshots;
    *synthetic = true;
    return generate_synthetic(spec, seed).records;
}

// Held-out pair per user: the record with the largest (timestamp, item id).
std::map<std::string, std::string> held_out_items(
    const std::vector<InteractionRecord>& records) {
    std::map<std::string, std::pair<std::int64_t, std::string>> best;
    for (const InteractionRecord& r : records) {
        auto it = best.find(r.user_id);
        std::pair<std::int64_t, std::string> key{r.timestamp, r.item_id};
        if (it == best.end() || key > it->second) best[r.user_id] = key;
    }
    std::map<std::string, std::string> out;
    for (auto& [user, key] : best) out[user] = key.second;
    return out;
}

}  // namespace

Dataset prepare_dataset(const ExperimentConfig& cfg, unsigned long seed,
                        bool plugin_mode,
                        const std::vector<InteractionRecord>* records_override) {
    validate_config(cfg);
    Dataset data;
    std::vector<InteractionRecord> records;
    if (records_override != nullptr) {
        records = *records_override;
        data.synthetic = false;
    } else {
        records = acquire_records(cfg, seed, &data.synthetic);
    }
    if (records.empty()) throw Error("no interaction records to train on");

    // Model universe spans the full log so held-out items keep embeddings.
    std::vector<std::string>& ids = data.vertex_ids;
    ids.reserve(records.size() * 2);
    for (const InteractionRecord& r : records) {
        ids.push_back(user_vertex(r.user_id));
        ids.push_back(item_vertex(r.item_id));
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    int n = (int)ids.size();
    auto model_index = [&ids](const std::string& id) {
        auto it = std::lower_bound(ids.begin(), ids.end(), id);
        return (int)(it - ids.begin());
    };

    std::map<std::string, std::string> held = held_out_items(records);
    std::vector<InteractionRecord> train;
    train.reserve(records.size());
    for (const InteractionRecord& r : records)
        if (held.at(r.user_id) != r.item_id) train.push_back(r);
    if (train.empty())
        throw Error("hold-out split left no training records");

    DynamicGraph g = build_snapshots(train, cfg.snapshots, cfg.windows);
    int T = cfg.snapshots;

    std::vector<int> remap((size_t)g.vertex_count());
    for (int i = 0; i < g.vertex_count(); ++i)
        remap[(size_t)i] = model_index(g.vertex_id(i));

    std::vector<std::vector<std::pair<int, int>>> edges_t((size_t)T);
    for (int t = 0; t < T; ++t) {
        for (auto [a, b] : g.snapshot(t + 1).edges) {
            int u = remap[(size_t)a], v = remap[(size_t)b];
            edges_t[(size_t)t].emplace_back(std::min(u, v), std::max(u, v));
        }
        std::sort(edges_t[(size_t)t].begin(), edges_t[(size_t)t].end());
    }

    // Full-horizon degree table in model index space.
    DegreeTable g_deg = degree_series(g);
    data.degrees.snapshots = T;
    data.degrees.per_vertex.assign((size_t)n, std::vector<int>((size_t)T, 0));
    for (int i = 0; i < g.vertex_count(); ++i)
        data.degrees.per_vertex[(size_t)remap[(size_t)i]] = g_deg.per_vertex[(size_t)i];

    ModelInputs& in = data.inputs;
    in.n = n;
    int S = T / cfg.windows;
    for (int w = 0; w < cfg.windows; ++w) {
        WindowInputs win;
        std::vector<std::vector<std::pair<int, int>>> slice(
            edges_t.begin() + (size_t)w * S, edges_t.begin() + (size_t)(w + 1) * S);
        win.ops = SnapshotOperators::build(slice, n);
        win.degrees = Mat(n, S);
        for (int v = 0; v < n; ++v)
            for (int s = 0; s < S; ++s)
                win.degrees(v, s) = (double)data.degrees.per_vertex[(size_t)v][(size_t)(w * S + s)];
        std::vector<std::set<int>> adj((size_t)n);
        for (const auto& es : slice)
            for (auto [u, v] : es) {
                adj[(size_t)u].insert(v);
                adj[(size_t)v].insert(u);
            }
        win.union_adj.assign((size_t)n, {});
        for (int v = 0; v < n; ++v)
            win.union_adj[(size_t)v].assign(adj[(size_t)v].begin(), adj[(size_t)v].end());
        in.windows.push_back(std::move(win));
    }

    in.labels = label_vertices(data.degrees, cfg.labeler);
    data.group_stats = group_statistics(in.labels, data.degrees);

    // Whole-horizon union adjacency for negatives/positives bookkeeping.
    std::vector<std::set<int>> adj_all((size_t)n);
    for (const auto& es : edges_t)
        for (auto [u, v] : es) {
            adj_all[(size_t)u].insert(v);
            adj_all[(size_t)v].insert(u);
        }
    long degree_sum = 0;
    std::vector<std::vector<int>> union_all((size_t)n);
    for (int v = 0; v < n; ++v) {
        union_all[(size_t)v].assign(adj_all[(size_t)v].begin(), adj_all[(size_t)v].end());
        degree_sum += (long)union_all[(size_t)v].size();
    }
    data.train_edges = degree_sum / 2;

    if (plugin_mode && cfg.plugin_grouping == "degree") {
        in.group_a_name = "tail";
        in.group_b_name = "head";
        for (int v = 0; v < n; ++v) {
            if ((int)union_all[(size_t)v].size() >= cfg.labeler.theta)
                in.group_b.push_back(v);
            else
                in.group_a.push_back(v);
        }
    } else {
        in.group_a_name = "T2H";
        in.group_b_name = "SfH";
        for (int v = 0; v < n; ++v) {
            if (in.labels[(size_t)v] == EvolutionLabel::T2H) in.group_a.push_back(v);
            else if (in.labels[(size_t)v] == EvolutionLabel::SfH) in.group_b.push_back(v);
        }
    }
    in.in_group_a.assign((size_t)n, 0);
    in.in_group_b.assign((size_t)n, 0);
    for (int v : in.group_a) in.in_group_a[(size_t)v] = 1;
    for (int v : in.group_b) in.in_group_b[(size_t)v] = 1;

    data.item_protected.assign((size_t)n, 0);
    for (int v = 0; v < n; ++v) {
        if (ids[(size_t)v].rfind("i:", 0) == 0) {
            data.item_indices.push_back(v);
            if (in.labels[(size_t)v] == EvolutionLabel::T2H)
                data.item_protected[(size_t)v] = 1;
        }
    }
    if (data.item_indices.empty()) throw Error("log contains no items");

    data.train_pos_items.assign((size_t)n, {});
    for (int v = 0; v < n; ++v)
        for (int u : union_all[(size_t)v])
            if (ids[(size_t)u].rfind("i:", 0) == 0)
                data.train_pos_items[(size_t)v].push_back(u);

    for (const auto& [user, item] : held) {
        int u = model_index(user_vertex(user));
        int i = model_index(item_vertex(item));
        data.test_pairs.emplace_back(u, i);
    }
    // Leakage guard: the held-out edge must not survive as a training positive.
    for (auto [u, i] : data.test_pairs)
        if (std::binary_search(data.train_pos_items[(size_t)u].begin(),
                               data.train_pos_items[(size_t)u].end(), i))
            throw Error("hold-out leakage: test item appears among training positives");

    return data;
}

EvalOutputs evaluate_embeddings(const Mat& emb, const Dataset& data,
                                const ExperimentConfig& cfg, bool global_ranking) {
    if (data.test_pairs.empty())
        throw Error("evaluation needs at least one held-out interaction");
    if (emb.rows != data.inputs.n)
        throw Error("embedding row count does not match the vertex universe");

    int n_items = (int)data.item_indices.size();
    int max_depth = 20;
    for (int k : cfg.eval_depths) max_depth = std::max(max_depth, k);
    for (int k : cfg.fairness_depths) max_depth = std::max(max_depth, k);

    Mat items(n_items, emb.cols);
    for (int j = 0; j < n_items; ++j) {
        const double* src = &emb.d[(size_t)data.item_indices[(size_t)j] * emb.cols];
        std::copy(src, src + emb.cols, &items.d[(size_t)j * emb.cols]);
    }
    long protected_total = 0;
    for (int idx : data.item_indices) protected_total += data.item_protected[(size_t)idx];

    long n_users = (long)data.test_pairs.size();
    std::vector<RankedList> lists((size_t)n_users);
    std::vector<double> rhr_u((size_t)n_users, 0.0), rnd_u((size_t)n_users, 0.0);
    std::vector<std::vector<int>> dropped((size_t)n_users);

#pragma omp parallel for schedule(static)
    for (long ui = 0; ui < n_users; ++ui) {
        auto [u, test_item] = data.test_pairs[(size_t)ui];
        const std::vector<int>& train_pos = data.train_pos_items[(size_t)u];
        std::vector<double> dist;
        kernels::sqdist_to_rows(&emb.d[(size_t)u * emb.cols], items, dist);

        std::vector<std::pair<double, int>> cand;
        cand.reserve((size_t)n_items);
        long prot_excluded = 0;
        for (int j = 0; j < n_items; ++j) {
            int idx = data.item_indices[(size_t)j];
            if (std::binary_search(train_pos.begin(), train_pos.end(), idx)) {
                prot_excluded += data.item_protected[(size_t)idx];
                continue;
            }
            cand.emplace_back(dist[(size_t)j], idx);
        }
        long universe = (long)cand.size();
        int L = (int)std::min<long>(universe, max_depth);
        std::partial_sort(cand.begin(), cand.begin() + L, cand.end());

        RankedList rl;
        rl.ranking.reserve((size_t)L);
        for (int l = 0; l < L; ++l) rl.ranking.push_back(cand[(size_t)l].second);
        rl.positives = {test_item};

        FairnessContext ctx;
        ctx.protected_flags = &data.item_protected;
        ctx.universe = universe;
        ctx.protected_count = protected_total - prot_excluded;
        ctx.cutoffs = truncate_cutoffs(cfg.fairness_depths, universe);
        for (int k : cfg.fairness_depths)
            if (k > universe) dropped[(size_t)ui].push_back(k);
        rhr_u[(size_t)ui] = rhr(rl.ranking, ctx);
        rnd_u[(size_t)ui] = rnd(rl.ranking, ctx);
        lists[(size_t)ui] = std::move(rl);
    }

    EvalOutputs out;
    out.users = n_users;
    for (int k : cfg.eval_depths) {
        out.hr[k] = hit_rate_at(lists, k);
        out.ndcg[k] = ndcg_at(lists, k);
        out.prec[k] = precision_at(lists, k);
    }
    double racc = 0.0, nacc = 0.0;
    for (long ui = 0; ui < n_users; ++ui) {
        racc += rhr_u[(size_t)ui];
        nacc += rnd_u[(size_t)ui];
    }
    out.rhr = racc / (double)n_users;
    out.rnd = nacc / (double)n_users;

    std::vector<RankedList> la, lb;
    for (long ui = 0; ui < n_users; ++ui) {
        int item = data.test_pairs[(size_t)ui].second;
        EvolutionLabel l = data.inputs.labels[(size_t)item];
        if (l == EvolutionLabel::T2H) la.push_back(lists[(size_t)ui]);
        else if (l == EvolutionLabel::SfH) lb.push_back(lists[(size_t)ui]);
    }
    if (!la.empty()) out.hr20_group_a = hit_rate_at(la, 20);
    if (!lb.empty()) out.hr20_group_b = hit_rate_at(lb, 20);

    std::set<int> drop_union;
    for (const auto& d : dropped) drop_union.insert(d.begin(), d.end());

    if (global_ranking) {
        // One catalog-wide ranking: items ordered by total distance to the
        // test users. Parallel over items keeps the sums deterministic.
        std::vector<std::pair<double, int>> scored((size_t)n_items);
#pragma omp parallel for schedule(static)
        for (long j = 0; j < (long)n_items; ++j) {
            const double* iv = &items.d[(size_t)j * items.cols];
            double s = 0.0;
            for (const auto& [u, item] : data.test_pairs) {
                const double* uv = &emb.d[(size_t)u * emb.cols];
                double acc = 0.0;
                for (int c = 0; c < emb.cols; ++c) {
                    double diff = uv[c] - iv[c];
                    acc += diff * diff;
                }
                s += acc;
            }
            scored[(size_t)j] = {s, data.item_indices[(size_t)j]};
        }
        std::sort(scored.begin(), scored.end());
        std::vector<int> ranking;
        ranking.reserve((size_t)n_items);
        for (auto& [s, idx] : scored) ranking.push_back(idx);
        FairnessContext ctx;
        ctx.protected_flags = &data.item_protected;
        ctx.universe = n_items;
        ctx.protected_count = protected_total;
        ctx.cutoffs = truncate_cutoffs(cfg.fairness_depths, n_items);
        out.rhr = rhr(ranking, ctx);
        out.rnd = rnd(ranking, ctx);
        for (int k : cfg.fairness_depths)
            if (k > n_items) drop_union.insert(k);
    }

    out.dropped_cutoffs.assign(drop_union.begin(), drop_union.end());
    return out;
}

Trainer::Trainer(const ExperimentConfig& cfg, unsigned long seed, bool plugin_mode,
                 const std::vector<InteractionRecord>* records_override)
    : cfg_(cfg), seed_(seed), plugin_(plugin_mode) {
    data_ = prepare_dataset(cfg_, seed_, plugin_, records_override);
    std::mt19937_64 init_rng(seed_ ^ kInitSalt);
    model_ = std::make_unique<EmbeddingModel>(cfg_, data_.inputs.n, plugin_, ps_, init_rng);
    sample_rng_.seed(seed_ ^ kSampleSalt);
    std::mt19937_64 monitor_rng(seed_ ^ kMonitorSalt);
    for (int w = 0; w < (int)data_.inputs.windows.size(); ++w)
        monitor_.push_back(
            sample_window_batch(data_.inputs, w, cfg_, plugin_, monitor_rng));
    if (cfg_.weights.gamma_fair > 0.0 &&
        (data_.inputs.group_a.empty() || data_.inputs.group_b.empty()))
        log_warn("fairness group '" +
                 (data_.inputs.group_a.empty() ? data_.inputs.group_a_name
                                               : data_.inputs.group_b_name) +
                 "' is empty; the fairness term contributes zero");
}

Trainer::Trainer(const Checkpoint& ck)
    : Trainer(config_from_echo(ck.config), ck.seed, ck.plugin_mode) {
    restore(ck);
}

bool Trainer::finished() const {
    return converged_ != 0 || epochs_run() >= cfg_.epochs;
}

void Trainer::run_epoch() {
    auto t0 = std::chrono::steady_clock::now();
    int W = (int)data_.inputs.windows.size();
    EpochRecord rec;
    for (int w = 0; w < W; ++w) {
        WindowBatch batch =
            sample_window_batch(data_.inputs, w, cfg_, plugin_, sample_rng_);
        ad::Tape t;
        nn::BoundParams bp = nn::bind(t, ps_);
        EmbeddingModel::Forward f = model_->forward_window(t, data_.inputs, w, bp);
        LossNodes train = batch_loss(t, *model_, f, data_.inputs, batch, cfg_, bp);
        LossNodes probe = batch_loss(t, *model_, f, data_.inputs, monitor_[(size_t)w],
                                     cfg_, bp);
        rec.total += t.scalar(train.total) / W;
        rec.ds += t.scalar(train.ds) / W;
        rec.cls += t.scalar(train.cls) / W;
        rec.contrast += t.scalar(train.contrast) / W;
        rec.fair += t.scalar(train.fair) / W;
        rec.monitor += t.scalar(probe.total) / W;
        t.backward(train.total);
        std::vector<Mat> grads = nn::collect_grads(t, bp);
        nn::AdamConfig ac;
        ac.lr = cfg_.lr;
        nn::adam_step(ps_, grads, ac);
    }
    trace_.push_back(rec);

    int p = cfg_.early_stop_patience;
    if (converged_ == 0 && (int)trace_.size() >= p + 1) {
        bool settled = true;
        for (size_t j = trace_.size() - (size_t)p; j < trace_.size(); ++j)
            if (std::abs(trace_[j].monitor - trace_[j - 1].monitor) >=
                cfg_.early_stop_tol) {
                settled = false;
                break;
            }
        if (settled) converged_ = (int)trace_.size();
    }
    std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    epoch_seconds_.push_back(dt.count());
}

Mat Trainer::embeddings() const {
    return model_->mean_embeddings(data_.inputs, ps_);
}

EvalOutputs Trainer::evaluate(bool global_ranking) const {
    return evaluate_embeddings(embeddings(), data_, cfg_, global_ranking);
}

Checkpoint Trainer::make_checkpoint() const {
    Checkpoint ck;
    ck.config = config_echo(cfg_);
    ck.seed = seed_;
    ck.epochs_done = epochs_run();
    ck.converged_epoch = converged_;
    ck.plugin_mode = plugin_;
    std::ostringstream os;
    os << sample_rng_;
    ck.rng_state = os.str();
    ck.trace = trace_;
    ck.params = ps_;
    return ck;
}

void Trainer::restore(const Checkpoint& ck) {
    if (ck.config != config_echo(cfg_))
        throw Error("checkpoint does not match the current configuration");
    if (ck.seed != seed_ || ck.plugin_mode != plugin_)
        throw Error("checkpoint seed or mode does not match the trainer");
    if (ck.params.names != ps_.names)
        throw Error("checkpoint parameter set does not match the model");
    for (size_t i = 0; i < ps_.names.size(); ++i) {
        if (!ps_.values[i].same_shape(ck.params.values[i]))
            throw Error("checkpoint parameter shapes do not match the model");
    }
    ps_ = ck.params;
    std::istringstream is(ck.rng_state);
    is >> sample_rng_;
    if (!is) throw Error("checkpoint rng state is corrupt");
    trace_ = ck.trace;
    converged_ = ck.converged_epoch;
    if ((int)trace_.size() != ck.epochs_done)
        throw Error("checkpoint trace length disagrees with its epoch counter");
}

double Trainer::mean_epoch_seconds() const {
    if (epoch_seconds_.empty()) return 0.0;
    double s = 0.0;
    for (double v : epoch_seconds_) s += v;
    return s / (double)epoch_seconds_.size();
}

namespace {

SeedRun finish_run(Trainer& tr, unsigned long seed) {
    SeedRun run;
    run.seed = seed;
    run.trace = tr.trace();
    run.eval = tr.evaluate();
    run.converged_epoch = tr.converged_epoch();
    run.mean_epoch_seconds = tr.mean_epoch_seconds();
    run.param_scalars = tr.param_scalars();
    return run;
}

void drive_epochs(Trainer& tr, const ExperimentConfig& cfg) {
    try {
        while (!tr.finished()) tr.run_epoch();
    } catch (const Error& e) {
        std::string path = cfg.checkpoint_path.empty()
                               ? std::string("abort.ckpt")
                               : cfg.checkpoint_path + ".abort";
        save_checkpoint(tr.make_checkpoint(), path);
        throw Error(std::string(e.what()) + "; last finite state saved to " + path);
    }
}

}  // namespace

RunReport run_training(const ExperimentConfig& cfg, bool plugin_mode) {
    validate_config(cfg);
    RunReport rep;
    rep.cfg = cfg;
    rep.plugin_mode = plugin_mode;
    for (size_t i = 0; i < cfg.seeds.size(); ++i) {
        unsigned long seed = cfg.seeds[i];
        Trainer tr(cfg, seed, plugin_mode);
        drive_epochs(tr, cfg);
        rep.runs.push_back(finish_run(tr, seed));
        if (i == 0) rep.group_stats = tr.data().group_stats;
        if (!cfg.checkpoint_path.empty()) {
            std::string path = cfg.checkpoint_path;
            if (cfg.seeds.size() > 1) path += ".s" + std::to_string(seed);
            save_checkpoint(tr.make_checkpoint(), path);
        }
    }
    return rep;
}

namespace {

MetricStats make_stats(const std::vector<double>& vals) {
    MetricStats st;
    if (vals.empty()) {
        st.mean = -1.0;
        return st;
    }
    for (double v : vals) st.mean += v;
    st.mean /= (double)vals.size();
    double acc = 0.0;
    for (double v : vals) acc += (v - st.mean) * (v - st.mean);
    st.stddev = std::sqrt(acc / (double)vals.size());
    return st;
}

}  // namespace

AggregateEval aggregate_evals(const std::vector<SeedRun>& runs) {
    if (runs.empty()) throw Error("cannot aggregate zero runs");
    AggregateEval agg;
    std::set<int> depths;
    for (const auto& [k, v] : runs[0].eval.hr) depths.insert(k);
    for (int k : depths) {
        std::vector<double> h, n, p;
        for (const SeedRun& r : runs) {
            h.push_back(r.eval.hr.at(k));
            n.push_back(r.eval.ndcg.at(k));
            p.push_back(r.eval.prec.at(k));
        }
        agg.hr[k] = make_stats(h);
        agg.ndcg[k] = make_stats(n);
        agg.prec[k] = make_stats(p);
    }
    std::vector<double> rh, rn, ga, gb;
    std::set<int> drop;
    for (const SeedRun& r : runs) {
        rh.push_back(r.eval.rhr);
        rn.push_back(r.eval.rnd);
        if (r.eval.hr20_group_a >= 0.0) ga.push_back(r.eval.hr20_group_a);
        if (r.eval.hr20_group_b >= 0.0) gb.push_back(r.eval.hr20_group_b);
        drop.insert(r.eval.dropped_cutoffs.begin(), r.eval.dropped_cutoffs.end());
    }
    agg.rhr = make_stats(rh);
    agg.rnd = make_stats(rn);
    agg.hr20_group_a = make_stats(ga);
    agg.hr20_group_b = make_stats(gb);
    agg.dropped_cutoffs.assign(drop.begin(), drop.end());
    return agg;
}

namespace {

AblationRow make_row(const std::string& name, const AggregateEval& full,
                     const AggregateEval& variant) {
    AblationRow row;
    row.variant = name;
    row.agg = variant;
    double dec = 0.0;
    long dec_n = 0;
    auto add_dec = [&](const std::map<int, MetricStats>& f,
                       const std::map<int, MetricStats>& v) {
        for (const auto& [k, fs] : f) {
            auto it = v.find(k);
            if (it == v.end() || fs.mean <= 0.0) continue;
            dec += (fs.mean - it->second.mean) / fs.mean * 100.0;
            ++dec_n;
        }
    };
    add_dec(full.hr, variant.hr);
    add_dec(full.ndcg, variant.ndcg);
    add_dec(full.prec, variant.prec);
    row.dec_pct = dec_n > 0 ? dec / (double)dec_n : 0.0;

    double inc = 0.0;
    long inc_n = 0;
    if (full.rhr.mean > 0.0) {
        inc += (variant.rhr.mean - full.rhr.mean) / full.rhr.mean * 100.0;
        ++inc_n;
    }
    if (full.rnd.mean > 0.0) {
        inc += (variant.rnd.mean - full.rnd.mean) / full.rnd.mean * 100.0;
        ++inc_n;
    }
    row.inc_pct = inc_n > 0 ? inc / (double)inc_n : 0.0;
    return row;
}

}  // namespace

std::vector<AblationRow> ablation_table(const ExperimentConfig& cfg,
                                        const std::vector<std::string>& names,
                                        std::vector<RunReport>* details) {
    for (const std::string& name : names)
        apply_ablation(cfg, name);  // validates the switch names up front
    RunReport full = run_training(cfg);
    AggregateEval full_agg = aggregate_evals(full.runs);
    std::vector<AblationRow> rows;
    AblationRow base;
    base.variant = "full";
    base.agg = full_agg;
    rows.push_back(std::move(base));
    if (details) details->push_back(full);
    for (const std::string& name : names) {
        ExperimentConfig vcfg = apply_ablation(cfg, name);
        RunReport rep = run_training(vcfg);
        rows.push_back(make_row(name, full_agg, aggregate_evals(rep.runs)));
        if (details) details->push_back(std::move(rep));
    }
    return rows;
}

AblationOutcome run_ablation(const ExperimentConfig& cfg, const std::string& name) {
    std::vector<RunReport> details;
    std::vector<AblationRow> rows = ablation_table(cfg, {name}, &details);
    AblationOutcome out;
    out.row = rows[1];
    out.full = std::move(details[0]);
    out.variant = std::move(details[1]);
    return out;
}

PluginReport run_fairness_plugin(const ExperimentConfig& cfg) {
    validate_config(cfg);
    if (cfg.weights.gamma_fair <= 0.0)
        throw Error("plugin comparison needs gamma4 > 0");
    ExperimentConfig with = cfg;
    with.weights.gamma_class = 0.0;
    with.weights.gamma_contrast = 0.0;
    ExperimentConfig without = with;
    without.weights.gamma_fair = 0.0;

    PluginReport rep;
    rep.backbone = cfg.backbone;
    rep.grouping = cfg.plugin_grouping;
    rep.without_fair = run_training(without, true);
    rep.with_fair = run_training(with, true);
    return rep;
}

std::vector<ScalePoint> scalability_probe(const ExperimentConfig& cfg,
                                          const std::vector<double>& fractions,
                                          int warmup, int timed) {
    validate_config(cfg);
    if (fractions.empty()) throw Error("scalability probe needs fractions");
    for (double f : fractions)
        if (f <= 0.0 || f > 1.0)
            throw Error("scalability fractions must lie in (0, 1]");
    if (warmup < 0 || timed < 1)
        throw Error("scalability probe needs timed >= 1 and warmup >= 0");

    bool synthetic = false;
    std::vector<InteractionRecord> records = acquire_records(cfg, cfg.seed, &synthetic);
    std::mt19937_64 rng(cfg.seed ^ kScaleSalt);
    std::shuffle(records.begin(), records.end(), rng);

    ExperimentConfig run_cfg = cfg;
    run_cfg.epochs = warmup + timed;
    run_cfg.early_stop_tol = 0.0;  // never triggers; every epoch is timed

    std::vector<ScalePoint> points;
    for (double f : fractions) {
        size_t m = std::max<size_t>(1, (size_t)((double)records.size() * f));
        m = std::min(m, records.size());
        std::vector<InteractionRecord> sub(records.begin(), records.begin() + (long)m);
        Trainer tr(run_cfg, cfg.seed, false, &sub);
        while (!tr.finished()) tr.run_epoch();
        const std::vector<double>& secs = tr.epoch_seconds();
        double mean = 0.0;
        for (size_t i = (size_t)warmup; i < secs.size(); ++i) mean += secs[i];
        mean /= (double)(secs.size() - (size_t)warmup);
        ScalePoint p;
        p.fraction = f;
        p.vertices = tr.data().inputs.n;
        p.train_edges = tr.data().train_edges;
        p.param_scalars = tr.param_scalars();
        p.mean_epoch_seconds = mean;
        points.push_back(p);
    }
    return points;
}

bool trace_trends_down(const std::vector<EpochRecord>& trace) {
    if (trace.size() < 2) return true;
    size_t k = std::min<size_t>(5, trace.size() / 2);
    if (k == 0) k = 1;
    double head = 0.0, tail = 0.0;
    for (size_t i = 0; i < k; ++i) head += trace[i].total;
    for (size_t i = trace.size() - k; i < trace.size(); ++i) tail += trace[i].total;
    return tail <= head;
}

}  // namespace dgfair
