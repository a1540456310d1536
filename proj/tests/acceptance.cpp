// End-to-end acceptance gate. Each criterion prints exactly one PASS/FAIL
// line (or SKIP when its dataset is absent) and the process exits with the
// number of failures. Tolerances and runtime budgets are pinned next to each
// check rather than configurable, so a green run means the shipped binary
// meets them on this machine.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dgfair/checkpoint.hpp"
#include "dgfair/experiment.hpp"
#include "dgfair/graph_store.hpp"
#include "dgfair/model.hpp"
#include "test_helpers.hpp"

using namespace dgfair;

namespace {

struct Outcome {
    bool pass = false;
    bool skip = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// ---------------------------------------------------------------- criterion 1
// Ranking metrics against brute-force transcriptions of their formulas,
// written with plain loops and no shared code with the library.

double hr_oracle(const std::vector<RankedList>& lists, int k) {
    double hits = 0, total = 0;
    for (const auto& l : lists) {
        if (l.positives.empty()) continue;
        total += (double)l.positives.size();
        int depth = std::min<int>(k, (int)l.ranking.size());
        for (int i = 0; i < depth; ++i)
            for (int p : l.positives)
                if (l.ranking[(size_t)i] == p) hits += 1;
    }
    return hits / total;
}

double prec_oracle(const std::vector<RankedList>& lists, int k) {
    double hits = 0, slots = 0;
    for (const auto& l : lists) {
        if (l.positives.empty()) continue;
        slots += (double)k;
        int depth = std::min<int>(k, (int)l.ranking.size());
        for (int i = 0; i < depth; ++i)
            for (int p : l.positives)
                if (l.ranking[(size_t)i] == p) hits += 1;
    }
    return hits / slots;
}

double ndcg_oracle(const std::vector<RankedList>& lists, int k) {
    double sum = 0;
    long users = 0;
    for (const auto& l : lists) {
        if (l.positives.empty()) continue;
        double gain = 0;
        for (int p : l.positives) {
            int rank = 0;
            int depth = std::min<int>(k, (int)l.ranking.size());
            for (int i = 0; i < depth; ++i)
                if (l.ranking[(size_t)i] == p) rank = i + 1;
            if (rank > 0) gain += 1.0 / std::log2((double)rank + 1.0);
        }
        sum += gain / (double)l.positives.size();
        ++users;
    }
    return sum / (double)users;
}

double bias_sum(const std::vector<long>& counts, const std::vector<int>& ks, double share,
                bool log_weight) {
    double s = 0;
    for (size_t i = 0; i < ks.size(); ++i) {
        double w = log_weight ? 1.0 / std::log2((double)ks[i]) : 1.0;
        s += w * std::fabs((double)counts[i] / (double)ks[i] - share);
    }
    return s;
}

double fairness_oracle(const std::vector<int>& ranking, const std::vector<uint8_t>& flags,
                       long universe, long protected_count, std::vector<int> ks,
                       bool log_weight) {
    std::vector<int> kept;
    for (int k : ks)
        if (k <= universe && (!log_weight || k >= 2)) kept.push_back(k);
    ks = kept;
    if (ks.empty()) return 0.0;
    double share = (double)protected_count / (double)universe;
    std::vector<long> actual, first, last;
    for (int k : ks) {
        long c = 0;
        for (int i = 0; i < k; ++i) c += flags[(size_t)ranking[(size_t)i]] ? 1 : 0;
        actual.push_back(c);
        first.push_back(std::min<long>(k, protected_count));
        last.push_back(std::max<long>(0, k - (universe - protected_count)));
    }
    double z = std::max(bias_sum(first, ks, share, log_weight),
                        bias_sum(last, ks, share, log_weight));
    if (z == 0.0) return 0.0;
    return bias_sum(actual, ks, share, log_weight) / z;
}

Outcome criterion_metrics() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(4242);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        int n_items = 5 + (int)(rng() % 116);
        int users = 1 + (int)(rng() % 12);
        std::vector<RankedList> lists;
        for (int u = 0; u < users; ++u) {
            RankedList l;
            l.ranking.resize((size_t)n_items);
            std::iota(l.ranking.begin(), l.ranking.end(), 0);
            std::shuffle(l.ranking.begin(), l.ranking.end(), rng);
            int n_pos = 1 + (int)(rng() % 3);
            std::set<int> pos;
            while ((int)pos.size() < n_pos) pos.insert((int)(rng() % (unsigned)n_items));
            l.positives.assign(pos.begin(), pos.end());
            lists.push_back(std::move(l));
        }
        int k = 1 + (int)(rng() % (unsigned)n_items);
        worst = std::max(worst, std::fabs(hit_rate_at(lists, k) - hr_oracle(lists, k)));
        worst = std::max(worst, std::fabs(precision_at(lists, k) - prec_oracle(lists, k)));
        worst = std::max(worst, std::fabs(ndcg_at(lists, k) - ndcg_oracle(lists, k)));

        long protected_count = 1 + (long)(rng() % (unsigned)(n_items - 1));
        std::vector<uint8_t> flags((size_t)n_items, 0);
        std::vector<int> ids((size_t)n_items);
        std::iota(ids.begin(), ids.end(), 0);
        std::shuffle(ids.begin(), ids.end(), rng);
        for (long i = 0; i < protected_count; ++i) flags[(size_t)ids[(size_t)i]] = 1;
        FairnessContext ctx;
        ctx.protected_flags = &flags;
        ctx.universe = n_items;
        ctx.protected_count = protected_count;
        ctx.cutoffs = {1, 5, 10, 15, 20, 40, 60, 80, 100};
        const auto& ranking = lists[0].ranking;
        worst = std::max(worst, std::fabs(rhr(ranking, ctx) -
                                          fairness_oracle(ranking, flags, n_items,
                                                          protected_count, ctx.cutoffs, false)));
        worst = std::max(worst, std::fabs(rnd(ranking, ctx) -
                                          fairness_oracle(ranking, flags, n_items,
                                                          protected_count, ctx.cutoffs, true)));
    }
    double dt = seconds_since(t0);
    Outcome out;
    out.pass = worst < 1e-9 && dt < 5.0;
    out.detail = "200 instances, max |diff| " + fmt("%.2e", worst) + ", " + fmt("%.1f", dt) + "s";
    return out;
}

// ---------------------------------------------------------------- criterion 2
// Slope labeler against a transcription of its published annotation rule.

std::vector<EvolutionLabel> slope_oracle(const std::vector<std::vector<int>>& series,
                                         double head_ratio, int rho) {
    int n = (int)series.size();
    std::vector<EvolutionLabel> out(series.size(), EvolutionLabel::FaT);
    if (n == 0) return out;
    int head_num = (int)std::ceil((double)n * head_ratio);
    std::vector<int> order(series.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<long> total(series.size(), 0);
    for (int v = 0; v < n; ++v)
        for (int d : series[(size_t)v]) total[(size_t)v] += d;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return total[(size_t)a] > total[(size_t)b]; });
    std::set<int> head(order.begin(), order.begin() + std::min(head_num, n));
    for (int v = 0; v < n; ++v) {
        if (head.count(v)) {
            out[(size_t)v] = EvolutionLabel::SfH;
            continue;
        }
        const auto& s = series[(size_t)v];
        int arg_max = 0, arg_min = 0;
        for (int t = 1; t < (int)s.size(); ++t) {
            if (s[(size_t)t] > s[(size_t)arg_max]) arg_max = t;
            if (s[(size_t)t] < s[(size_t)arg_min]) arg_min = t;
        }
        out[(size_t)v] = (arg_max - arg_min > rho) ? EvolutionLabel::T2H : EvolutionLabel::FaT;
    }
    return out;
}

Outcome criterion_labeler() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2024);
    long mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        int n = 1 + (int)(rng() % 200);
        int T = 1 + (int)(rng() % 10);
        std::vector<std::vector<int>> series((size_t)n, std::vector<int>((size_t)T, 0));
        for (auto& row : series)
            for (auto& x : row) x = (int)(rng() % 13);
        LabelerConfig cfg;
        cfg.mode = LabelerMode::slope;
        cfg.head_ratio = 0.05 + 0.9 * (double)(rng() % 1000) / 1000.0;
        cfg.rho = (int)(rng() % 4);
        DegreeTable table;
        table.per_vertex = series;
        table.snapshots = T;
        auto got = label_slope(table, cfg);
        auto want = slope_oracle(series, cfg.head_ratio, cfg.rho);
        for (size_t v = 0; v < got.size(); ++v)
            if (got[v] != want[v]) ++mismatches;
    }
    double dt = seconds_since(t0);
    Outcome out;
    out.pass = mismatches == 0 && dt < 5.0;
    out.detail = "1000 sets, " + std::to_string(mismatches) + " mismatches, " +
                 fmt("%.1f", dt) + "s";
    return out;
}

// ---------------------------------------------------------------- criterion 3
// Analytic gradients of the full joint objective against central finite
// differences on a 6-vertex, 2-snapshot, dim-3 instance with every loss
// component active.

Outcome criterion_gradients() {
    auto t0 = std::chrono::steady_clock::now();
    // Two users and four items whose training degrees produce two climbing
    // vertices (one group), the two users as heads (other group), and two
    // flat-tail items, so contrast, classification and fairness terms all
    // contribute.
    std::vector<InteractionRecord> recs = {{"0", "0", 0}, {"0", "1", 0}, {"0", "2", 8},
                                           {"0", "3", 9}, {"1", "1", 0}, {"1", "0", 1},
                                           {"1", "3", 8}, {"1", "2", 9}};
    ExperimentConfig cfg;
    cfg.snapshots = 2;
    cfg.dim = 3;
    cfg.gnn_layers = 1;
    cfg.backbone_gru_layers = 1;
    cfg.trend_gru_layers = 1;
    cfg.contrast_negatives = 1;
    cfg.seeds = {1};

    Dataset data = prepare_dataset(cfg, 1, false, &recs);
    if (data.inputs.n != 6 || data.inputs.group_a.size() != 2 || data.inputs.group_b.size() != 2)
        return {false, false, "instance construction drifted"};

    nn::ParamStore ps;
    std::mt19937_64 init(7);
    EmbeddingModel model(cfg, data.inputs.n, false, ps, init);
    std::mt19937_64 srng(11);
    WindowBatch batch = sample_window_batch(data.inputs, 0, cfg, false, srng);

    testutil::FdOutcome fd = testutil::finite_diff_check(
        ps, [&](ad::Tape& t, const nn::BoundParams& bp) {
            EmbeddingModel::Forward f = model.forward_window(t, data.inputs, 0, bp);
            return batch_loss(t, model, f, data.inputs, batch, cfg, bp).total;
        },
        1e-5, 1e-4, 1e-8);

    double dt = seconds_since(t0);
    Outcome out;
    out.pass = fd.failed == 0 && fd.checked > 0 && dt < 30.0;
    out.detail = std::to_string(fd.checked) + " scalars, " + std::to_string(fd.failed) +
                 " beyond rel 1e-4" +
                 (fd.failed ? " (worst " + fd.worst + " rel " + fmt("%.2e", fd.max_rel) + ")"
                            : "") +
                 ", " + fmt("%.1f", dt) + "s";
    return out;
}

// ---------------------------------------------------------------- criterion 4
// Closed-form loss values, all within 1e-12.

Outcome criterion_closed_forms() {
    double worst = 0.0;
    auto track = [&worst](double got, double want) {
        worst = std::max(worst, std::fabs(got - want));
    };

    // Anchor orthogonal to both its positive and its single negative: the
    // positive and negative scores tie, so the softmax halves exactly.
    Mat emb(3, 2);
    emb(0, 0) = 1.0;
    emb(1, 1) = 1.0;
    emb(2, 1) = 1.0;
    std::vector<ContrastBatch> pair = {{0, 1, {2}}};
    for (double tau : {0.5, 0.07, 1.0})
        track(contrastive_loss_value(emb, pair, tau), std::log(2.0));

    track(fairness_gap_value(0.41, 0.41), 0.0);
    track(fairness_gap_value(0.5, 0.2), 0.3);

    // Squared distance equal to the radius puts the decoder at its midpoint
    // for any temperature.
    DecoderConfig dec;
    dec.radius = 4.0;
    for (double temp : {1.0, 3.0}) {
        dec.temperature = temp;
        track(link_probability({2.0, 0.0}, {0.0, 0.0}, dec), 0.5);
    }

    Outcome out;
    out.pass = worst < 1e-12;
    out.detail = "max |diff| " + fmt("%.2e", worst);
    return out;
}

// ---------------------------------------------------------------- criterion 5
// Fairness direction on the default 5000-vertex synthetic population,
// averaged over 5 seeds: adding the fairness term must not worsen rND and
// must shrink the depth-20 hit-rate gap between the climbing and head
// groups. Model size is trimmed (dim 32, single trend layer, fixed 12-epoch
// budget) so ten full runs fit the 15-minute budget on one core.

Outcome criterion_fairness_direction() {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.dim = 32;
    cfg.trend_gru_layers = 1;
    cfg.epochs = 12;
    cfg.early_stop_tol = 0.0;  // identical epoch budget in both arms
    cfg.seeds = {1, 2, 3, 4, 5};

    RunReport with_fair = run_training(cfg);
    RunReport no_fair = run_training(apply_ablation(cfg, "no_fair"));
    AggregateEval aw = aggregate_evals(with_fair.runs);
    AggregateEval ao = aggregate_evals(no_fair.runs);

    bool groups_present = aw.hr20_group_a.mean >= 0.0 && aw.hr20_group_b.mean >= 0.0 &&
                          ao.hr20_group_a.mean >= 0.0 && ao.hr20_group_b.mean >= 0.0;
    double gap_with = std::fabs(aw.hr20_group_a.mean - aw.hr20_group_b.mean);
    double gap_without = std::fabs(ao.hr20_group_a.mean - ao.hr20_group_b.mean);
    double dt = seconds_since(t0);

    Outcome out;
    out.pass = groups_present && aw.rnd.mean <= ao.rnd.mean && gap_with <= gap_without &&
               dt < 900.0;
    out.detail = "rnd " + fmt("%.4f", aw.rnd.mean) + " <= " + fmt("%.4f", ao.rnd.mean) +
                 ", hr20 gap " + fmt("%.4f", gap_with) + " <= " + fmt("%.4f", gap_without) +
                 ", " + fmt("%.0f", dt) + "s";
    return out;
}

// ---------------------------------------------------------------- criterion 6
// Ablation ordering, seed-averaged on synthetic data: the full model beats
// the no-contrast and static-backbone variants on hr@20, and the static
// backbone is the worst of the three.

Outcome criterion_ablation_order() {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.synth.vertices = 1500;
    cfg.dim = 16;
    cfg.trend_gru_layers = 1;
    cfg.epochs = 15;
    cfg.early_stop_tol = 0.0;
    cfg.seeds = {1, 2, 3};

    std::vector<AblationRow> rows = ablation_table(cfg, {"no_contrast", "no_gru"});
    double full = rows[0].agg.hr.at(20).mean;
    double no_contrast = rows[1].agg.hr.at(20).mean;
    double no_gru = rows[2].agg.hr.at(20).mean;
    double dt = seconds_since(t0);

    Outcome out;
    out.pass = full > no_contrast && full > no_gru && no_gru < no_contrast && dt < 2700.0;
    out.detail = "hr@20 full " + fmt("%.4f", full) + ", no_contrast " + fmt("%.4f", no_contrast) +
                 ", no_gru " + fmt("%.4f", no_gru) + ", " + fmt("%.0f", dt) + "s";
    return out;
}

// ---------------------------------------------------------------- criterion 7
// Default training converges: the fixed-probe loss delta stays below the
// early-stop tolerance for the patience span within the 100-epoch budget.

Outcome criterion_convergence() {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;  // stock settings: tol 1e-4, patience 5, 100 epochs
    Trainer tr(cfg, 1);
    while (!tr.finished()) tr.run_epoch();
    double dt = seconds_since(t0);

    Outcome out;
    out.pass = tr.converged_epoch() != 0 && tr.converged_epoch() <= 100 &&
               trace_trends_down(tr.trace());
    out.detail = tr.converged_epoch() != 0
                     ? "converged at epoch " + std::to_string(tr.converged_epoch()) + ", " +
                           fmt("%.0f", dt) + "s"
                     : "no convergence within " + std::to_string(tr.epochs_run()) + " epochs";
    return out;
}

// ---------------------------------------------------------------- criterion 8
// Near-linear scaling: the mean epoch time on the full record set is at most
// 7x the time on a 20% subsample.

Outcome criterion_scalability() {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    std::vector<ScalePoint> pts = scalability_probe(cfg, {0.2, 1.0}, 1, 2);
    double ratio = pts[1].mean_epoch_seconds / pts[0].mean_epoch_seconds;
    double dt = seconds_since(t0);

    Outcome out;
    out.pass = pts.size() == 2 && ratio <= 7.0;
    out.detail = "epoch " + fmt("%.2f", pts[1].mean_epoch_seconds) + "s vs " +
                 fmt("%.2f", pts[0].mean_epoch_seconds) + "s, ratio " + fmt("%.2f", ratio) +
                 ", " + fmt("%.0f", dt) + "s";
    return out;
}

// ---------------------------------------------------------------- criterion 9
// Bitwise determinism under a fixed seed, and bit-exact continuation from a
// checkpoint written mid-run.

bool traces_equal(const std::vector<EpochRecord>& a, const std::vector<EpochRecord>& b) {
    auto same = [](const double& x, const double& y) {
        return std::memcmp(&x, &y, sizeof(double)) == 0;
    };
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!same(a[i].total, b[i].total) || !same(a[i].ds, b[i].ds) ||
            !same(a[i].cls, b[i].cls) || !same(a[i].contrast, b[i].contrast) ||
            !same(a[i].fair, b[i].fair) || !same(a[i].monitor, b[i].monitor))
            return false;
    return true;
}

Outcome criterion_determinism() {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.synth.vertices = 400;
    cfg.dim = 8;
    cfg.trend_gru_layers = 1;
    cfg.epochs = 4;
    cfg.early_stop_tol = 0.0;
    cfg.seeds = {1};

    Trainer a(cfg, 1), b(cfg, 1);
    while (!a.finished()) a.run_epoch();
    while (!b.finished()) b.run_epoch();
    bool replay_ok = traces_equal(a.trace(), b.trace());

    Trainer c(cfg, 1);
    c.run_epoch();
    c.run_epoch();
    std::string path = "acceptance_resume.ckpt";
    save_checkpoint(c.make_checkpoint(), path);
    Trainer d(load_checkpoint(path));
    std::remove(path.c_str());
    while (!c.finished()) c.run_epoch();
    while (!d.finished()) d.run_epoch();
    bool resume_ok = traces_equal(c.trace(), a.trace()) && traces_equal(d.trace(), a.trace());

    bool params_ok = true;
    for (size_t i = 0; i < a.params().values.size(); ++i)
        if (a.params().values[i].d != b.params().values[i].d) params_ok = false;

    double dt = seconds_since(t0);
    Outcome out;
    out.pass = replay_ok && resume_ok && params_ok;
    out.detail = std::string(replay_ok ? "replay bitwise" : "replay DIVERGED") + ", " +
                 (resume_ok ? "resume bitwise" : "resume DIVERGED") + ", " + fmt("%.0f", dt) +
                 "s";
    return out;
}

// --------------------------------------------------------------- criterion 10
// Group shares on the books interaction slice, when supplied via
// DGFAIR_AMAZON_BOOKS: at 2 snapshots and head threshold 10 the four raw
// trend classes must hit the documented percentages exactly at two decimals.

Outcome criterion_catalog_slice() {
    const char* path = std::getenv("DGFAIR_AMAZON_BOOKS");
    if (path == nullptr || *path == '\0')
        return {true, true, "set DGFAIR_AMAZON_BOOKS=<log.tsv> to enable"};

    auto t0 = std::chrono::steady_clock::now();
    std::vector<InteractionRecord> records = ingest_log(path);
    DynamicGraph g = build_snapshots(records, 2);
    DegreeTable table = degree_series(g);
    std::vector<RawTrend> trends = raw_trends(table, 10);

    long counts[4] = {0, 0, 0, 0};
    for (RawTrend t : trends) counts[(int)t] += 1;
    long total = (long)trends.size();

    const char* want[4] = {"90.67", "7.02", "1.45", "0.86"};  // FaT, T2H, H2T, FaH
    std::string got[4];
    bool all_ok = true;
    for (int i = 0; i < 4; ++i) {
        got[i] = fmt("%.2f", 100.0 * (double)counts[i] / (double)total);
        if (got[i] != want[i]) all_ok = false;
    }
    double dt = seconds_since(t0);

    Outcome out;
    out.pass = all_ok;
    out.detail = "FaT " + got[0] + " T2H " + got[1] + " H2T " + got[2] + " FaH " + got[3] +
                 " (want " + want[0] + "/" + want[1] + "/" + want[2] + "/" + want[3] + "), " +
                 fmt("%.0f", dt) + "s";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"ranking metrics match brute-force transcriptions", criterion_metrics},
        {"slope labeler matches its annotation-rule transcription", criterion_labeler},
        {"joint-loss gradients match central finite differences", criterion_gradients},
        {"closed-form loss points are exact", criterion_closed_forms},
        {"fairness term improves rnd and shrinks the group hit-rate gap", criterion_fairness_direction},
        {"ablation ordering: full > no_contrast > no_gru on hr@20", criterion_ablation_order},
        {"default training converges within 100 epochs", criterion_convergence},
        {"full-data epoch time within 7x of the 20% subsample", criterion_scalability},
        {"seeded runs replay and resume bitwise", criterion_determinism},
        {"catalog-slice group shares reproduce exactly", criterion_catalog_slice},
    };

    // Optional criterion numbers on the command line restrict the run while
    // iterating; ctest always invokes the full set.
    std::set<size_t> only;
    for (int i = 1; i < argc; ++i) only.insert((size_t)std::atol(argv[i]));

    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        if (!only.empty() && !only.count(i + 1)) continue;
        Outcome out;
        try {
            out = criteria[i].run();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const char* verdict = out.skip ? "SKIP" : out.pass ? "PASS" : "FAIL";
        if (!out.pass && !out.skip) ++failures;
        std::printf("[%2zu] %s  %s (%s)\n", i + 1, verdict, criteria[i].name,
                    out.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("acceptance: %d of %zu criteria failed\n", failures, criteria.size());
    return failures;
}
