#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dgfair/checkpoint.hpp"
#include "dgfair/config.hpp"
#include "dgfair/eval_metrics.hpp"
#include "dgfair/model.hpp"

namespace dgfair {

// Training-ready view of one interaction log: model vertex universe (every
// vertex of the full log), per-window operators over the training records,
// evolution labels, fairness groups, and the held-out split. The held-out
// pair is each user's last interaction; every training record touching that
// exact (user, item) pair is removed so the test edge never leaks into the
// reconstruction loss.
struct Dataset {
    std::vector<std::string> vertex_ids;
    ModelInputs inputs;
    DegreeTable degrees;  // model index space, full horizon
    std::vector<int> item_indices;
    std::vector<std::uint8_t> item_protected;       // T2H items, by model index
    std::vector<std::pair<int, int>> test_pairs;    // (user, item) model indices
    std::vector<std::vector<int>> train_pos_items;  // sorted, per model vertex
    long train_edges = 0;                           // union-graph edge count
    std::map<std::string, GroupStats> group_stats;
    bool synthetic = false;
};

Dataset prepare_dataset(const ExperimentConfig& cfg, unsigned long seed,
                        bool plugin_mode = false,
                        const std::vector<InteractionRecord>* records_override = nullptr);

struct EvalOutputs {
    std::map<int, double> hr, ndcg, prec;
    double rhr = 0.0, rnd = 0.0;
    // Hit rate at depth 20 sliced by the held-out item's group; -1 when the
    // group has no test items.
    double hr20_group_a = -1.0, hr20_group_b = -1.0;
    std::vector<int> dropped_cutoffs;  // fairness depths beyond some candidate set
    long users = 0;
};

// Ranks the full item catalog minus each user's training positives by
// squared embedding distance. global_ranking switches rhr/rnd to a single
// catalog-wide ranking (items ordered by summed distance to all test users)
// instead of the per-user average.
EvalOutputs evaluate_embeddings(const Mat& emb, const Dataset& data,
                                const ExperimentConfig& cfg,
                                bool global_ranking = false);

// One optimization run. Each epoch takes one gradient step per window with
// freshly sampled contrast pairs and negative edges; convergence is measured
// on a fixed probe batch so the early-stop signal is noise-free.
class Trainer {
public:
    Trainer(const ExperimentConfig& cfg, unsigned long seed, bool plugin_mode = false,
            const std::vector<InteractionRecord>* records_override = nullptr);
    explicit Trainer(const Checkpoint& ck);

    void run_epoch();
    bool finished() const;
    int epochs_run() const { return (int)trace_.size(); }
    int converged_epoch() const { return converged_; }  // 0 = not converged

    Mat embeddings() const;
    EvalOutputs evaluate(bool global_ranking = false) const;

    Checkpoint make_checkpoint() const;
    void restore(const Checkpoint& ck);

    const std::vector<EpochRecord>& trace() const { return trace_; }
    const Dataset& data() const { return data_; }
    const ExperimentConfig& config() const { return cfg_; }
    const nn::ParamStore& params() const { return ps_; }
    long param_scalars() const { return (long)ps_.scalar_count(); }
    const std::vector<double>& epoch_seconds() const { return epoch_seconds_; }
    double mean_epoch_seconds() const;

private:
    ExperimentConfig cfg_;
    unsigned long seed_ = 0;
    bool plugin_ = false;
    Dataset data_;
    nn::ParamStore ps_;
    std::unique_ptr<EmbeddingModel> model_;
    std::mt19937_64 sample_rng_;
    std::vector<WindowBatch> monitor_;  // fixed probe batches, one per window
    std::vector<EpochRecord> trace_;
    std::vector<double> epoch_seconds_;
    int converged_ = 0;
};

struct SeedRun {
    unsigned long seed = 0;
    std::vector<EpochRecord> trace;
    EvalOutputs eval;
    int converged_epoch = 0;
    double mean_epoch_seconds = 0.0;
    long param_scalars = 0;
};

struct RunReport {
    ExperimentConfig cfg;
    bool plugin_mode = false;
    std::vector<SeedRun> runs;  // one per cfg.seeds entry
    std::map<std::string, GroupStats> group_stats;
};

// Trains every seed in cfg.seeds. On divergence the last finite state is
// checkpointed next to cfg.checkpoint_path (or ./abort.ckpt) before the
// error propagates. With cfg.checkpoint_path set, each seed's final state is
// saved (suffix ".s<seed>" when training more than one seed).
RunReport run_training(const ExperimentConfig& cfg, bool plugin_mode = false);

struct MetricStats {
    double mean = 0.0, stddev = 0.0;
};

struct AggregateEval {
    std::map<int, MetricStats> hr, ndcg, prec;
    MetricStats rhr, rnd;
    MetricStats hr20_group_a, hr20_group_b;  // mean -1 when group absent
    std::vector<int> dropped_cutoffs;
};

AggregateEval aggregate_evals(const std::vector<SeedRun>& runs);

struct AblationRow {
    std::string variant;  // "full" or a switch name
    AggregateEval agg;
    double dec_pct = 0.0;  // mean accuracy drop vs full, percent
    double inc_pct = 0.0;  // mean fairness-score rise vs full, percent
};

// Runs the full model once, then each requested variant; rows[0] is "full".
std::vector<AblationRow> ablation_table(const ExperimentConfig& cfg,
                                        const std::vector<std::string>& names,
                                        std::vector<RunReport>* details = nullptr);

struct AblationOutcome {
    AblationRow row;
    RunReport full, variant;
};

AblationOutcome run_ablation(const ExperimentConfig& cfg, const std::string& name);

struct PluginReport {
    std::string backbone;
    std::string grouping;  // "trend" or "degree"
    RunReport without_fair, with_fair;
};

// Paired runs of the named backbone alone (no trend branch, no classifier,
// no contrast) trained on the reconstruction loss, with and without the
// fairness term.
PluginReport run_fairness_plugin(const ExperimentConfig& cfg);

struct ScalePoint {
    double fraction = 0.0;
    int vertices = 0;
    long train_edges = 0;
    long param_scalars = 0;
    double mean_epoch_seconds = 0.0;
};

// Epoch wall time on random interaction subsamples; `timed` epochs are
// averaged after `warmup` untimed ones.
std::vector<ScalePoint> scalability_probe(const ExperimentConfig& cfg,
                                          const std::vector<double>& fractions,
                                          int warmup = 2, int timed = 3);

// Loose descent check: the mean of the last few epochs does not exceed the
// mean of the first few. Deliberately not strict monotonicity.
bool trace_trends_down(const std::vector<EpochRecord>& trace);

}  // namespace dgfair
