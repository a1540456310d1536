#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dgfair/debias_losses.hpp"
#include "dgfair/evolution_labeler.hpp"
#include "dgfair/fusion_head.hpp"
#include "dgfair/synthetic.hpp"

namespace dgfair {

// Everything a training run needs, with the published defaults. Values load
// from a flat key=value file and can be overridden per key afterwards (the
// CLI applies its flags on top of the file).
struct ExperimentConfig {
    std::string data_path;  // interaction log; empty means synthetic data
    SyntheticSpec synth;

    int snapshots = 6;
    int windows = 1;  // must divide snapshots; embeddings average over windows
    int dim = 64;
    int gnn_layers = 2;
    int backbone_gru_layers = 1;
    int trend_gru_layers = 3;
    bool trend_log1p = false;
    std::string backbone = "gcn_gru";

    LabelerConfig labeler;

    LossWeights weights;
    double tau = 0.5;
    int contrast_negatives = 5;
    DecoderConfig decoder;
    ClassLossMode class_loss = ClassLossMode::double_softmax;
    bool normalize_losses = true;  // per-term means instead of raw sums

    double lr = 5e-4;
    int epochs = 100;
    double early_stop_tol = 1e-4;
    int early_stop_patience = 5;

    unsigned long seed = 1;
    std::vector<unsigned long> seeds = {1, 2, 3, 4, 5};

    std::vector<int> eval_depths = {10, 15, 20};
    std::vector<int> fairness_depths = {1, 5, 10, 15, 20, 40, 60, 80, 100};

    std::string ablation;  // "", no_fair, no_class, no_contrast, no_deg, no_gru
    std::string plugin_grouping = "trend";  // or "degree"
    std::string checkpoint_path;
};

// Parses a key=value file ('#' comments, blank lines ignored) and applies it.
ExperimentConfig load_config_file(const std::string& path);
void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value);
void validate_config(const ExperimentConfig& cfg);

// Canonical serialization, also embedded in checkpoints and reports.
std::vector<std::pair<std::string, std::string>> config_echo(
    const ExperimentConfig& cfg);
std::string format_config(const ExperimentConfig& cfg);
ExperimentConfig config_from_echo(
    const std::vector<std::pair<std::string, std::string>>& echo);

ExperimentConfig apply_ablation(const ExperimentConfig& cfg,
                                const std::string& name);
const std::vector<std::string>& ablation_names();

}  // namespace dgfair
