#include "dgfair/config.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "dgfair/backbone.hpp"
#include "dgfair/util.hpp"

namespace dgfair {
namespace {

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw Error("config key '" + key + "': expected true/false, got '" + v + "'");
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw Error("config key '" + key + "': expected an integer, got '" + v + "'");
    }
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw Error("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    for (const std::string& part : split(v, ','))
        out.push_back(parse_int(key, part));
    if (out.empty()) throw Error("config key '" + key + "': empty list");
    return out;
}

std::vector<unsigned long> parse_seed_list(const std::string& key,
                                           const std::string& v) {
    std::vector<unsigned long> out;
    for (const std::string& part : split(v, ',')) {
        try {
            size_t pos = 0;
            out.push_back(std::stoul(part, &pos));
            if (pos != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw Error("config key '" + key + "': expected seeds, got '" + v + "'");
        }
    }
    if (out.empty()) throw Error("config key '" + key + "': empty list");
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }
std::string fmt(unsigned long v) { return std::to_string(v); }

std::string fmt(const std::vector<int>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::string fmt(const std::vector<unsigned long>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

}  // namespace

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
    if (key == "data") cfg.data_path = value;
    else if (key == "snapshots") cfg.snapshots = parse_int(key, value);
    else if (key == "windows") cfg.windows = parse_int(key, value);
    else if (key == "dim") cfg.dim = parse_int(key, value);
    else if (key == "gnn_layers") cfg.gnn_layers = parse_int(key, value);
    else if (key == "backbone_gru_layers") cfg.backbone_gru_layers = parse_int(key, value);
    else if (key == "trend_gru_layers") cfg.trend_gru_layers = parse_int(key, value);
    else if (key == "trend_log1p") cfg.trend_log1p = parse_bool(key, value);
    else if (key == "backbone") cfg.backbone = value;
    else if (key == "labeler") {
        if (value == "slope") cfg.labeler.mode = LabelerMode::slope;
        else if (value == "threshold") cfg.labeler.mode = LabelerMode::degree_threshold;
        else throw Error("config key 'labeler': expected slope or threshold");
    }
    else if (key == "head_ratio") cfg.labeler.head_ratio = parse_double(key, value);
    else if (key == "rho") cfg.labeler.rho = parse_int(key, value);
    else if (key == "theta") cfg.labeler.theta = parse_int(key, value);
    else if (key == "head_rank_key") {
        if (value == "total") cfg.labeler.head_key = HeadRankKey::total_degree;
        else if (value == "last") cfg.labeler.head_key = HeadRankKey::last_snapshot;
        else throw Error("config key 'head_rank_key': expected total or last");
    }
    else if (key == "gamma1") cfg.weights.gamma_ds = parse_double(key, value);
    else if (key == "gamma2") cfg.weights.gamma_class = parse_double(key, value);
    else if (key == "gamma3") cfg.weights.gamma_contrast = parse_double(key, value);
    else if (key == "gamma4") cfg.weights.gamma_fair = parse_double(key, value);
    else if (key == "lambda1") cfg.weights.lambda_l1 = parse_double(key, value);
    else if (key == "lambda2") cfg.weights.lambda_l2 = parse_double(key, value);
    else if (key == "tau") cfg.tau = parse_double(key, value);
    else if (key == "contrast_negatives") cfg.contrast_negatives = parse_int(key, value);
    else if (key == "decoder_radius") cfg.decoder.radius = parse_double(key, value);
    else if (key == "decoder_temperature") cfg.decoder.temperature = parse_double(key, value);
    else if (key == "class_loss") {
        if (value == "double_softmax") cfg.class_loss = ClassLossMode::double_softmax;
        else if (value == "single_softmax") cfg.class_loss = ClassLossMode::single_softmax;
        else throw Error("config key 'class_loss': expected double_softmax or single_softmax");
    }
    else if (key == "normalize_losses") cfg.normalize_losses = parse_bool(key, value);
    else if (key == "lr") cfg.lr = parse_double(key, value);
    else if (key == "epochs") cfg.epochs = parse_int(key, value);
    else if (key == "early_stop_tol") cfg.early_stop_tol = parse_double(key, value);
    else if (key == "early_stop_patience") cfg.early_stop_patience = parse_int(key, value);
    else if (key == "seed") cfg.seed = parse_seed_list(key, value)[0];
    else if (key == "seeds") cfg.seeds = parse_seed_list(key, value);
    else if (key == "eval_depths") cfg.eval_depths = parse_int_list(key, value);
    else if (key == "fairness_depths") cfg.fairness_depths = parse_int_list(key, value);
    else if (key == "ablate") cfg.ablation = value;
    else if (key == "plugin_grouping") cfg.plugin_grouping = value;
    else if (key == "checkpoint_path") cfg.checkpoint_path = value;
    else if (key == "synth_vertices") cfg.synth.vertices = parse_int(key, value);
    else if (key == "synth_ratio_fat") cfg.synth.ratio_fat = parse_double(key, value);
    else if (key == "synth_ratio_t2h") cfg.synth.ratio_t2h = parse_double(key, value);
    else if (key == "synth_ratio_sfh") cfg.synth.ratio_sfh = parse_double(key, value);
    else if (key == "synth_exponent") cfg.synth.exponent = parse_double(key, value);
    else if (key == "synth_edges_per_snapshot") cfg.synth.edges_per_snapshot = parse_int(key, value);
    else if (key == "synth_theta") cfg.synth.theta = parse_int(key, value);
    else if (key == "synth_communities") cfg.synth.communities = parse_int(key, value);
    else if (key == "synth_affinity") cfg.synth.affinity = parse_double(key, value);
    else throw Error("unknown config key '" + key + "'");
}

ExperimentConfig load_config_file(const std::string& path) {
    ExperimentConfig cfg;
    std::istringstream in(read_text_file(path));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        size_t b = line.find_last_not_of(" \t\r");
        line = line.substr(a, b - a + 1);
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(path + ":" + std::to_string(lineno) +
                        ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        size_t v0 = value.find_first_not_of(" \t");
        value = v0 == std::string::npos ? "" : value.substr(v0);
        apply_config_entry(cfg, key, value);
    }
    return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.snapshots < 1) throw Error("config: snapshots must be positive");
    if (cfg.windows < 1 || cfg.snapshots % cfg.windows != 0)
        throw Error("config: windows must be positive and divide snapshots");
    if (cfg.dim < 1) throw Error("config: dim must be positive");
    if (cfg.gnn_layers < 1) throw Error("config: gnn_layers must be positive");
    if (cfg.backbone_gru_layers < 1 || cfg.trend_gru_layers < 1)
        throw Error("config: recurrent layer counts must be positive");
    if (cfg.tau <= 0.0) throw Error("config: tau must be positive");
    if (cfg.contrast_negatives < 1)
        throw Error("config: contrast_negatives must be positive");
    if (cfg.decoder.temperature <= 0.0)
        throw Error("config: decoder_temperature must be positive");
    if (cfg.weights.gamma_ds < 0 || cfg.weights.gamma_class < 0 ||
        cfg.weights.gamma_contrast < 0 || cfg.weights.gamma_fair < 0)
        throw Error("config: loss weights must be non-negative");
    if (cfg.weights.lambda_l1 < 0 || cfg.weights.lambda_l2 < 0)
        throw Error("config: regularization strengths must be non-negative");
    if (cfg.lr <= 0.0) throw Error("config: lr must be positive");
    if (cfg.epochs < 0) throw Error("config: epochs must be non-negative");
    if (cfg.early_stop_tol < 0.0) throw Error("config: early_stop_tol must be non-negative");
    if (cfg.early_stop_patience < 1)
        throw Error("config: early_stop_patience must be positive");
    if (cfg.seeds.empty()) throw Error("config: seeds must not be empty");
    for (int k : cfg.eval_depths)
        if (k < 1) throw Error("config: eval_depths must be positive");
    for (int k : cfg.fairness_depths)
        if (k < 1) throw Error("config: fairness_depths must be positive");
    if (!cfg.ablation.empty()) {
        const auto& names = ablation_names();
        if (std::find(names.begin(), names.end(), cfg.ablation) == names.end())
            throw Error("config: unknown ablation '" + cfg.ablation + "'");
    }
    if (cfg.plugin_grouping != "trend" && cfg.plugin_grouping != "degree")
        throw Error("config: plugin_grouping must be trend or degree");
    const auto& regs = registered_backbones();
    if (std::find(regs.begin(), regs.end(), cfg.backbone) == regs.end())
        throw Error("unknown backbone: " + cfg.backbone);
    validate(cfg.labeler);
}

std::vector<std::pair<std::string, std::string>> config_echo(
    const ExperimentConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> e;
    e.emplace_back("data", cfg.data_path);
    e.emplace_back("snapshots", fmt(cfg.snapshots));
    e.emplace_back("windows", fmt(cfg.windows));
    e.emplace_back("dim", fmt(cfg.dim));
    e.emplace_back("gnn_layers", fmt(cfg.gnn_layers));
    e.emplace_back("backbone_gru_layers", fmt(cfg.backbone_gru_layers));
    e.emplace_back("trend_gru_layers", fmt(cfg.trend_gru_layers));
    e.emplace_back("trend_log1p", fmt(cfg.trend_log1p));
    e.emplace_back("backbone", cfg.backbone);
    e.emplace_back("labeler", cfg.labeler.mode == LabelerMode::slope
                                  ? "slope" : "threshold");
    e.emplace_back("head_ratio", fmt(cfg.labeler.head_ratio));
    e.emplace_back("rho", fmt(cfg.labeler.rho));
    e.emplace_back("theta", fmt(cfg.labeler.theta));
    e.emplace_back("head_rank_key",
                   cfg.labeler.head_key == HeadRankKey::total_degree ? "total" : "last");
    e.emplace_back("gamma1", fmt(cfg.weights.gamma_ds));
    e.emplace_back("gamma2", fmt(cfg.weights.gamma_class));
    e.emplace_back("gamma3", fmt(cfg.weights.gamma_contrast));
    e.emplace_back("gamma4", fmt(cfg.weights.gamma_fair));
    e.emplace_back("lambda1", fmt(cfg.weights.lambda_l1));
    e.emplace_back("lambda2", fmt(cfg.weights.lambda_l2));
    e.emplace_back("tau", fmt(cfg.tau));
    e.emplace_back("contrast_negatives", fmt(cfg.contrast_negatives));
    e.emplace_back("decoder_radius", fmt(cfg.decoder.radius));
    e.emplace_back("decoder_temperature", fmt(cfg.decoder.temperature));
    e.emplace_back("class_loss", cfg.class_loss == ClassLossMode::double_softmax
                                     ? "double_softmax" : "single_softmax");
    e.emplace_back("normalize_losses", fmt(cfg.normalize_losses));
    e.emplace_back("lr", fmt(cfg.lr));
    e.emplace_back("epochs", fmt(cfg.epochs));
    e.emplace_back("early_stop_tol", fmt(cfg.early_stop_tol));
    e.emplace_back("early_stop_patience", fmt(cfg.early_stop_patience));
    e.emplace_back("seed", fmt(cfg.seed));
    e.emplace_back("seeds", fmt(cfg.seeds));
    e.emplace_back("eval_depths", fmt(cfg.eval_depths));
    e.emplace_back("fairness_depths", fmt(cfg.fairness_depths));
    e.emplace_back("ablate", cfg.ablation);
    e.emplace_back("plugin_grouping", cfg.plugin_grouping);
    e.emplace_back("checkpoint_path", cfg.checkpoint_path);
    e.emplace_back("synth_vertices", fmt(cfg.synth.vertices));
    e.emplace_back("synth_ratio_fat", fmt(cfg.synth.ratio_fat));
    e.emplace_back("synth_ratio_t2h", fmt(cfg.synth.ratio_t2h));
    e.emplace_back("synth_ratio_sfh", fmt(cfg.synth.ratio_sfh));
    e.emplace_back("synth_exponent", fmt(cfg.synth.exponent));
    e.emplace_back("synth_edges_per_snapshot", fmt(cfg.synth.edges_per_snapshot));
    e.emplace_back("synth_theta", fmt(cfg.synth.theta));
    e.emplace_back("synth_communities", fmt(cfg.synth.communities));
    e.emplace_back("synth_affinity", fmt(cfg.synth.affinity));
    return e;
}

std::string format_config(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& [k, v] : config_echo(cfg)) out += k + "=" + v + "\n";
    return out;
}

ExperimentConfig config_from_echo(
    const std::vector<std::pair<std::string, std::string>>& echo) {
    ExperimentConfig cfg;
    for (const auto& [k, v] : echo) apply_config_entry(cfg, k, v);
    return cfg;
}

const std::vector<std::string>& ablation_names() {
    static const std::vector<std::string> names = {
        "no_fair", "no_class", "no_contrast", "no_deg", "no_gru"};
    return names;
}

ExperimentConfig apply_ablation(const ExperimentConfig& cfg,
                                const std::string& name) {
    ExperimentConfig out = cfg;
    out.ablation = name;
    if (name == "no_fair") out.weights.gamma_fair = 0.0;
    else if (name == "no_class") out.weights.gamma_class = 0.0;
    else if (name == "no_contrast") out.weights.gamma_contrast = 0.0;
    else if (name == "no_deg") { /* trend branch removed at model build time */ }
    else if (name == "no_gru") out.backbone = "gcn_static";
    else throw Error("config: unknown ablation '" + name + "'");
    return out;
}

}  // namespace dgfair
