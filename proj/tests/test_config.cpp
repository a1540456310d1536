#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "dgfair/config.hpp"

using namespace dgfair;

namespace {

std::string temp_path(const std::string& stem) {
    return std::string("/tmp/dgfair_cfg_") + stem + "_" + std::to_string(::getpid()) + ".cfg";
}

struct TempFile {
    std::string path;
    TempFile(const std::string& stem, const std::string& text) : path(temp_path(stem)) {
        std::ofstream out(path);
        out << text;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

std::string error_text(const char* stem, const std::string& body) {
    TempFile f(stem, body);
    try {
        load_config_file(f.path);
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("echo round-trips through apply and preserves defaults") {
    ExperimentConfig cfg;
    auto echo = config_echo(cfg);
    ExperimentConfig back = config_from_echo(echo);
    CHECK(config_echo(back) == echo);

    std::string text = format_config(cfg);
    CHECK(text.find("dim=64\n") != std::string::npos);
    CHECK(text.find("backbone=gcn_gru\n") != std::string::npos);
    CHECK(text.find("labeler=slope\n") != std::string::npos);
    CHECK(text.find("seeds=1,2,3,4,5\n") != std::string::npos);
    CHECK(text.find("gamma1=0.25\n") != std::string::npos);
    CHECK(text.find("theta=10\n") != std::string::npos);
}

TEST_CASE("non-default values survive the echo round-trip") {
    ExperimentConfig cfg;
    cfg.dim = 17;
    cfg.tau = 0.07;
    cfg.trend_log1p = true;
    cfg.labeler.mode = LabelerMode::degree_threshold;
    cfg.labeler.head_key = HeadRankKey::last_snapshot;
    cfg.class_loss = ClassLossMode::single_softmax;
    cfg.seeds = {42};
    cfg.eval_depths = {3, 9};
    cfg.ablation = "no_gru";
    cfg.data_path = "some/log.tsv";
    cfg.weights.lambda_l1 = 1e-3;

    ExperimentConfig back = config_from_echo(config_echo(cfg));
    CHECK(config_echo(back) == config_echo(cfg));
    CHECK(back.dim == 17);
    CHECK(back.labeler.mode == LabelerMode::degree_threshold);
    CHECK(back.labeler.head_key == HeadRankKey::last_snapshot);
    CHECK(back.class_loss == ClassLossMode::single_softmax);
    CHECK(back.seeds == std::vector<unsigned long>{42});
    CHECK(back.eval_depths == std::vector<int>{3, 9});
}

TEST_CASE("config files accept comments, blanks and spaced assignments") {
    TempFile f("ok",
               "# experiment setup\n"
               "\n"
               "dim = 12\n"
               "snapshots=8   # inline note\n"
               "windows =2\n"
               "tau= 0.25\n"
               "trend_log1p=true\n"
               "seeds=4,5\n"
               "backbone=gcn_static\n");
    ExperimentConfig cfg = load_config_file(f.path);
    CHECK(cfg.dim == 12);
    CHECK(cfg.snapshots == 8);
    CHECK(cfg.windows == 2);
    CHECK(cfg.tau == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(cfg.trend_log1p);
    CHECK(cfg.seeds == std::vector<unsigned long>{4, 5});
    CHECK(cfg.backbone == "gcn_static");
}

TEST_CASE("file errors carry the offending line or key") {
    CHECK(error_text("noeq", "dim=4\nsnapshots=6\njust words\n").find(":3") !=
          std::string::npos);
    CHECK(error_text("unknown", "frobnicate=1\n").find("unknown config key") !=
          std::string::npos);
    CHECK(error_text("badint", "dim=four\n").find("expected an integer") != std::string::npos);
    CHECK(error_text("baddouble", "tau=hot\n").find("expected a number") != std::string::npos);
    CHECK(error_text("badbool", "trend_log1p=maybe\n").find("expected true/false") !=
          std::string::npos);
    CHECK(error_text("badlist", "eval_depths=1,x\n").find("expected an integer") !=
          std::string::npos);
    CHECK(error_text("badseeds", "seeds=1,beta\n").find("expected seeds") != std::string::npos);
    CHECK(error_text("badlabeler", "labeler=psychic\n").find("slope or threshold") !=
          std::string::npos);
    CHECK(error_text("badkey", "head_rank_key=middle\n").find("total or last") !=
          std::string::npos);
    CHECK(error_text("badloss", "class_loss=zero_softmax\n").find("double_softmax") !=
          std::string::npos);
    CHECK_THROWS_AS(load_config_file("/nonexistent/nowhere.cfg"), Error);
}

TEST_CASE("validate accepts the defaults and zero epochs") {
    ExperimentConfig cfg;
    CHECK_NOTHROW(validate_config(cfg));
    cfg.epochs = 0;
    CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("validate rejects out-of-range settings") {
    auto broken = [](auto mutate) {
        ExperimentConfig cfg;
        mutate(cfg);
        return cfg;
    };
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.snapshots = 0; })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.windows = 4; })), Error);  // 4 does not divide 6
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.windows = 0; })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.dim = 0; })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.gnn_layers = 0; })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.trend_gru_layers = 0; })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.tau = 0.0; })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.contrast_negatives = 0; })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.decoder.temperature = 0.0; })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.weights.gamma_fair = -0.1; })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.weights.lambda_l2 = -1.0; })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.lr = 0.0; })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.epochs = -1; })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.early_stop_patience = 0; })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.seeds.clear(); })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.eval_depths = {0}; })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.fairness_depths = {0}; })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.ablation = "no_everything"; })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.plugin_grouping = "vibes"; })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.backbone = "transformer"; })), Error);
    CHECK_THROWS_AS(validate_config(broken([](auto& c) { c.labeler.head_ratio = 1.5; })), Error);
}

TEST_CASE("ablation switches flip exactly their target") {
    ExperimentConfig cfg;
    CHECK(ablation_names() == std::vector<std::string>{"no_fair", "no_class", "no_contrast",
                                                       "no_deg", "no_gru"});

    ExperimentConfig v = apply_ablation(cfg, "no_fair");
    CHECK(v.weights.gamma_fair == 0.0);
    CHECK(v.weights.gamma_class == cfg.weights.gamma_class);
    CHECK(v.ablation == "no_fair");

    CHECK(apply_ablation(cfg, "no_class").weights.gamma_class == 0.0);
    CHECK(apply_ablation(cfg, "no_contrast").weights.gamma_contrast == 0.0);
    CHECK(apply_ablation(cfg, "no_gru").backbone == "gcn_static");

    ExperimentConfig nd = apply_ablation(cfg, "no_deg");
    CHECK(nd.ablation == "no_deg");
    CHECK(nd.backbone == cfg.backbone);
    CHECK(nd.weights.gamma_class == cfg.weights.gamma_class);

    CHECK_THROWS_AS(apply_ablation(cfg, "no_everything"), Error);
}

TEST_CASE("single seed key sets the scalar seed") {
    ExperimentConfig cfg;
    apply_config_entry(cfg, "seed", "77");
    CHECK(cfg.seed == 77ul);
    CHECK_THROWS_AS(apply_config_entry(cfg, "seed", "pi"), Error);
    apply_config_entry(cfg, "synth_vertices", "123");
    CHECK(cfg.synth.vertices == 123);
    apply_config_entry(cfg, "synth_affinity", "0.5");
    CHECK(cfg.synth.affinity == doctest::Approx(0.5).epsilon(1e-15));
}
