// Command-line front end: data ingestion, labeling, training, ablations,
// backbone fairness plugin runs, synthetic data, evaluation, scaling probes,
// and report regeneration from checkpoints.

#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dgfair/checkpoint.hpp"
#include "dgfair/config.hpp"
#include "dgfair/experiment.hpp"
#include "dgfair/report.hpp"
#include "dgfair/synthetic.hpp"
#include "dgfair/util.hpp"

namespace {

using namespace dgfair;

std::string dashed(std::string key) {
    for (char& c : key)
        if (c == '_') c = '-';
    return key;
}

// Every config key becomes a --key-with-dashes option. Overrides are kept in
// flag order and applied on top of the (optional) config file, so the flag
// always wins.
struct ConfigArgs {
    std::string config_file;
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
    cmd->add_option("--config", args.config_file, "key=value config file");
    for (const auto& [key, def] : config_echo(ExperimentConfig{})) {
        std::string help = "config key " + key;
        if (!def.empty()) help += " (default " + def + ")";
        cmd->add_option_function<std::string>(
            "--" + dashed(key),
            [&args, key = key](const std::string& v) { args.overrides.emplace_back(key, v); },
            help);
    }
}

ExperimentConfig resolve_config(const ConfigArgs& args) {
    ExperimentConfig cfg;
    if (!args.config_file.empty()) cfg = load_config_file(args.config_file);
    for (const auto& [k, v] : args.overrides) apply_config_entry(cfg, k, v);
    validate_config(cfg);
    return cfg;
}

std::vector<InteractionRecord> records_for(const ExperimentConfig& cfg) {
    if (!cfg.data_path.empty()) return ingest_log(cfg.data_path);
    SyntheticSpec spec = cfg.synth;
    spec.snapshots = cfg.snapshots;
    return generate_synthetic(spec, cfg.seed).records;
}

void ensure_parent_exists(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory: " + dir);
}

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void print_eval(const EvalOutputs& ev) {
    for (const auto& [k, v] : ev.hr) std::printf("  hr@%d    %.6f\n", k, v);
    for (const auto& [k, v] : ev.ndcg) std::printf("  ndcg@%d  %.6f\n", k, v);
    for (const auto& [k, v] : ev.prec) std::printf("  prec@%d  %.6f\n", k, v);
    std::printf("  rhr     %.6f\n  rnd     %.6f\n", ev.rhr, ev.rnd);
    if (ev.hr20_group_a >= 0) std::printf("  hr@20 group A  %.6f\n", ev.hr20_group_a);
    if (ev.hr20_group_b >= 0) std::printf("  hr@20 group B  %.6f\n", ev.hr20_group_b);
}

int cmd_ingest(const ConfigArgs& args, const std::string& log_path, const std::string& out) {
    ExperimentConfig cfg = resolve_config(args);
    if (!log_path.empty()) cfg.data_path = log_path;
    if (cfg.data_path.empty()) throw Error("ingest needs a log file (positional or --data)");
    auto records = ingest_log(cfg.data_path);
    DynamicGraph g = build_snapshots(records, cfg.snapshots, cfg.windows);
    ensure_parent_exists(out);
    write_snapshot_dump(g, join(out, "edges.tsv"), join(out, "manifest.txt"));
    std::printf("ingested %zu records: %d vertices, %zu edges, %d snapshots\n",
                records.size(), g.vertex_count(), g.edge_total(), g.snapshot_count());
    std::printf("wrote %s and %s\n", join(out, "edges.tsv").c_str(),
                join(out, "manifest.txt").c_str());
    return 0;
}

nlohmann::json stats_json(const std::map<std::string, GroupStats>& stats) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, s] : stats) {
        j[name] = {{"count", s.count},
                   {"ratio", s.ratio},
                   {"mean_degree", s.mean_degree},
                   {"stddev_degree", s.stddev_degree}};
    }
    return j;
}

int cmd_label(const ConfigArgs& args, const std::string& out) {
    ExperimentConfig cfg = resolve_config(args);
    auto records = records_for(cfg);
    DynamicGraph g = build_snapshots(records, cfg.snapshots, cfg.windows);
    DegreeTable table = degree_series(g);
    auto labels = label_vertices(table, cfg.labeler);
    auto stats = group_statistics(labels, table);

    std::printf("%d vertices over %d snapshots\n", g.vertex_count(), g.snapshot_count());
    std::printf("evolution groups:\n");
    for (const auto& [name, s] : stats)
        std::printf("  %-4s count %-8ld ratio %6.2f%%\n", name.c_str(), s.count,
                    100.0 * s.ratio);

    // Four-way trend split of the same table (SfH splits into H2T and FaH).
    auto trends = raw_trends(table, cfg.labeler.theta);
    std::vector<std::string> trend_of(trends.size());
    for (size_t i = 0; i < trends.size(); ++i) trend_of[i] = to_string(trends[i]);
    auto trend_stats = group_statistics(trend_of, table);
    std::printf("raw degree trends (theta=%d):\n", cfg.labeler.theta);
    for (const auto& [name, s] : trend_stats)
        std::printf("  %-4s count %-8ld ratio %6.2f%%\n", name.c_str(), s.count,
                    100.0 * s.ratio);

    if (!out.empty()) {
        ensure_parent_exists(out);
        write_label_dump(g, labels, join(out, "labels.tsv"));
        write_text_file(join(out, "stats.json"), stats_json(stats).dump(2) + "\n");
        write_text_file(join(out, "trends.json"), stats_json(trend_stats).dump(2) + "\n");
        std::printf("wrote %s, stats.json, trends.json\n", join(out, "labels.tsv").c_str());
    }
    return 0;
}

int cmd_train(const ConfigArgs& args, const std::string& out, const std::string& resume) {
    ExperimentConfig cfg = resolve_config(args);
    RunReport rep;
    if (!resume.empty()) {
        Checkpoint ck = load_checkpoint(resume);
        Trainer t(ck);
        while (!t.finished()) t.run_epoch();
        rep.cfg = t.config();
        rep.plugin_mode = ck.plugin_mode;
        rep.group_stats = t.data().group_stats;
        rep.runs.push_back({ck.seed, t.trace(), t.evaluate(), t.converged_epoch(),
                            t.mean_epoch_seconds(), t.param_scalars()});
        if (!t.config().checkpoint_path.empty())
            save_checkpoint(t.make_checkpoint(), t.config().checkpoint_path);
    } else {
        rep = run_training(cfg);
    }
    for (const auto& run : rep.runs) {
        std::printf("seed %lu: %zu epochs, converged at %d, params %ld\n", run.seed,
                    run.trace.size(), run.converged_epoch, run.param_scalars);
        print_eval(run.eval);
    }
    if (!out.empty()) {
        write_run_report(rep, out);
        std::printf("reports written to %s\n", out.c_str());
    }
    return 0;
}

int cmd_ablate(const ConfigArgs& args, const std::string& out, std::string which) {
    ExperimentConfig cfg = resolve_config(args);
    if (which.empty()) which = cfg.ablation;
    std::vector<std::string> names;
    if (which == "all" || which.empty()) {
        names = ablation_names();
    } else {
        for (const auto& n : split(which, ','))
            if (!n.empty()) names.push_back(n);
    }
    cfg.ablation.clear();
    std::vector<RunReport> details;
    auto rows = ablation_table(cfg, names, &details);
    std::printf("%-12s %10s %10s %10s %10s\n", "variant", "hr@20", "rnd", "dec%", "inc%");
    for (const auto& r : rows) {
        auto it = r.agg.hr.find(20);
        double hr20 = it == r.agg.hr.end() ? -1.0 : it->second.mean;
        std::printf("%-12s %10.4f %10.4f %10.2f %10.2f\n", r.variant.c_str(), hr20,
                    r.agg.rnd.mean, r.dec_pct, r.inc_pct);
    }
    if (!out.empty()) {
        write_ablation_report(rows, details, cfg, out);
        std::printf("reports written to %s\n", out.c_str());
    }
    return 0;
}

int cmd_plugin(const ConfigArgs& args, const std::string& out) {
    ExperimentConfig cfg = resolve_config(args);
    PluginReport rep = run_fairness_plugin(cfg);
    auto agg_of = [](const RunReport& r) { return aggregate_evals(r.runs); };
    AggregateEval without = agg_of(rep.without_fair), with = agg_of(rep.with_fair);
    std::printf("backbone %s, grouping %s\n", rep.backbone.c_str(), rep.grouping.c_str());
    std::printf("%-14s %10s %10s %10s\n", "run", "hr@20", "rhr", "rnd");
    auto hr20 = [](const AggregateEval& a) {
        auto it = a.hr.find(20);
        return it == a.hr.end() ? -1.0 : it->second.mean;
    };
    std::printf("%-14s %10.4f %10.4f %10.4f\n", "without_fair", hr20(without),
                without.rhr.mean, without.rnd.mean);
    std::printf("%-14s %10.4f %10.4f %10.4f\n", "with_fair", hr20(with), with.rhr.mean,
                with.rnd.mean);
    if (!out.empty()) {
        write_plugin_report(rep, out);
        std::printf("reports written to %s\n", out.c_str());
    }
    return 0;
}

int cmd_synth(const ConfigArgs& args, const std::string& out, bool planted_labels) {
    ExperimentConfig cfg = resolve_config(args);
    SyntheticSpec spec = cfg.synth;
    spec.snapshots = cfg.snapshots;
    SyntheticData data = generate_synthetic(spec, cfg.seed);
    ensure_parent_exists(out);
    std::string log_path = join(out, "log.tsv");
    std::string text = "user_id\titem_id\ttimestamp\n";
    for (const auto& r : data.records)
        text += r.user_id + "\t" + r.item_id + "\t" + std::to_string(r.timestamp) + "\n";
    write_text_file(log_path, text);
    std::printf("wrote %zu interactions over %zu vertices to %s\n", data.records.size(),
                data.vertex_ids.size(), log_path.c_str());
    for (const auto& [label, ratio] : planted_ratios(data))
        std::printf("  planted %-4s %6.2f%%\n", to_string(label), 100.0 * ratio);
    if (planted_labels) {
        std::string lp = join(out, "planted.tsv");
        std::string body;
        for (size_t i = 0; i < data.vertex_ids.size(); ++i)
            body += data.vertex_ids[i] + "\t" + to_string(data.planted[i]) + "\n";
        write_text_file(lp, body);
        std::printf("wrote planted labels to %s\n", lp.c_str());
    }
    return 0;
}

int cmd_evaluate(const ConfigArgs& args, const std::string& ckpt_path, bool global_ranking,
                 const std::string& out) {
    (void)args;
    Checkpoint ck = load_checkpoint(ckpt_path);
    Trainer t(ck);
    EvalOutputs ev = t.evaluate(global_ranking);
    std::printf("checkpoint %s: seed %lu, %d epochs, %ld users evaluated\n",
                ckpt_path.c_str(), ck.seed, ck.epochs_done, ev.users);
    print_eval(ev);
    if (!ev.dropped_cutoffs.empty()) {
        std::printf("  fairness cutoffs beyond the candidate set:");
        for (int k : ev.dropped_cutoffs) std::printf(" %d", k);
        std::printf("\n");
    }
    if (!out.empty()) {
        RunReport rep;
        rep.cfg = t.config();
        rep.plugin_mode = ck.plugin_mode;
        rep.group_stats = t.data().group_stats;
        rep.runs.push_back({ck.seed, ck.trace, ev, ck.converged_epoch, 0.0,
                            t.param_scalars()});
        write_run_report(rep, out);
        std::printf("reports written to %s\n", out.c_str());
    }
    return 0;
}

int cmd_scale(const ConfigArgs& args, const std::string& out, std::vector<double> fractions,
              int warmup, int timed) {
    ExperimentConfig cfg = resolve_config(args);
    if (fractions.empty()) fractions = {0.2, 0.4, 0.6, 0.8, 1.0};
    auto points = scalability_probe(cfg, fractions, warmup, timed);
    std::printf("%8s %10s %12s %12s %14s\n", "fraction", "vertices", "train_edges",
                "params", "sec/epoch");
    for (const auto& p : points)
        std::printf("%8.2f %10d %12ld %12ld %14.4f\n", p.fraction, p.vertices,
                    p.train_edges, p.param_scalars, p.mean_epoch_seconds);
    if (!out.empty()) {
        write_scale_report(points, cfg, out);
        std::printf("reports written to %s\n", out.c_str());
    }
    return 0;
}

int cmd_report(const std::vector<std::string>& ckpts, bool global_ranking,
               const std::string& out) {
    if (ckpts.empty()) throw Error("report needs at least one --checkpoint");
    RunReport rep;
    for (size_t i = 0; i < ckpts.size(); ++i) {
        Checkpoint ck = load_checkpoint(ckpts[i]);
        Trainer t(ck);
        if (i == 0) {
            rep.cfg = t.config();
            rep.plugin_mode = ck.plugin_mode;
            rep.group_stats = t.data().group_stats;
        } else if (config_echo(t.config()) != config_echo(rep.cfg)) {
            throw Error("checkpoints disagree on configuration: " + ckpts[i]);
        }
        rep.runs.push_back({ck.seed, ck.trace, t.evaluate(global_ranking),
                            ck.converged_epoch, 0.0, t.param_scalars()});
    }
    write_run_report(rep, out);
    std::printf("reports for %zu checkpoints written to %s\n", ckpts.size(), out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structurally fair dynamic-graph embedding toolkit"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("--quiet", quiet, "suppress progress logging");

    ConfigArgs args;
    std::string log_path, out, resume, which, ckpt_path;
    std::vector<std::string> ckpts;
    std::vector<double> fractions;
    bool planted = false, global_ranking = false;
    int warmup = 2, timed = 3;

    auto* ingest = app.add_subcommand("ingest", "parse a log and dump snapshots");
    ingest->add_option("log", log_path, "interaction log (TSV)");
    ingest->add_option("--out", out, "output directory")->required();
    add_config_options(ingest, args);

    auto* label = app.add_subcommand("label", "annotate vertices with evolution classes");
    label->add_option("--out", out, "output directory for labels.tsv");
    add_config_options(label, args);

    auto* train = app.add_subcommand("train", "run training over the configured seeds");
    train->add_option("--out", out, "report output directory");
    train->add_option("--resume", resume, "continue from a checkpoint file");
    add_config_options(train, args);

    auto* ablate = app.add_subcommand("ablate", "compare the full model against variants");
    ablate->add_option("--out", out, "report output directory");
    ablate->add_option("--variants", which,
                       "comma-separated variant list, or 'all' (default: --ablate value)");
    add_config_options(ablate, args);

    auto* plugin = app.add_subcommand("plugin",
                                      "train a bare backbone with and without the fairness term");
    plugin->add_option("--out", out, "report output directory");
    add_config_options(plugin, args);

    auto* synth = app.add_subcommand("synth", "generate a synthetic interaction log");
    synth->add_option("--out", out, "output directory")->required();
    synth->add_flag("--planted", planted, "also write planted labels");
    add_config_options(synth, args);

    auto* evaluate = app.add_subcommand("evaluate", "score a trained checkpoint");
    evaluate->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    evaluate->add_flag("--global-ranking", global_ranking,
                       "rank the catalog once globally for rhr/rnd");
    evaluate->add_option("--out", out, "report output directory");
    add_config_options(evaluate, args);

    auto* scale = app.add_subcommand("scale", "epoch-time probe over data subsamples");
    scale->add_option("--out", out, "report output directory");
    scale->add_option("--fractions", fractions, "subsample fractions in (0,1]");
    scale->add_option("--warmup", warmup, "untimed epochs per fraction");
    scale->add_option("--timed", timed, "timed epochs per fraction");
    add_config_options(scale, args);

    auto* report = app.add_subcommand("report", "regenerate reports from checkpoints");
    report->add_option("--checkpoint", ckpts, "checkpoint files (one per seed)")->required();
    report->add_flag("--global-ranking", global_ranking,
                     "rank the catalog once globally for rhr/rnd");
    report->add_option("--out", out, "report output directory")->required();

    CLI11_PARSE(app, argc, argv);
    dgfair::set_quiet(quiet);

    try {
        if (ingest->parsed()) return cmd_ingest(args, log_path, out);
        if (label->parsed()) return cmd_label(args, out);
        if (train->parsed()) return cmd_train(args, out, resume);
        if (ablate->parsed()) return cmd_ablate(args, out, which);
        if (plugin->parsed()) return cmd_plugin(args, out);
        if (synth->parsed()) return cmd_synth(args, out, planted);
        if (evaluate->parsed()) return cmd_evaluate(args, ckpt_path, global_ranking, out);
        if (scale->parsed()) return cmd_scale(args, out, fractions, warmup, timed);
        if (report->parsed()) return cmd_report(ckpts, global_ranking, out);
    } catch (const dgfair::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
