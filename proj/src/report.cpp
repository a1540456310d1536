#include "dgfair/report.hpp"

#include <filesystem>
#include <set>

#include <json.hpp>

#include "dgfair/util.hpp"

namespace dgfair {
namespace {

using nlohmann::json;

json echo_json(const ExperimentConfig& cfg) {
    json j = json::object();
    for (const auto& [k, v] : config_echo(cfg)) j[k] = v;
    return j;
}

json depth_map_json(const std::map<int, MetricStats>& m, bool with_std) {
    json j = json::object();
    for (const auto& [k, st] : m) {
        if (with_std)
            j[std::to_string(k)] = {{"mean", st.mean}, {"std", st.stddev}};
        else
            j[std::to_string(k)] = st.mean;
    }
    return j;
}

json eval_json(const EvalOutputs& e) {
    json j;
    json hr = json::object(), nd = json::object(), pr = json::object();
    for (const auto& [k, v] : e.hr) hr[std::to_string(k)] = v;
    for (const auto& [k, v] : e.ndcg) nd[std::to_string(k)] = v;
    for (const auto& [k, v] : e.prec) pr[std::to_string(k)] = v;
    j["hr"] = hr;
    j["ndcg"] = nd;
    j["prec"] = pr;
    j["rhr"] = e.rhr;
    j["rnd"] = e.rnd;
    j["hr20_t2h"] = e.hr20_group_a;
    j["hr20_sfh"] = e.hr20_group_b;
    j["users"] = e.users;
    j["dropped_cutoffs"] = e.dropped_cutoffs;
    return j;
}

json aggregate_json(const AggregateEval& agg, bool with_std) {
    json j;
    j["hr"] = depth_map_json(agg.hr, with_std);
    j["ndcg"] = depth_map_json(agg.ndcg, with_std);
    j["prec"] = depth_map_json(agg.prec, with_std);
    if (with_std) {
        j["rhr"] = {{"mean", agg.rhr.mean}, {"std", agg.rhr.stddev}};
        j["rnd"] = {{"mean", agg.rnd.mean}, {"std", agg.rnd.stddev}};
        j["hr20_t2h"] = {{"mean", agg.hr20_group_a.mean}, {"std", agg.hr20_group_a.stddev}};
        j["hr20_sfh"] = {{"mean", agg.hr20_group_b.mean}, {"std", agg.hr20_group_b.stddev}};
    } else {
        j["rhr"] = agg.rhr.mean;
        j["rnd"] = agg.rnd.mean;
    }
    if (!agg.dropped_cutoffs.empty()) j["dropped_cutoffs"] = agg.dropped_cutoffs;
    return j;
}

json group_stats_json(const std::map<std::string, GroupStats>& stats) {
    json j = json::object();
    for (const auto& [name, st] : stats) {
        j[name] = {{"count", st.count},
                   {"ratio", st.ratio},
                   {"mean_degree", st.mean_degree},
                   {"stddev_degree", st.stddev_degree}};
    }
    return j;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create report directory: " + dir);
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// One Table-3 style header chunk: metric@depth columns in ascending depth
// order, matching the sorted aggregate maps.
std::string metric_header(const ExperimentConfig& cfg) {
    std::set<int> depths(cfg.eval_depths.begin(), cfg.eval_depths.end());
    std::string h;
    for (const char* m : {"hr", "ndcg", "prec"})
        for (int k : depths) h += std::string(",") + m + "@" + std::to_string(k);
    h += ",rhr,rnd,hr20_t2h,hr20_sfh";
    return h;
}

std::string metric_cells(const AggregateEval& agg, bool stddev) {
    auto pick = [stddev](const MetricStats& st) {
        return csv_num(stddev ? st.stddev : st.mean);
    };
    std::string row;
    for (const auto* m : {&agg.hr, &agg.ndcg, &agg.prec})
        for (const auto& [k, st] : *m) row += "," + pick(st);
    row += "," + pick(agg.rhr) + "," + pick(agg.rnd) + "," +
           pick(agg.hr20_group_a) + "," + pick(agg.hr20_group_b);
    return row;
}

std::string trace_csv(const std::vector<EpochRecord>& trace) {
    std::string out = "epoch,total,ds,class,contrast,fair,monitor\n";
    for (size_t i = 0; i < trace.size(); ++i) {
        const EpochRecord& r = trace[i];
        out += std::to_string(i + 1) + "," + csv_num(r.total) + "," + csv_num(r.ds) +
               "," + csv_num(r.cls) + "," + csv_num(r.contrast) + "," +
               csv_num(r.fair) + "," + csv_num(r.monitor) + "\n";
    }
    return out;
}

}  // namespace

std::string metrics_report_json(const AggregateEval& agg, const ExperimentConfig& cfg) {
    json j = aggregate_json(agg, false);
    j.erase("hr20_t2h");
    j.erase("hr20_sfh");
    j["config_echo"] = echo_json(cfg);
    return j.dump(2) + "\n";
}

void write_run_report(const RunReport& rep, const std::string& out_dir) {
    ensure_dir(out_dir);
    AggregateEval agg = aggregate_evals(rep.runs);
    write_text_file(join_path(out_dir, "metrics.json"),
                    metrics_report_json(agg, rep.cfg));

    json j;
    j["config_echo"] = echo_json(rep.cfg);
    j["plugin_mode"] = rep.plugin_mode;
    json seeds = json::array();
    for (const SeedRun& r : rep.runs) seeds.push_back(r.seed);
    j["seeds"] = seeds;
    j["metrics"] = aggregate_json(agg, true);
    json per_seed = json::array();
    json traces = json::array();
    json timing = json::array();
    long params = 0;
    for (const SeedRun& r : rep.runs) {
        per_seed.push_back(eval_json(r.eval));
        json tr = json::array();
        for (const EpochRecord& e : r.trace)
            tr.push_back({{"total", e.total},
                          {"ds", e.ds},
                          {"class", e.cls},
                          {"contrast", e.contrast},
                          {"fair", e.fair},
                          {"monitor", e.monitor}});
        traces.push_back(tr);
        timing.push_back({{"seed", r.seed},
                          {"mean_epoch_seconds", r.mean_epoch_seconds},
                          {"converged_epoch", r.converged_epoch},
                          {"epochs", (long)r.trace.size()}});
        params = r.param_scalars;
    }
    j["per_seed_metrics"] = per_seed;
    j["loss_traces"] = traces;
    j["timing"] = timing;
    j["param_count"] = params;
    j["group_stats"] = group_stats_json(rep.group_stats);
    write_text_file(join_path(out_dir, "report.json"), j.dump(2) + "\n");

    std::string csv = "row" + metric_header(rep.cfg) + "\n";
    csv += "mean" + metric_cells(agg, false) + "\n";
    csv += "std" + metric_cells(agg, true) + "\n";
    write_text_file(join_path(out_dir, "metrics.csv"), csv);

    std::string gcsv = "group,count,ratio,snapshot,mean_degree,stddev_degree\n";
    for (const auto& [name, st] : rep.group_stats)
        for (size_t t = 0; t < st.mean_degree.size(); ++t)
            gcsv += name + "," + std::to_string(st.count) + "," + csv_num(st.ratio) +
                    "," + std::to_string(t + 1) + "," + csv_num(st.mean_degree[t]) +
                    "," + csv_num(st.stddev_degree[t]) + "\n";
    write_text_file(join_path(out_dir, "groups.csv"), gcsv);

    for (const SeedRun& r : rep.runs)
        write_text_file(
            join_path(out_dir, "trace_seed" + std::to_string(r.seed) + ".csv"),
            trace_csv(r.trace));
}

void write_ablation_report(const std::vector<AblationRow>& rows,
                           const std::vector<RunReport>& details,
                           const ExperimentConfig& cfg, const std::string& out_dir) {
    ensure_dir(out_dir);
    json j;
    j["config_echo"] = echo_json(cfg);
    json jrows = json::array();
    for (const AblationRow& row : rows) {
        json r;
        r["variant"] = row.variant;
        r["metrics"] = aggregate_json(row.agg, true);
        r["dec_pct"] = row.dec_pct;
        r["inc_pct"] = row.inc_pct;
        jrows.push_back(r);
    }
    j["rows"] = jrows;
    json jdetails = json::array();
    for (const RunReport& rep : details) {
        json d;
        d["variant_config"] = echo_json(rep.cfg);
        json per_seed = json::array();
        for (const SeedRun& r : rep.runs) per_seed.push_back(eval_json(r.eval));
        d["per_seed_metrics"] = per_seed;
        jdetails.push_back(d);
    }
    j["details"] = jdetails;
    write_text_file(join_path(out_dir, "ablation.json"), j.dump(2) + "\n");

    std::string csv = "variant" + metric_header(cfg) + ",dec_pct,inc_pct\n";
    for (const AblationRow& row : rows)
        csv += row.variant + metric_cells(row.agg, false) + "," +
               csv_num(row.dec_pct) + "," + csv_num(row.inc_pct) + "\n";
    write_text_file(join_path(out_dir, "ablation.csv"), csv);
}

void write_plugin_report(const PluginReport& rep, const std::string& out_dir) {
    ensure_dir(out_dir);
    AggregateEval without = aggregate_evals(rep.without_fair.runs);
    AggregateEval with = aggregate_evals(rep.with_fair.runs);
    json j;
    j["backbone"] = rep.backbone;
    j["grouping"] = rep.grouping;
    j["config_echo"] = echo_json(rep.with_fair.cfg);
    j["without_fair"] = aggregate_json(without, true);
    j["with_fair"] = aggregate_json(with, true);
    write_text_file(join_path(out_dir, "plugin.json"), j.dump(2) + "\n");

    std::string csv = "arm" + metric_header(rep.with_fair.cfg) + "\n";
    csv += "without_fair" + metric_cells(without, false) + "\n";
    csv += "with_fair" + metric_cells(with, false) + "\n";
    write_text_file(join_path(out_dir, "plugin.csv"), csv);
}

void write_scale_report(const std::vector<ScalePoint>& points,
                        const ExperimentConfig& cfg, const std::string& out_dir) {
    ensure_dir(out_dir);
    json j;
    j["config_echo"] = echo_json(cfg);
    json arr = json::array();
    for (const ScalePoint& p : points)
        arr.push_back({{"fraction", p.fraction},
                       {"vertices", p.vertices},
                       {"train_edges", p.train_edges},
                       {"param_scalars", p.param_scalars},
                       {"mean_epoch_seconds", p.mean_epoch_seconds}});
    j["points"] = arr;
    write_text_file(join_path(out_dir, "scaling.json"), j.dump(2) + "\n");

    std::string csv = "fraction,vertices,train_edges,param_scalars,mean_epoch_seconds\n";
    for (const ScalePoint& p : points)
        csv += csv_num(p.fraction) + "," + std::to_string(p.vertices) + "," +
               std::to_string(p.train_edges) + "," + std::to_string(p.param_scalars) +
               "," + csv_num(p.mean_epoch_seconds) + "\n";
    write_text_file(join_path(out_dir, "scaling.csv"), csv);
}

}  // namespace dgfair
