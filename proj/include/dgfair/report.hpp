#pragma once

#include <string>

#include "dgfair/experiment.hpp"

namespace dgfair {

// Metrics object consumed by downstream tooling:
// {hr: {k: value}, ndcg: {...}, prec: {...}, rhr: value, rnd: value,
//  config_echo: {...}} with seed means as the values.
std::string metrics_report_json(const AggregateEval& agg, const ExperimentConfig& cfg);

// Full training report: metrics.json (schema above), report.json (per-seed
// metrics, loss traces, group statistics, timing), metrics.csv, groups.csv
// and one trace_seed<seed>.csv per seed. Creates out_dir if needed.
void write_run_report(const RunReport& rep, const std::string& out_dir);

// ablation.json + ablation.csv; rows come from ablation_table, details from
// the same call (full model first).
void write_ablation_report(const std::vector<AblationRow>& rows,
                           const std::vector<RunReport>& details,
                           const ExperimentConfig& cfg, const std::string& out_dir);

// plugin.json + plugin.csv with the paired with/without fairness arms.
void write_plugin_report(const PluginReport& rep, const std::string& out_dir);

// scaling.json + scaling.csv.
void write_scale_report(const std::vector<ScalePoint>& points,
                        const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace dgfair
