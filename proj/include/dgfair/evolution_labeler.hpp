#pragma once

#include <map>
#include <string>
#include <vector>

#include "dgfair/graph_store.hpp"

namespace dgfair {

// Structural evolution classes. The order is load-bearing: classification
// logits and one-hot targets use exactly this ordering.
enum class EvolutionLabel { SfH = 0, T2H = 1, FaT = 2 };

// Four-way trend split used for corpus statistics; SfH merges H2T and FaH.
enum class RawTrend { FaT = 0, T2H = 1, H2T = 2, FaH = 3 };

enum class LabelerMode { slope, degree_threshold };
enum class HeadRankKey { total_degree, last_snapshot };

struct LabelerConfig {
    LabelerMode mode = LabelerMode::slope;
    double head_ratio = 0.2;  // slope mode: share of vertices forming the head group
    int rho = 0;              // slope mode: index-span threshold separating T2H from FaT
    int theta = 10;           // threshold mode: head/tail degree boundary
    HeadRankKey head_key = HeadRankKey::total_degree;
};

const char* to_string(EvolutionLabel l);
const char* to_string(RawTrend t);
EvolutionLabel label_from_string(const std::string& s);

void validate(const LabelerConfig& cfg);

// Slope-based annotation. The top ceil(|V| * head_ratio) vertices by ranking
// key become SfH (ties broken by vertex index ascending). Remaining vertices
// are T2H when argmax_t(deg) - argmin_t(deg) > rho, FaT otherwise; both arg
// scans take the earliest index on ties.
std::vector<EvolutionLabel> label_slope(const DegreeTable& table, const LabelerConfig& cfg);

// Boundary-degree annotation: first < theta and last < theta -> FaT,
// first < theta and last >= theta -> T2H, first >= theta -> SfH.
std::vector<EvolutionLabel> label_degree_threshold(const DegreeTable& table,
                                                   const LabelerConfig& cfg);

std::vector<EvolutionLabel> label_vertices(const DegreeTable& table, const LabelerConfig& cfg);

std::vector<RawTrend> raw_trends(const DegreeTable& table, int theta);

struct GroupStats {
    long count = 0;
    double ratio = 0.0;
    std::vector<double> mean_degree;    // per snapshot
    std::vector<double> stddev_degree;  // per snapshot, population convention
};

// Keyed by group name; groups with no members are omitted.
std::map<std::string, GroupStats> group_statistics(const std::vector<std::string>& group_of,
                                                   const DegreeTable& table);
std::map<std::string, GroupStats> group_statistics(const std::vector<EvolutionLabel>& labels,
                                                   const DegreeTable& table);

void write_label_dump(const DynamicGraph& g, const std::vector<EvolutionLabel>& labels,
                      const std::string& path);
std::map<std::string, EvolutionLabel> read_label_dump(const std::string& path);

}  // namespace dgfair
