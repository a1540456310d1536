#include "dgfair/evolution_labeler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dgfair {

const char* to_string(EvolutionLabel l) {
    switch (l) {
        case EvolutionLabel::SfH: return "SfH";
        case EvolutionLabel::T2H: return "T2H";
        case EvolutionLabel::FaT: return "FaT";
    }
    return "?";
}

const char* to_string(RawTrend t) {
    switch (t) {
        case RawTrend::FaT: return "FaT";
        case RawTrend::T2H: return "T2H";
        case RawTrend::H2T: return "H2T";
        case RawTrend::FaH: return "FaH";
    }
    return "?";
}

EvolutionLabel label_from_string(const std::string& s) {
    if (s == "SfH") return EvolutionLabel::SfH;
    if (s == "T2H") return EvolutionLabel::T2H;
    if (s == "FaT") return EvolutionLabel::FaT;
    throw Error("unknown evolution label: " + s);
}

void validate(const LabelerConfig& cfg) {
    if (cfg.head_ratio <= 0.0 || cfg.head_ratio >= 1.0)
        throw Error("head ratio must lie in (0, 1), got " + std::to_string(cfg.head_ratio));
    if (cfg.rho < 0) throw Error("rho must be >= 0");
    if (cfg.theta < 1) throw Error("theta must be >= 1");
}

namespace {

long total_degree(const std::vector<int>& s) {
    return std::accumulate(s.begin(), s.end(), 0L);
}

}  // namespace

std::vector<EvolutionLabel> label_slope(const DegreeTable& table, const LabelerConfig& cfg) {
    validate(cfg);
    int n = static_cast<int>(table.per_vertex.size());
    std::vector<EvolutionLabel> labels(static_cast<size_t>(n), EvolutionLabel::FaT);
    if (n == 0) return labels;
    if (table.snapshots < 1) throw Error("degree table has no snapshots");

    std::vector<long> key(static_cast<size_t>(n));
    for (int v = 0; v < n; ++v) {
        const auto& s = table.per_vertex[static_cast<size_t>(v)];
        key[static_cast<size_t>(v)] =
            cfg.head_key == HeadRankKey::total_degree ? total_degree(s) : s.back();
    }

    int head_num = static_cast<int>(std::ceil(static_cast<double>(n) * cfg.head_ratio));
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&key](int a, int b) {
        if (key[static_cast<size_t>(a)] != key[static_cast<size_t>(b)])
            return key[static_cast<size_t>(a)] > key[static_cast<size_t>(b)];
        return a < b;
    });

    std::vector<char> in_head(static_cast<size_t>(n), 0);
    for (int r = 0; r < head_num && r < n; ++r) in_head[static_cast<size_t>(order[r])] = 1;

    for (int v = 0; v < n; ++v) {
        if (in_head[static_cast<size_t>(v)]) {
            labels[static_cast<size_t>(v)] = EvolutionLabel::SfH;
            continue;
        }
        const auto& s = table.per_vertex[static_cast<size_t>(v)];
        int arg_max = 0, arg_min = 0;
        for (int t = 1; t < static_cast<int>(s.size()); ++t) {
            if (s[static_cast<size_t>(t)] > s[static_cast<size_t>(arg_max)]) arg_max = t;
            if (s[static_cast<size_t>(t)] < s[static_cast<size_t>(arg_min)]) arg_min = t;
        }
        labels[static_cast<size_t>(v)] =
            (arg_max - arg_min > cfg.rho) ? EvolutionLabel::T2H : EvolutionLabel::FaT;
    }
    return labels;
}

std::vector<EvolutionLabel> label_degree_threshold(const DegreeTable& table,
                                                   const LabelerConfig& cfg) {
    validate(cfg);
    std::vector<EvolutionLabel> labels;
    labels.reserve(table.per_vertex.size());
    for (const auto& s : table.per_vertex) {
        if (s.empty()) throw Error("degree table has no snapshots");
        int first = s.front(), last = s.back();
        if (first >= cfg.theta) labels.push_back(EvolutionLabel::SfH);
        else if (last >= cfg.theta) labels.push_back(EvolutionLabel::T2H);
        else labels.push_back(EvolutionLabel::FaT);
    }
    return labels;
}

std::vector<EvolutionLabel> label_vertices(const DegreeTable& table, const LabelerConfig& cfg) {
    return cfg.mode == LabelerMode::slope ? label_slope(table, cfg)
                                          : label_degree_threshold(table, cfg);
}

std::vector<RawTrend> raw_trends(const DegreeTable& table, int theta) {
    if (theta < 1) throw Error("theta must be >= 1");
    std::vector<RawTrend> out;
    out.reserve(table.per_vertex.size());
    for (const auto& s : table.per_vertex) {
        if (s.empty()) throw Error("degree table has no snapshots");
        bool head_first = s.front() >= theta, head_last = s.back() >= theta;
        if (head_first && head_last) out.push_back(RawTrend::FaH);
        else if (head_first) out.push_back(RawTrend::H2T);
        else if (head_last) out.push_back(RawTrend::T2H);
        else out.push_back(RawTrend::FaT);
    }
    return out;
}

std::map<std::string, GroupStats> group_statistics(const std::vector<std::string>& group_of,
                                                   const DegreeTable& table) {
    if (group_of.size() != table.per_vertex.size())
        throw Error("group_statistics: label/table size mismatch");
    std::map<std::string, GroupStats> stats;
    if (group_of.empty()) return stats;
    size_t T = static_cast<size_t>(table.snapshots);

    std::map<std::string, std::vector<int>> members;
    for (size_t v = 0; v < group_of.size(); ++v) members[group_of[v]].push_back(static_cast<int>(v));

    for (const auto& [name, verts] : members) {
        GroupStats gs;
        gs.count = static_cast<long>(verts.size());
        gs.ratio = static_cast<double>(verts.size()) / static_cast<double>(group_of.size());
        gs.mean_degree.assign(T, 0.0);
        gs.stddev_degree.assign(T, 0.0);
        for (size_t t = 0; t < T; ++t) {
            double sum = 0.0;
            for (int v : verts) sum += table.per_vertex[static_cast<size_t>(v)][t];
            double mean = sum / static_cast<double>(verts.size());
            double sq = 0.0;
            for (int v : verts) {
                double d = table.per_vertex[static_cast<size_t>(v)][t] - mean;
                sq += d * d;
            }
            gs.mean_degree[t] = mean;
            gs.stddev_degree[t] = std::sqrt(sq / static_cast<double>(verts.size()));
        }
        stats[name] = std::move(gs);
    }
    return stats;
}

std::map<std::string, GroupStats> group_statistics(const std::vector<EvolutionLabel>& labels,
                                                   const DegreeTable& table) {
    std::vector<std::string> names;
    names.reserve(labels.size());
    for (auto l : labels) names.emplace_back(to_string(l));
    return group_statistics(names, table);
}

void write_label_dump(const DynamicGraph& g, const std::vector<EvolutionLabel>& labels,
                      const std::string& path) {
    if (static_cast<int>(labels.size()) != g.vertex_count())
        throw Error("label dump: label count does not match universe");
    std::ostringstream out;
    for (int v = 0; v < g.vertex_count(); ++v)
        out << g.vertex_id(v) << '\t' << to_string(labels[static_cast<size_t>(v)]) << '\n';
    write_text_file(path, out.str());
}

std::map<std::string, EvolutionLabel> read_label_dump(const std::string& path) {
    std::map<std::string, EvolutionLabel> out;
    std::istringstream in(read_text_file(path));
    std::string line;
    size_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty()) continue;
        auto fields = split(line, '\t');
        if (fields.size() != 2) throw Error("malformed label dump line " + std::to_string(ln));
        out[fields[0]] = label_from_string(fields[1]);
    }
    return out;
}

}  // namespace dgfair
