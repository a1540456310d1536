#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dgfair/util.hpp"

namespace dgfair {

struct InteractionRecord {
    std::string user_id;
    std::string item_id;
    std::int64_t timestamp = 0;
};

struct LogFormat {
    char delimiter = '\t';
};

// Users and items live in one vertex universe. Raw ids are namespaced so a
// user "42" and an item "42" stay distinct vertices.
std::string user_vertex(const std::string& raw_id);
std::string item_vertex(const std::string& raw_id);

std::vector<InteractionRecord> parse_log(const std::string& text, const LogFormat& fmt = {});
std::vector<InteractionRecord> ingest_log(const std::string& path, const LogFormat& fmt = {});

struct SnapshotGraph {
    int index = 0;  // 1-based position in the sequence
    // Undirected edges as (lo, hi) universe-index pairs, sorted and deduped.
    std::vector<std::pair<int, int>> edges;
    // Universe indices of vertices with at least one incident edge here.
    std::vector<int> vertices;
};

class DynamicGraph {
public:
    DynamicGraph() = default;
    DynamicGraph(std::vector<std::string> universe, std::vector<SnapshotGraph> snapshots,
                 std::vector<std::int64_t> boundaries);

    int vertex_count() const { return static_cast<int>(universe_.size()); }
    int snapshot_count() const { return static_cast<int>(snapshots_.size()); }
    const std::vector<std::string>& universe() const { return universe_; }
    const std::string& vertex_id(int idx) const { return universe_[static_cast<size_t>(idx)]; }
    int index_of(const std::string& id) const;  // -1 when absent
    const SnapshotGraph& snapshot(int t) const;  // t in [1, T]
    const std::vector<SnapshotGraph>& snapshots() const { return snapshots_; }
    const std::vector<std::int64_t>& boundaries() const { return boundaries_; }
    std::size_t edge_total() const;

    // Sorted neighbor lists in the union of all snapshot edge sets.
    std::vector<std::vector<int>> union_adjacency() const;

private:
    std::vector<std::string> universe_;       // sorted vertex ids
    std::vector<SnapshotGraph> snapshots_;    // length T
    std::vector<std::int64_t> boundaries_;    // T+1 interval boundaries
};

// Partition [min_ts, max_ts] into T equal-width intervals (last one closed)
// and collect one deduped undirected graph per interval. window_count must be
// 1 or divide T; it is validated here because downstream windowing assumes it.
DynamicGraph build_snapshots(const std::vector<InteractionRecord>& records, int T,
                             int window_count = 1);

// Per-vertex degree over time: table[v][t] = degree of v in snapshot t+1.
struct DegreeTable {
    std::vector<std::vector<int>> per_vertex;
    int snapshots = 0;
    const std::vector<int>& series(int vertex_idx) const {
        return per_vertex[static_cast<size_t>(vertex_idx)];
    }
};

DegreeTable degree_series(const DynamicGraph& g);

// Text dump: one `t<TAB>u<TAB>v` line per edge plus a key=value manifest.
void write_snapshot_dump(const DynamicGraph& g, const std::string& edges_path,
                         const std::string& manifest_path);
DynamicGraph read_snapshot_dump(const std::string& edges_path, const std::string& manifest_path);

}  // namespace dgfair
