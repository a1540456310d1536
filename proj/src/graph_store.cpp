#include "dgfair/graph_store.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace dgfair {

std::string user_vertex(const std::string& raw_id) { return "u:" + raw_id; }
std::string item_vertex(const std::string& raw_id) { return "i:" + raw_id; }

std::vector<InteractionRecord> parse_log(const std::string& text, const LogFormat& fmt) {
    std::vector<std::string> lines;
    {
        std::string cur;
        for (char c : text) {
            if (c == '\n') {
                lines.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) lines.push_back(cur);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();

    std::vector<InteractionRecord> out;
    for (size_t ln = 0; ln < lines.size(); ++ln) {
        const std::string& line = lines[ln];
        auto fields = split(line, fmt.delimiter);
        if (ln == 0 && fields.size() == 3 && !is_integer(fields[2])) continue;  // header
        if (fields.size() != 3)
            throw Error("malformed log line " + std::to_string(ln + 1) + ": expected 3 fields, got " +
                        std::to_string(fields.size()));
        if (fields[0].empty() || fields[1].empty())
            throw Error("malformed log line " + std::to_string(ln + 1) + ": empty id field");
        if (!is_integer(fields[2]))
            throw Error("malformed log line " + std::to_string(ln + 1) +
                        ": timestamp is not an integer: " + fields[2]);
        InteractionRecord r;
        r.user_id = fields[0];
        r.item_id = fields[1];
        r.timestamp = std::stoll(fields[2]);
        if (r.timestamp < 0)
            throw Error("malformed log line " + std::to_string(ln + 1) +
                        ": negative timestamp: " + fields[2]);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<InteractionRecord> ingest_log(const std::string& path, const LogFormat& fmt) {
    return parse_log(read_text_file(path), fmt);
}

DynamicGraph::DynamicGraph(std::vector<std::string> universe, std::vector<SnapshotGraph> snapshots,
                           std::vector<std::int64_t> boundaries)
    : universe_(std::move(universe)),
      snapshots_(std::move(snapshots)),
      boundaries_(std::move(boundaries)) {}

int DynamicGraph::index_of(const std::string& id) const {
    auto it = std::lower_bound(universe_.begin(), universe_.end(), id);
    if (it == universe_.end() || *it != id) return -1;
    return static_cast<int>(it - universe_.begin());
}

const SnapshotGraph& DynamicGraph::snapshot(int t) const {
    if (t < 1 || t > snapshot_count()) throw Error("snapshot index out of range: " + std::to_string(t));
    return snapshots_[static_cast<size_t>(t - 1)];
}

std::size_t DynamicGraph::edge_total() const {
    std::size_t n = 0;
    for (const auto& s : snapshots_) n += s.edges.size();
    return n;
}

std::vector<std::vector<int>> DynamicGraph::union_adjacency() const {
    std::set<std::pair<int, int>> all;
    for (const auto& s : snapshots_)
        for (const auto& e : s.edges) all.insert(e);
    std::vector<std::vector<int>> adj(universe_.size());
    for (const auto& e : all) {
        adj[static_cast<size_t>(e.first)].push_back(e.second);
        adj[static_cast<size_t>(e.second)].push_back(e.first);
    }
    for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
    return adj;
}

namespace {

SnapshotGraph finish_snapshot(int index_1based, std::set<std::pair<int, int>>&& edge_set) {
    SnapshotGraph s;
    s.index = index_1based;
    s.edges.assign(edge_set.begin(), edge_set.end());
    std::set<int> verts;
    for (const auto& e : s.edges) {
        verts.insert(e.first);
        verts.insert(e.second);
    }
    s.vertices.assign(verts.begin(), verts.end());
    return s;
}

}  // namespace

DynamicGraph build_snapshots(const std::vector<InteractionRecord>& records, int T,
                             int window_count) {
    if (records.empty()) throw Error("cannot build snapshots from an empty log");
    if (T < 1) throw Error("snapshot count must be >= 1, got " + std::to_string(T));
    if (window_count < 1 || (window_count != 1 && T % window_count != 0))
        throw Error("window count " + std::to_string(window_count) + " does not divide T=" +
                    std::to_string(T));

    std::set<std::string> ids;
    std::set<std::int64_t> distinct_ts;
    std::int64_t min_ts = records[0].timestamp, max_ts = records[0].timestamp;
    for (const auto& r : records) {
        ids.insert(user_vertex(r.user_id));
        ids.insert(item_vertex(r.item_id));
        distinct_ts.insert(r.timestamp);
        min_ts = std::min(min_ts, r.timestamp);
        max_ts = std::max(max_ts, r.timestamp);
    }
    if (static_cast<size_t>(T) > distinct_ts.size())
        log_warn("requested " + std::to_string(T) + " snapshots but the log has only " +
                 std::to_string(distinct_ts.size()) + " distinct timestamps; partition is degenerate");

    std::vector<std::string> universe(ids.begin(), ids.end());
    auto index_of = [&universe](const std::string& id) {
        return static_cast<int>(std::lower_bound(universe.begin(), universe.end(), id) -
                                universe.begin());
    };

    std::int64_t span = max_ts - min_ts;
    auto interval_of = [&](std::int64_t ts) {
        if (ts == max_ts) return T - 1;  // last interval is closed
        return static_cast<int>(((ts - min_ts) * T) / span);
    };

    std::vector<std::set<std::pair<int, int>>> buckets(static_cast<size_t>(T));
    for (const auto& r : records) {
        int u = index_of(user_vertex(r.user_id));
        int v = index_of(item_vertex(r.item_id));
        buckets[static_cast<size_t>(interval_of(r.timestamp))].insert(
            {std::min(u, v), std::max(u, v)});
    }

    std::vector<SnapshotGraph> snaps;
    snaps.reserve(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t) snaps.push_back(finish_snapshot(t + 1, std::move(buckets[t])));

    std::vector<std::int64_t> bounds;
    bounds.reserve(static_cast<size_t>(T) + 1);
    for (int j = 0; j <= T; ++j) bounds.push_back(min_ts + (span * j) / T);

    return DynamicGraph(std::move(universe), std::move(snaps), std::move(bounds));
}

DegreeTable degree_series(const DynamicGraph& g) {
    DegreeTable table;
    table.snapshots = g.snapshot_count();
    table.per_vertex.assign(static_cast<size_t>(g.vertex_count()),
                            std::vector<int>(static_cast<size_t>(g.snapshot_count()), 0));
    for (int t = 1; t <= g.snapshot_count(); ++t) {
        for (const auto& e : g.snapshot(t).edges) {
            table.per_vertex[static_cast<size_t>(e.first)][static_cast<size_t>(t - 1)] += 1;
            table.per_vertex[static_cast<size_t>(e.second)][static_cast<size_t>(t - 1)] += 1;
        }
    }
    return table;
}

void write_snapshot_dump(const DynamicGraph& g, const std::string& edges_path,
                         const std::string& manifest_path) {
    std::ostringstream edges;
    for (int t = 1; t <= g.snapshot_count(); ++t)
        for (const auto& e : g.snapshot(t).edges)
            edges << t << '\t' << g.vertex_id(e.first) << '\t' << g.vertex_id(e.second) << '\n';
    write_text_file(edges_path, edges.str());

    std::ostringstream man;
    man << "snapshots=" << g.snapshot_count() << '\n';
    man << "vertices=" << g.vertex_count() << '\n';
    man << "edges=" << g.edge_total() << '\n';
    const auto& b = g.boundaries();
    man << "boundaries=";
    for (size_t i = 0; i < b.size(); ++i) man << (i ? "," : "") << b[i];
    man << '\n';
    write_text_file(manifest_path, man.str());
}

DynamicGraph read_snapshot_dump(const std::string& edges_path, const std::string& manifest_path) {
    int T = -1;
    long expect_vertices = -1, expect_edges = -1;
    std::vector<std::int64_t> bounds;
    {
        std::istringstream in(read_text_file(manifest_path));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos) throw Error("manifest line missing '=': " + line);
            std::string key = line.substr(0, eq), val = line.substr(eq + 1);
            if (key == "snapshots") T = std::stoi(val);
            else if (key == "vertices") expect_vertices = std::stol(val);
            else if (key == "edges") expect_edges = std::stol(val);
            else if (key == "boundaries")
                for (const auto& tok : split(val, ','))
                    if (!tok.empty()) bounds.push_back(std::stoll(tok));
        }
    }
    if (T < 1) throw Error("manifest missing snapshot count");

    struct RawEdge {
        int t;
        std::string u, v;
    };
    std::vector<RawEdge> raw;
    std::set<std::string> ids;
    {
        std::istringstream in(read_text_file(edges_path));
        std::string line;
        size_t ln = 0;
        while (std::getline(in, line)) {
            ++ln;
            if (line.empty()) continue;
            auto fields = split(line, '\t');
            if (fields.size() != 3 || !is_integer(fields[0]))
                throw Error("malformed snapshot dump line " + std::to_string(ln));
            RawEdge e{std::stoi(fields[0]), fields[1], fields[2]};
            if (e.t < 1 || e.t > T)
                throw Error("snapshot dump line " + std::to_string(ln) + ": index out of range");
            ids.insert(e.u);
            ids.insert(e.v);
            raw.push_back(std::move(e));
        }
    }

    std::vector<std::string> universe(ids.begin(), ids.end());
    auto index_of = [&universe](const std::string& id) {
        return static_cast<int>(std::lower_bound(universe.begin(), universe.end(), id) -
                                universe.begin());
    };
    std::vector<std::set<std::pair<int, int>>> buckets(static_cast<size_t>(T));
    for (const auto& e : raw) {
        int u = index_of(e.u), v = index_of(e.v);
        buckets[static_cast<size_t>(e.t - 1)].insert({std::min(u, v), std::max(u, v)});
    }
    std::vector<SnapshotGraph> snaps;
    for (int t = 0; t < T; ++t) snaps.push_back(finish_snapshot(t + 1, std::move(buckets[t])));

    DynamicGraph g(std::move(universe), std::move(snaps), std::move(bounds));
    if (expect_vertices >= 0 && expect_vertices != g.vertex_count())
        throw Error("snapshot dump vertex count mismatch vs manifest");
    if (expect_edges >= 0 && static_cast<std::size_t>(expect_edges) != g.edge_total())
        throw Error("snapshot dump edge count mismatch vs manifest");
    return g;
}

}  // namespace dgfair
