#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "dgfair/evolution_labeler.hpp"
#include "dgfair/graph_store.hpp"

namespace dgfair {

// Bipartite interaction-log generator with planted evolution classes.
// Degree schedules per class: FaT vertices keep small fluctuating degrees,
// T2H vertices ramp from below theta to above it, SfH vertices stay above
// theta throughout (head magnitudes drawn from a power law). Edges are wired
// per snapshot by matching degree stubs between the two sides, biased toward
// same-community pairs so the graphs carry learnable structure.
struct SyntheticSpec {
    int vertices = 5000;
    int snapshots = 6;
    double ratio_fat = 0.9067;
    double ratio_t2h = 0.0702;
    double ratio_sfh = 0.0231;
    double exponent = 2.5;       // power-law exponent for head degrees
    int edges_per_snapshot = 0;  // 0 = let the schedules decide; else approximate target
    int theta = 10;              // head/tail boundary the schedules are built around
    int communities = 4;
    double affinity = 0.8;       // probability a stub prefers its own community
};

struct SyntheticData {
    std::vector<InteractionRecord> records;
    std::vector<std::string> vertex_ids;      // sorted, matches build_snapshots universe
    std::vector<EvolutionLabel> planted;      // aligned with vertex_ids
    int interval_width = 0;                   // timestamp span of one snapshot
};

SyntheticData generate_synthetic(const SyntheticSpec& spec, unsigned long seed);

// Share of each label among the planted assignment.
std::map<EvolutionLabel, double> planted_ratios(const SyntheticData& data);

}  // namespace dgfair
