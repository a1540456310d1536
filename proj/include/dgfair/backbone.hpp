#pragma once

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dgfair/autodiff.hpp"
#include "dgfair/nn.hpp"

namespace dgfair {

struct BackboneConfig {
    int dim = 64;
    int gnn_layers = 2;
    int gru_layers = 1;  // recurrence over the snapshot sequence
};

// Per-snapshot propagation operators over a fixed row set. Rows without any
// edge in a snapshot still carry a self-loop, so they propagate themselves.
struct SnapshotOperators {
    int n_rows = 0;
    std::vector<kernels::Csr> norm_adj;

    // edges are undirected (lo, hi) index pairs per snapshot, indices < n_rows.
    static SnapshotOperators build(const std::vector<std::vector<std::pair<int, int>>>& edges,
                                   int n_rows);
};

// Structural encoder turning per-snapshot propagation plus free vertex
// features into one embedding per vertex.
class Backbone {
public:
    virtual ~Backbone() = default;
    virtual void init_params(nn::ParamStore& ps, std::mt19937_64& rng) = 0;
    virtual ad::Var forward(ad::Tape& t, const SnapshotOperators& ops, ad::Var features,
                            const nn::BoundParams& bp) const = 0;
    virtual std::string name() const = 0;
};

using BackboneFactory =
    std::function<std::unique_ptr<Backbone>(const BackboneConfig&)>;

// Registry. "gcn_gru" (graph convolutions per snapshot, recurrence across
// snapshots) is the default; "gcn_static" encodes the last snapshot only.
void register_backbone(const std::string& name, BackboneFactory factory);
std::unique_ptr<Backbone> make_backbone(const std::string& name, const BackboneConfig& cfg);
std::vector<std::string> registered_backbones();

}  // namespace dgfair
