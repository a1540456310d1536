#include "dgfair/backbone.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace dgfair {

SnapshotOperators SnapshotOperators::build(
    const std::vector<std::vector<std::pair<int, int>>>& edges, int n_rows) {
    SnapshotOperators ops;
    ops.n_rows = n_rows;
    for (const auto& snap : edges) {
        std::vector<std::vector<std::pair<int, double>>> rows(static_cast<size_t>(n_rows));
        std::vector<double> deg(static_cast<size_t>(n_rows), 1.0);  // self-loop
        for (const auto& e : snap) {
            if (e.first < 0 || e.second >= n_rows) throw Error("snapshot edge index out of range");
            deg[static_cast<size_t>(e.first)] += 1.0;
            deg[static_cast<size_t>(e.second)] += 1.0;
        }
        for (const auto& e : snap) {
            double w = 1.0 / std::sqrt(deg[static_cast<size_t>(e.first)] *
                                       deg[static_cast<size_t>(e.second)]);
            rows[static_cast<size_t>(e.first)].push_back({e.second, w});
            rows[static_cast<size_t>(e.second)].push_back({e.first, w});
        }
        for (int v = 0; v < n_rows; ++v)
            rows[static_cast<size_t>(v)].push_back({v, 1.0 / deg[static_cast<size_t>(v)]});

        kernels::Csr csr;
        csr.n = n_rows;
        csr.ptr.resize(static_cast<size_t>(n_rows) + 1, 0);
        for (int v = 0; v < n_rows; ++v) {
            auto& r = rows[static_cast<size_t>(v)];
            std::sort(r.begin(), r.end());
            csr.ptr[static_cast<size_t>(v) + 1] =
                csr.ptr[static_cast<size_t>(v)] + static_cast<int>(r.size());
            for (const auto& [col, w] : r) {
                csr.idx.push_back(col);
                csr.val.push_back(w);
            }
        }
        ops.norm_adj.push_back(std::move(csr));
    }
    return ops;
}

namespace {

// Shared GCN trunk: gnn_layers rounds of propagate-then-transform with a
// rectifier between layers and identity after the last one.
struct GcnLayers {
    std::vector<int> W;
    void init(nn::ParamStore& ps, const std::string& prefix, int dim, int layers,
              std::mt19937_64& rng) {
        double range = 1.0 / std::sqrt(static_cast<double>(dim));
        for (int l = 0; l < layers; ++l)
            W.push_back(ps.add(prefix + ".W" + std::to_string(l), dim, dim, range, rng));
    }
    ad::Var forward(ad::Tape& t, const kernels::Csr* adj, ad::Var h,
                    const nn::BoundParams& bp) const {
        for (size_t l = 0; l < W.size(); ++l) {
            h = t.matmul(t.sym_spmm(adj, h), bp[W[l]]);
            if (l + 1 < W.size()) h = t.relu(h);
        }
        return h;
    }
};

class GcnGruBackbone : public Backbone {
public:
    explicit GcnGruBackbone(const BackboneConfig& cfg) : cfg_(cfg) {}

    void init_params(nn::ParamStore& ps, std::mt19937_64& rng) override {
        gcn_.init(ps, "backbone.gcn", cfg_.dim, cfg_.gnn_layers, rng);
        gru_.init(ps, "backbone.gru", cfg_.gru_layers, cfg_.dim, cfg_.dim, rng);
    }

    ad::Var forward(ad::Tape& t, const SnapshotOperators& ops, ad::Var features,
                    const nn::BoundParams& bp) const override {
        if (ops.norm_adj.empty()) throw Error("backbone: no snapshots to encode");
        std::vector<ad::Var> seq;
        seq.reserve(ops.norm_adj.size());
        for (const auto& adj : ops.norm_adj) seq.push_back(gcn_.forward(t, &adj, features, bp));
        return gru_.forward(t, seq, bp);
    }

    std::string name() const override { return "gcn_gru"; }

private:
    BackboneConfig cfg_;
    GcnLayers gcn_;
    nn::GruStack gru_;
};

class GcnStaticBackbone : public Backbone {
public:
    explicit GcnStaticBackbone(const BackboneConfig& cfg) : cfg_(cfg) {}

    void init_params(nn::ParamStore& ps, std::mt19937_64& rng) override {
        gcn_.init(ps, "backbone.gcn", cfg_.dim, cfg_.gnn_layers, rng);
    }

    ad::Var forward(ad::Tape& t, const SnapshotOperators& ops, ad::Var features,
                    const nn::BoundParams& bp) const override {
        if (ops.norm_adj.empty()) throw Error("backbone: no snapshots to encode");
        return gcn_.forward(t, &ops.norm_adj.back(), features, bp);
    }

    std::string name() const override { return "gcn_static"; }

private:
    BackboneConfig cfg_;
    GcnLayers gcn_;
};

std::map<std::string, BackboneFactory>& registry() {
    static std::map<std::string, BackboneFactory> reg = [] {
        std::map<std::string, BackboneFactory> r;
        r["gcn_gru"] = [](const BackboneConfig& c) -> std::unique_ptr<Backbone> {
            return std::make_unique<GcnGruBackbone>(c);
        };
        r["gcn_static"] = [](const BackboneConfig& c) -> std::unique_ptr<Backbone> {
            return std::make_unique<GcnStaticBackbone>(c);
        };
        return r;
    }();
    return reg;
}

}  // namespace

void register_backbone(const std::string& name, BackboneFactory factory) {
    auto& reg = registry();
    if (reg.count(name)) throw Error("backbone already registered: " + name);
    reg[name] = std::move(factory);
}

std::unique_ptr<Backbone> make_backbone(const std::string& name, const BackboneConfig& cfg) {
    auto& reg = registry();
    auto it = reg.find(name);
    if (it == reg.end()) throw Error("unknown backbone: " + name);
    return it->second(cfg);
}

std::vector<std::string> registered_backbones() {
    std::vector<std::string> names;
    for (const auto& [name, _] : registry()) names.push_back(name);
    return names;
}

}  // namespace dgfair
