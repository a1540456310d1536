#pragma once

#include <random>
#include <string>
#include <vector>

#include "dgfair/autodiff.hpp"
#include "dgfair/tensor.hpp"

namespace dgfair::nn {

// Named parameter tensors plus Adam moment estimates. Creation order is the
// canonical order used for tape binding, gradients and checkpoints.
struct ParamStore {
    std::vector<std::string> names;
    std::vector<Mat> values;
    std::vector<Mat> adam_m, adam_v;
    long adam_step = 0;

    int add(const std::string& name, int rows, int cols, double range, std::mt19937_64& rng);
    int find(const std::string& name) const;  // -1 when absent
    size_t scalar_count() const;
};

struct AdamConfig {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

void adam_step(ParamStore& ps, const std::vector<Mat>& grads, const AdamConfig& cfg);

// One tape's view of the store: leaf vars aligned with ParamStore order.
struct BoundParams {
    std::vector<ad::Var> vars;
    ad::Var operator[](int id) const { return vars[static_cast<size_t>(id)]; }
};

BoundParams bind(ad::Tape& tape, const ParamStore& ps);
std::vector<Mat> collect_grads(const ad::Tape& tape, const BoundParams& bp);

// Gated recurrent unit stack. Gate equations follow the common convention:
//   r = sig(x Wr + br + h Ur + cr)
//   z = sig(x Wz + bz + h Uz + cz)
//   n = tanh(x Wn + bn + r * (h Un + cn))
//   h' = (1 - z) * n + z * h
// Weights initialize uniform in [-1/sqrt(hidden), 1/sqrt(hidden)].
struct GruStack {
    struct Layer {
        int Wr, Wz, Wn, Ur, Uz, Un;  // param ids
        int br, bz, bn, cr, cz, cn;
    };
    int in_dim = 0;
    int hidden = 0;
    std::vector<Layer> layers;

    void init(ParamStore& ps, const std::string& prefix, int n_layers, int in, int hid,
              std::mt19937_64& rng);

    // seq holds T step inputs, each N x in_dim. Returns the final hidden state
    // of the top layer (N x hidden).
    ad::Var forward(ad::Tape& t, const std::vector<ad::Var>& seq, const BoundParams& bp) const;
};

struct Linear {
    int W = -1;  // in x out
    int b = -1;  // 1 x out, absent when bias disabled
    void init(ParamStore& ps, const std::string& prefix, int in, int out, bool bias,
              std::mt19937_64& rng);
    ad::Var forward(ad::Tape& t, ad::Var x, const BoundParams& bp) const;
};

}  // namespace dgfair::nn
