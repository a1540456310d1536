#include "dgfair/nn.hpp"

#include <cmath>

namespace dgfair::nn {

int ParamStore::add(const std::string& name, int rows, int cols, double range,
                    std::mt19937_64& rng) {
    if (find(name) >= 0) throw Error("parameter already registered: " + name);
    names.push_back(name);
    values.push_back(Mat::uniform(rows, cols, range, rng));
    adam_m.emplace_back(rows, cols);
    adam_v.emplace_back(rows, cols);
    return static_cast<int>(values.size()) - 1;
}

int ParamStore::find(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

size_t ParamStore::scalar_count() const {
    size_t n = 0;
    for (const auto& v : values) n += v.d.size();
    return n;
}

void adam_step(ParamStore& ps, const std::vector<Mat>& grads, const AdamConfig& cfg) {
    if (grads.size() != ps.values.size()) throw Error("adam_step: gradient count mismatch");
    ps.adam_step += 1;
    double t = static_cast<double>(ps.adam_step);
    double bc1 = 1.0 - std::pow(cfg.beta1, t);
    double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (size_t p = 0; p < ps.values.size(); ++p) {
        Mat& val = ps.values[p];
        Mat& m = ps.adam_m[p];
        Mat& v = ps.adam_v[p];
        const Mat& g = grads[p];
        for (size_t i = 0; i < val.d.size(); ++i) {
            m.d[i] = cfg.beta1 * m.d[i] + (1.0 - cfg.beta1) * g.d[i];
            v.d[i] = cfg.beta2 * v.d[i] + (1.0 - cfg.beta2) * g.d[i] * g.d[i];
            double mhat = m.d[i] / bc1;
            double vhat = v.d[i] / bc2;
            val.d[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

BoundParams bind(ad::Tape& tape, const ParamStore& ps) {
    BoundParams bp;
    bp.vars.reserve(ps.values.size());
    for (const auto& v : ps.values) bp.vars.push_back(tape.leaf(v));
    return bp;
}

std::vector<Mat> collect_grads(const ad::Tape& tape, const BoundParams& bp) {
    std::vector<Mat> out;
    out.reserve(bp.vars.size());
    for (auto v : bp.vars) out.push_back(tape.grad_or_zero(v));
    return out;
}

void GruStack::init(ParamStore& ps, const std::string& prefix, int n_layers, int in, int hid,
                    std::mt19937_64& rng) {
    in_dim = in;
    hidden = hid;
    layers.clear();
    double range = 1.0 / std::sqrt(static_cast<double>(hid));
    for (int l = 0; l < n_layers; ++l) {
        int lin = (l == 0) ? in : hid;
        std::string p = prefix + ".l" + std::to_string(l) + ".";
        Layer ly;
        ly.Wr = ps.add(p + "Wr", lin, hid, range, rng);
        ly.Wz = ps.add(p + "Wz", lin, hid, range, rng);
        ly.Wn = ps.add(p + "Wn", lin, hid, range, rng);
        ly.Ur = ps.add(p + "Ur", hid, hid, range, rng);
        ly.Uz = ps.add(p + "Uz", hid, hid, range, rng);
        ly.Un = ps.add(p + "Un", hid, hid, range, rng);
        ly.br = ps.add(p + "br", 1, hid, range, rng);
        ly.bz = ps.add(p + "bz", 1, hid, range, rng);
        ly.bn = ps.add(p + "bn", 1, hid, range, rng);
        ly.cr = ps.add(p + "cr", 1, hid, range, rng);
        ly.cz = ps.add(p + "cz", 1, hid, range, rng);
        ly.cn = ps.add(p + "cn", 1, hid, range, rng);
        layers.push_back(ly);
    }
}

ad::Var GruStack::forward(ad::Tape& t, const std::vector<ad::Var>& seq,
                          const BoundParams& bp) const {
    if (seq.empty()) throw Error("GruStack: empty sequence");
    int n_rows = t.value(seq[0]).rows;
    std::vector<ad::Var> below = seq;
    ad::Var last_hidden;
    for (const Layer& ly : layers) {
        ad::Var h = t.constant(Mat(n_rows, hidden));
        std::vector<ad::Var> outputs;
        outputs.reserve(below.size());
        for (ad::Var x : below) {
            ad::Var r = t.sigmoid(t.add(t.add_rowvec(t.matmul(x, bp[ly.Wr]), bp[ly.br]),
                                        t.add_rowvec(t.matmul(h, bp[ly.Ur]), bp[ly.cr])));
            ad::Var z = t.sigmoid(t.add(t.add_rowvec(t.matmul(x, bp[ly.Wz]), bp[ly.bz]),
                                        t.add_rowvec(t.matmul(h, bp[ly.Uz]), bp[ly.cz])));
            ad::Var hn = t.add_rowvec(t.matmul(h, bp[ly.Un]), bp[ly.cn]);
            ad::Var n = t.tanh_(t.add(t.add_rowvec(t.matmul(x, bp[ly.Wn]), bp[ly.bn]),
                                      t.mul(r, hn)));
            h = t.add(t.mul(t.affine(z, -1.0, 1.0), n), t.mul(z, h));
            outputs.push_back(h);
        }
        below = std::move(outputs);
        last_hidden = h;
    }
    return last_hidden;
}

void Linear::init(ParamStore& ps, const std::string& prefix, int in, int out, bool bias,
                  std::mt19937_64& rng) {
    double range = 1.0 / std::sqrt(static_cast<double>(in));
    W = ps.add(prefix + ".W", in, out, range, rng);
    b = bias ? ps.add(prefix + ".b", 1, out, range, rng) : -1;
}

ad::Var Linear::forward(ad::Tape& t, ad::Var x, const BoundParams& bp) const {
    ad::Var y = t.matmul(x, bp[W]);
    if (b >= 0) y = t.add_rowvec(y, bp[b]);
    return y;
}

}  // namespace dgfair::nn
