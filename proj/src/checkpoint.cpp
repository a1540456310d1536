#include "dgfair/checkpoint.hpp"

#include <cstdint>
#include <fstream>

#include "dgfair/util.hpp"

namespace dgfair {
namespace {

constexpr char kMagic[8] = {'D', 'G', 'E', 'C', 'K', 'P', 'T', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_i64(std::ostream& out, std::int64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_str(std::ostream& out, const std::string& s) {
    put_u64(out, s.size());
    out.write(s.data(), (std::streamsize)s.size());
}

void put_doubles(std::ostream& out, const std::vector<double>& v) {
    put_u64(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              (std::streamsize)(v.size() * sizeof(double)));
}

void put_mat(std::ostream& out, const Mat& m) {
    put_i64(out, m.rows);
    put_i64(out, m.cols);
    put_doubles(out, m.d);
}

struct Reader {
    std::ifstream in;
    std::string path;

    explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
        if (!in) throw Error("cannot open checkpoint: " + p);
    }

    void fail() { throw Error("corrupt checkpoint: " + path); }

    std::uint64_t u64() {
        std::uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        if (!in) fail();
        return v;
    }

    std::int64_t i64() {
        std::int64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        if (!in) fail();
        return v;
    }

    std::string str() {
        std::uint64_t len = u64();
        if (len > (1ull << 32)) fail();
        std::string s(len, '\0');
        in.read(s.data(), (std::streamsize)len);
        if (!in) fail();
        return s;
    }

    std::vector<double> doubles() {
        std::uint64_t len = u64();
        if (len > (1ull << 32)) fail();
        std::vector<double> v(len);
        in.read(reinterpret_cast<char*>(v.data()),
                (std::streamsize)(len * sizeof(double)));
        if (!in) fail();
        return v;
    }

    Mat mat() {
        int rows = (int)i64();
        int cols = (int)i64();
        std::vector<double> d = doubles();
        if (rows < 0 || cols < 0 || d.size() != (size_t)rows * (size_t)cols) fail();
        return Mat(rows, cols, std::move(d));
    }
};

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof kMagic);

    put_u64(out, ck.config.size());
    for (const auto& [k, v] : ck.config) {
        put_str(out, k);
        put_str(out, v);
    }
    put_u64(out, ck.seed);
    put_i64(out, ck.epochs_done);
    put_i64(out, ck.converged_epoch);
    put_u64(out, ck.plugin_mode ? 1 : 0);
    put_str(out, ck.rng_state);

    put_u64(out, ck.trace.size());
    for (const EpochRecord& r : ck.trace) {
        double vals[6] = {r.total, r.ds, r.cls, r.contrast, r.fair, r.monitor};
        out.write(reinterpret_cast<const char*>(vals), sizeof vals);
    }

    const nn::ParamStore& ps = ck.params;
    put_u64(out, ps.names.size());
    for (size_t i = 0; i < ps.names.size(); ++i) {
        put_str(out, ps.names[i]);
        put_mat(out, ps.values[i]);
        put_mat(out, ps.adam_m[i]);
        put_mat(out, ps.adam_v[i]);
    }
    put_i64(out, ps.adam_step);
    if (!out) throw Error("cannot write checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    Reader r(path);
    char magic[8];
    r.in.read(magic, sizeof magic);
    if (!r.in || std::string(magic, 8) != std::string(kMagic, 8))
        throw Error("not a checkpoint file: " + path);

    Checkpoint ck;
    std::uint64_t n_cfg = r.u64();
    for (std::uint64_t i = 0; i < n_cfg; ++i) {
        std::string k = r.str();
        std::string v = r.str();
        ck.config.emplace_back(std::move(k), std::move(v));
    }
    ck.seed = (unsigned long)r.u64();
    ck.epochs_done = (int)r.i64();
    ck.converged_epoch = (int)r.i64();
    ck.plugin_mode = r.u64() != 0;
    ck.rng_state = r.str();

    std::uint64_t n_trace = r.u64();
    for (std::uint64_t i = 0; i < n_trace; ++i) {
        double vals[6];
        r.in.read(reinterpret_cast<char*>(vals), sizeof vals);
        if (!r.in) r.fail();
        ck.trace.push_back({vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]});
    }

    std::uint64_t n_params = r.u64();
    for (std::uint64_t i = 0; i < n_params; ++i) {
        ck.params.names.push_back(r.str());
        ck.params.values.push_back(r.mat());
        ck.params.adam_m.push_back(r.mat());
        ck.params.adam_v.push_back(r.mat());
    }
    ck.params.adam_step = (long)r.i64();
    return ck;
}

}  // namespace dgfair
