#include "dgfair/trend_encoder.hpp"

#include <cmath>

namespace dgfair {

Mat expand_series(const std::vector<double>& series, int dim) {
    if (dim < 1) throw Error("expand_series: dim must be >= 1");
    Mat out(static_cast<int>(series.size()), dim);
    for (int t = 0; t < out.rows; ++t)
        for (int j = 0; j < dim; ++j) out(t, j) = series[static_cast<size_t>(t)];
    return out;
}

std::vector<double> fuse_stack_mean(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw Error("cannot fuse embeddings of widths " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()));
    std::vector<double> out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = 0.5 * (a[i] + b[i]);
    return out;
}

Mat conv_channels(const std::vector<double>& series, const Mat& kernel, const Mat& bias) {
    if (kernel.rows != 3) throw Error("conv_channels: kernel must have width 3");
    if (bias.rows != 1 || bias.cols != kernel.cols)
        throw Error("conv_channels: bias shape mismatch");
    int T = static_cast<int>(series.size());
    Mat out(T, kernel.cols);
    auto at = [&series, T](int t) { return (t < 0 || t >= T) ? 0.0 : series[static_cast<size_t>(t)]; };
    for (int t = 0; t < T; ++t)
        for (int c = 0; c < kernel.cols; ++c) {
            double acc = bias(0, c);
            for (int j = 0; j < 3; ++j) acc += kernel(j, c) * at(t + j - 1);
            out(t, c) = acc;
        }
    return out;
}

TrendEncoder::TrendEncoder(const TrendEncoderConfig& cfg, nn::ParamStore& ps,
                           std::mt19937_64& rng)
    : cfg_(cfg) {
    if (cfg.dim < 1) throw Error("trend encoder dim must be >= 1");
    if (cfg.gru_layers < 1) throw Error("trend encoder needs at least one recurrent layer");
    gru_.init(ps, "trend.gru", cfg.gru_layers, cfg.dim, cfg.dim, rng);
    double range = 1.0 / std::sqrt(3.0);
    conv_K_ = ps.add("trend.conv.K", 3, cfg.dim, range, rng);
    conv_b_ = ps.add("trend.conv.b", 1, cfg.dim, range, rng);
}

Mat TrendEncoder::prepare(const Mat& series) const {
    if (!cfg_.log1p_input) return series;
    Mat out = series;
    for (auto& x : out.d) x = std::log1p(x);
    return out;
}

ad::Var TrendEncoder::encode_long(ad::Tape& t, const Mat& series_raw,
                                  const nn::BoundParams& bp) const {
    Mat series = prepare(series_raw);
    if (series.cols < 1) throw Error("trend encoder: series must span at least one snapshot");
    std::vector<ad::Var> steps;
    steps.reserve(static_cast<size_t>(series.cols));
    for (int step = 0; step < series.cols; ++step) {
        // expand() duplicates the step-t degree across all dim input units
        Mat x(series.rows, cfg_.dim);
        for (int v = 0; v < series.rows; ++v)
            for (int j = 0; j < cfg_.dim; ++j) x(v, j) = series(v, step);
        steps.push_back(t.constant(std::move(x)));
    }
    return gru_.forward(t, steps, bp);
}

ad::Var TrendEncoder::encode_short(ad::Tape& t, const Mat& series_raw,
                                   const nn::BoundParams& bp) const {
    Mat series = prepare(series_raw);
    int T = series.cols;
    if (T < 1) throw Error("trend encoder: series must span at least one snapshot");
    // Mean pooling makes the temporal order of conv outputs irrelevant, so the
    // pooled value reduces to window sums: scaled by 1/T they multiply the
    // kernel rows directly.
    Mat win(series.rows, 3);
    for (int v = 0; v < series.rows; ++v) {
        double total = 0.0;
        for (int s = 0; s < T; ++s) total += series(v, s);
        win(v, 0) = (total - series(v, T - 1)) / T;
        win(v, 1) = total / T;
        win(v, 2) = (total - series(v, 0)) / T;
    }
    return t.add_rowvec(t.matmul(t.constant(std::move(win)), bp[conv_K_]), bp[conv_b_]);
}

ad::Var TrendEncoder::encode(ad::Tape& t, const Mat& series, const nn::BoundParams& bp) const {
    ad::Var sum = t.add(encode_long(t, series, bp), encode_short(t, series, bp));
    return t.affine(sum, 0.5, 0.0);
}

namespace {
std::vector<double> run_single(const TrendEncoder& enc, const std::vector<double>& series,
                               const nn::ParamStore& ps, bool long_path) {
    ad::Tape tape;
    nn::BoundParams bp = nn::bind(tape, ps);
    Mat row(1, static_cast<int>(series.size()));
    for (size_t i = 0; i < series.size(); ++i) row(0, static_cast<int>(i)) = series[i];
    ad::Var out = long_path ? enc.encode_long(tape, row, bp) : enc.encode_short(tape, row, bp);
    return tape.value(out).d;
}
}  // namespace

std::vector<double> TrendEncoder::encode_long_term(const std::vector<double>& series,
                                                   const nn::ParamStore& ps) const {
    return run_single(*this, series, ps, true);
}

std::vector<double> TrendEncoder::encode_short_term(const std::vector<double>& series,
                                                    const nn::ParamStore& ps) const {
    return run_single(*this, series, ps, false);
}

}  // namespace dgfair
