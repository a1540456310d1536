#pragma once

#include <random>
#include <vector>

#include "dgfair/autodiff.hpp"
#include "dgfair/nn.hpp"
#include "dgfair/tensor.hpp"

namespace dgfair {

struct TrendEncoderConfig {
    int dim = 64;
    int gru_layers = 3;
    bool log1p_input = false;  // optional compression of raw degree counts
};

// Duplicate a T-length series across dim columns (T x 1 -> T x dim).
Mat expand_series(const std::vector<double>& series, int dim);

// Stack-then-mean fusion of two equal-width embeddings.
std::vector<double> fuse_stack_mean(const std::vector<double>& a, const std::vector<double>& b);

// Pre-pooling convolution used by the per-series API and shape tests:
// single input channel, dim output channels, width-3 kernel, zero padding
// keeps the output length at T. kernel is 3 x dim, bias 1 x dim.
Mat conv_channels(const std::vector<double>& series, const Mat& kernel, const Mat& bias);

// Degree-trend encoder: a GRU stack over the expanded series (long-term
// view, final hidden state) and a width-3 convolution with temporal mean
// pooling (short-term view), fused by stack-mean.
class TrendEncoder {
public:
    TrendEncoder(const TrendEncoderConfig& cfg, nn::ParamStore& ps, std::mt19937_64& rng);

    // Batched paths. series is N x T of raw degree counts; the log1p switch
    // is applied here so callers always pass raw counts.
    ad::Var encode_long(ad::Tape& t, const Mat& series, const nn::BoundParams& bp) const;
    ad::Var encode_short(ad::Tape& t, const Mat& series, const nn::BoundParams& bp) const;
    ad::Var encode(ad::Tape& t, const Mat& series, const nn::BoundParams& bp) const;

    // Per-series conveniences running a throwaway tape.
    std::vector<double> encode_long_term(const std::vector<double>& series,
                                         const nn::ParamStore& ps) const;
    std::vector<double> encode_short_term(const std::vector<double>& series,
                                          const nn::ParamStore& ps) const;

    const TrendEncoderConfig& config() const { return cfg_; }
    int conv_kernel_id() const { return conv_K_; }
    int conv_bias_id() const { return conv_b_; }
    const nn::GruStack& gru() const { return gru_; }

private:
    Mat prepare(const Mat& series) const;

    TrendEncoderConfig cfg_;
    nn::GruStack gru_;
    int conv_K_ = -1;  // 3 x dim
    int conv_b_ = -1;  // 1 x dim
};

}  // namespace dgfair
