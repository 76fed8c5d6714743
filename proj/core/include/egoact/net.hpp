#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "egoact/geometry.hpp"

namespace egoact {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct NetConfig {
    int input_dim = 93;
    int model_dim = 42;
    int seq_len = kDefaultSeqLen;
    int num_layers = 2;
    int num_heads = 6;
    int mlp_hidden_dim = 42;
    int num_classes = 36;
    double dropout = 0.2;
    bool use_cls_token = true;
    bool use_pos_embedding = true;

    static NetConfig h2o();
    static NetConfig fpha();

    int num_tokens() const noexcept { return seq_len + (use_cls_token ? 1 : 0); }
    int head_dim() const noexcept { return model_dim / num_heads; }
    void validate() const;

    friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

// Weights are stored (in x out) so a row of activations multiplies from the left.
// Bias and norm vectors are 1 x n matrices.
template <typename T>
struct EncoderLayerParams {
    Matrix<T> norm1_scale, norm1_shift;
    Matrix<T> query_weight, query_bias;
    Matrix<T> key_weight, key_bias;
    Matrix<T> value_weight, value_bias;
    Matrix<T> out_weight, out_bias;
    Matrix<T> norm2_scale, norm2_shift;
    Matrix<T> mlp1_weight, mlp1_bias;
    Matrix<T> mlp2_weight, mlp2_bias;
};

template <typename T>
struct ClassifierParams {
    NetConfig config;
    Matrix<T> input_weight, input_bias;
    Matrix<T> cls_token;     // empty when !use_cls_token
    Matrix<T> pos_embedding; // empty when !use_pos_embedding
    std::vector<EncoderLayerParams<T>> layers;
    Matrix<T> final_norm_scale, final_norm_shift;
    Matrix<T> head_weight, head_bias;

    // Bumped on every in-place update so stale forward caches can be detected.
    std::uint64_t version = 0;
};

// Gradients share the parameter shape tree.
template <typename T>
using Gradients = ClassifierParams<T>;

// Visits every learnable tensor in a fixed order with a stable dotted name.
// Works on const and mutable params alike.
template <typename P, typename Fn>
void for_each_tensor(P& params, Fn&& fn) {
    fn(std::string("input.weight"), params.input_weight);
    fn(std::string("input.bias"), params.input_bias);
    if (params.config.use_cls_token) fn(std::string("cls_token"), params.cls_token);
    if (params.config.use_pos_embedding) fn(std::string("pos_embedding"), params.pos_embedding);
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        auto& l = params.layers[i];
        const std::string p = "layers." + std::to_string(i) + ".";
        fn(p + "norm1.scale", l.norm1_scale);
        fn(p + "norm1.shift", l.norm1_shift);
        fn(p + "attn.query.weight", l.query_weight);
        fn(p + "attn.query.bias", l.query_bias);
        fn(p + "attn.key.weight", l.key_weight);
        fn(p + "attn.key.bias", l.key_bias);
        fn(p + "attn.value.weight", l.value_weight);
        fn(p + "attn.value.bias", l.value_bias);
        fn(p + "attn.out.weight", l.out_weight);
        fn(p + "attn.out.bias", l.out_bias);
        fn(p + "norm2.scale", l.norm2_scale);
        fn(p + "norm2.shift", l.norm2_shift);
        fn(p + "mlp.fc1.weight", l.mlp1_weight);
        fn(p + "mlp.fc1.bias", l.mlp1_bias);
        fn(p + "mlp.fc2.weight", l.mlp2_weight);
        fn(p + "mlp.fc2.bias", l.mlp2_bias);
    }
    fn(std::string("final_norm.scale"), params.final_norm_scale);
    fn(std::string("final_norm.shift"), params.final_norm_shift);
    fn(std::string("head.weight"), params.head_weight);
    fn(std::string("head.bias"), params.head_bias);
}

std::int64_t param_count(const NetConfig& cfg);

// All tensors allocated with the right shapes and set to zero.
template <typename T>
ClassifierParams<T> zero_params(const NetConfig& cfg);

// Truncated normal(0, 0.02) weights, zero biases, unit norm scales.
ClassifierParams<float> init_params(const NetConfig& cfg, std::uint64_t seed);

template <typename To, typename From>
ClassifierParams<To> cast_params(const ClassifierParams<From>& src) {
    ClassifierParams<To> dst = zero_params<To>(src.config);
    std::vector<const Matrix<From>*> from;
    for_each_tensor(src, [&](const std::string&, const Matrix<From>& m) { from.push_back(&m); });
    std::size_t i = 0;
    for_each_tensor(dst, [&](const std::string&, Matrix<To>& m) { m = from[i++]->template cast<To>(); });
    dst.version = src.version;
    return dst;
}

enum class RunMode { Eval, Train };

struct ForwardOptions {
    RunMode mode = RunMode::Eval;
    std::uint64_t dropout_seed = 0;
};

template <typename T>
struct NormCache {
    Matrix<T> xhat;
    Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std;
};

template <typename T>
struct LayerCache {
    Matrix<T> input;
    NormCache<T> norm1;
    Matrix<T> normed1;
    Matrix<T> q, k, v;
    std::vector<Matrix<T>> probs;      // per head, softmax of scores
    std::vector<Matrix<T>> probs_mask; // per head; empty when dropout inactive
    Matrix<T> attn;                    // concatenated head outputs
    Matrix<T> attn_out_mask;
    Matrix<T> mid; // residual stream after attention
    NormCache<T> norm2;
    Matrix<T> normed2;
    Matrix<T> hidden_pre; // before GELU
    Matrix<T> hidden;     // after GELU
    Matrix<T> mlp_out_mask;
};

template <typename T>
struct ForwardCache {
    Matrix<T> input; // N x D
    Matrix<T> tokens;
    std::vector<LayerCache<T>> layers;
    Matrix<T> encoded; // output of last layer
    Matrix<T> pooled;  // 1 x d, before final norm
    NormCache<T> final_norm;
    Matrix<T> pooled_normed;
    Matrix<T> logits; // 1 x C
    const void* owner = nullptr;
    std::uint64_t version = 0;
};

template <typename T>
ForwardCache<T> forward(const ClassifierParams<T>& params, const Matrix<T>& input, const ForwardOptions& opts = {});

template <typename T>
ForwardCache<T> forward(const ClassifierParams<T>& params, const SequenceTensor& seq, const ForwardOptions& opts = {});

// Adds d-loss/d-params into `grads`. Throws when the cache was produced for a
// different parameter set or an older version of this one.
template <typename T>
void backward_accumulate(const ClassifierParams<T>& params, const ForwardCache<T>& cache,
                         const Eigen::Matrix<T, 1, Eigen::Dynamic>& upstream, Gradients<T>& grads);

template <typename T>
Gradients<T> backward(const ClassifierParams<T>& params, const ForwardCache<T>& cache,
                      const Eigen::Matrix<T, 1, Eigen::Dynamic>& upstream);

// Eval-mode logits as floats.
std::vector<float> predict_logits(const ClassifierParams<float>& params, const SequenceTensor& seq);
int predict_label(const ClassifierParams<float>& params, const SequenceTensor& seq);

Matrix<float> to_matrix(const SequenceTensor& seq);

} // namespace egoact
