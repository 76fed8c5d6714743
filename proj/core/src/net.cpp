#include "egoact/net.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "egoact/error.hpp"

namespace egoact {

namespace {

constexpr double kNormEps = 1e-5;
constexpr double kInitStd = 0.02;

template <typename T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

template <typename T>
Matrix<T> zeros(int r, int c) {
    return Matrix<T>::Zero(r, c);
}

template <typename T>
Matrix<T> ones(int r, int c) {
    return Matrix<T>::Ones(r, c);
}

template <typename T>
Matrix<T> affine(const Matrix<T>& x, const Matrix<T>& w, const Matrix<T>& b) {
    Matrix<T> y = x * w;
    y.rowwise() += b.row(0);
    return y;
}

template <typename T>
Matrix<T> layer_norm(const Matrix<T>& x, const Matrix<T>& scale, const Matrix<T>& shift, NormCache<T>& cache) {
    const auto rows = x.rows();
    cache.xhat.resize(rows, x.cols());
    cache.inv_std.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const T mean = x.row(r).mean();
        const T var = (x.row(r).array() - mean).square().mean();
        const T inv_std = T(1) / std::sqrt(var + T(kNormEps));
        cache.inv_std(r) = inv_std;
        cache.xhat.row(r) = (x.row(r).array() - mean) * inv_std;
    }
    Matrix<T> y = cache.xhat.array().rowwise() * scale.row(0).array();
    y.rowwise() += shift.row(0);
    return y;
}

template <typename T>
Matrix<T> layer_norm_backward(const Matrix<T>& dy, const Matrix<T>& scale, const NormCache<T>& cache,
                              Matrix<T>& dscale, Matrix<T>& dshift) {
    dscale.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
    dshift.row(0) += dy.colwise().sum();
    const Matrix<T> dxhat = dy.array().rowwise() * scale.row(0).array();
    Matrix<T> dx(dy.rows(), dy.cols());
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
        const T m1 = dxhat.row(r).mean();
        const T m2 = (dxhat.row(r).array() * cache.xhat.row(r).array()).mean();
        dx.row(r) = cache.inv_std(r) * (dxhat.row(r).array() - m1 - cache.xhat.row(r).array() * m2);
    }
    return dx;
}

template <typename T>
T gelu(T x) {
    return T(0.5) * x * (T(1) + std::erf(x / std::numbers::sqrt2_v<T>));
}

template <typename T>
T gelu_grad(T x) {
    const T cdf = T(0.5) * (T(1) + std::erf(x / std::numbers::sqrt2_v<T>));
    const T pdf = std::exp(T(-0.5) * x * x) / std::sqrt(T(2) * std::numbers::pi_v<T>);
    return cdf + x * pdf;
}

template <typename T>
void softmax_rows(Matrix<T>& s) {
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
        const T mx = s.row(r).maxCoeff();
        s.row(r) = (s.row(r).array() - mx).exp();
        s.row(r) /= s.row(r).sum();
    }
}

// Inverted dropout mask, or an empty matrix when dropout is inactive.
template <typename T>
Matrix<T> dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, std::mt19937_64* rng) {
    if (rng == nullptr || p <= 0.0) return {};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const T keep_scale = T(1.0 / (1.0 - p));
    Matrix<T> m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = unit(*rng) < p ? T(0) : keep_scale;
    return m;
}

template <typename T>
Matrix<T> apply_mask(const Matrix<T>& x, const Matrix<T>& mask) {
    if (mask.size() == 0) return x;
    return x.cwiseProduct(mask);
}

template <typename T>
void fill_truncated_normal(Matrix<T>& m, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, kInitStd);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        double v = 0.0;
        do {
            v = normal(rng);
        } while (std::abs(v) > 2.0 * kInitStd);
        m.data()[i] = static_cast<T>(v);
    }
}

} // namespace

NetConfig NetConfig::h2o() { return NetConfig{}; }

NetConfig NetConfig::fpha() {
    NetConfig cfg;
    cfg.input_dim = slices::one_hand_dim;
    cfg.num_classes = 45;
    return cfg;
}

void NetConfig::validate() const {
    if (input_dim < 1 || model_dim < 1 || seq_len < 1 || num_layers < 0 || num_heads < 1 || mlp_hidden_dim < 1 ||
        num_classes < 1) {
        throw InvalidInput("network dimensions must be positive");
    }
    if (model_dim % num_heads != 0) throw InvalidInput("model_dim must be divisible by num_heads");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidInput("dropout must lie in [0,1)");
}

std::int64_t param_count(const NetConfig& cfg) {
    cfg.validate();
    const std::int64_t d = cfg.model_dim;
    const std::int64_t m = cfg.mlp_hidden_dim;
    std::int64_t n = cfg.input_dim * d + d;
    if (cfg.use_cls_token) n += d;
    if (cfg.use_pos_embedding) n += cfg.num_tokens() * d;
    const std::int64_t per_layer = 2 * d + 4 * (d * d + d) + 2 * d + (d * m + m) + (m * d + d);
    n += cfg.num_layers * per_layer;
    n += 2 * d;
    n += d * cfg.num_classes + cfg.num_classes;
    return n;
}

template <typename T>
ClassifierParams<T> zero_params(const NetConfig& cfg) {
    cfg.validate();
    const int d = cfg.model_dim;
    const int m = cfg.mlp_hidden_dim;
    ClassifierParams<T> p;
    p.config = cfg;
    p.input_weight = zeros<T>(cfg.input_dim, d);
    p.input_bias = zeros<T>(1, d);
    if (cfg.use_cls_token) p.cls_token = zeros<T>(1, d);
    if (cfg.use_pos_embedding) p.pos_embedding = zeros<T>(cfg.num_tokens(), d);
    p.layers.resize(static_cast<std::size_t>(cfg.num_layers));
    for (auto& l : p.layers) {
        l.norm1_scale = zeros<T>(1, d);
        l.norm1_shift = zeros<T>(1, d);
        l.query_weight = zeros<T>(d, d);
        l.query_bias = zeros<T>(1, d);
        l.key_weight = zeros<T>(d, d);
        l.key_bias = zeros<T>(1, d);
        l.value_weight = zeros<T>(d, d);
        l.value_bias = zeros<T>(1, d);
        l.out_weight = zeros<T>(d, d);
        l.out_bias = zeros<T>(1, d);
        l.norm2_scale = zeros<T>(1, d);
        l.norm2_shift = zeros<T>(1, d);
        l.mlp1_weight = zeros<T>(d, m);
        l.mlp1_bias = zeros<T>(1, m);
        l.mlp2_weight = zeros<T>(m, d);
        l.mlp2_bias = zeros<T>(1, d);
    }
    p.final_norm_scale = zeros<T>(1, d);
    p.final_norm_shift = zeros<T>(1, d);
    p.head_weight = zeros<T>(d, cfg.num_classes);
    p.head_bias = zeros<T>(1, cfg.num_classes);
    return p;
}

ClassifierParams<float> init_params(const NetConfig& cfg, std::uint64_t seed) {
    auto p = zero_params<float>(cfg);
    std::mt19937_64 rng(seed);
    fill_truncated_normal(p.input_weight, rng);
    if (cfg.use_cls_token) fill_truncated_normal(p.cls_token, rng);
    if (cfg.use_pos_embedding) fill_truncated_normal(p.pos_embedding, rng);
    for (auto& l : p.layers) {
        l.norm1_scale.setOnes();
        l.norm2_scale.setOnes();
        fill_truncated_normal(l.query_weight, rng);
        fill_truncated_normal(l.key_weight, rng);
        fill_truncated_normal(l.value_weight, rng);
        fill_truncated_normal(l.out_weight, rng);
        fill_truncated_normal(l.mlp1_weight, rng);
        fill_truncated_normal(l.mlp2_weight, rng);
    }
    p.final_norm_scale.setOnes();
    fill_truncated_normal(p.head_weight, rng);
    return p;
}

Matrix<float> to_matrix(const SequenceTensor& seq) {
    Matrix<float> x(seq.seq_len, seq.frame_dim);
    std::copy(seq.data.begin(), seq.data.end(), x.data());
    return x;
}

template <typename T>
ForwardCache<T> forward(const ClassifierParams<T>& params, const Matrix<T>& input, const ForwardOptions& opts) {
    const NetConfig& cfg = params.config;
    if (input.rows() != cfg.seq_len || input.cols() != cfg.input_dim) {
        throw InvalidInput("sequence shape " + std::to_string(input.rows()) + "x" + std::to_string(input.cols()) +
                           " does not match network input " + std::to_string(cfg.seq_len) + "x" +
                           std::to_string(cfg.input_dim));
    }
    const int d = cfg.model_dim;
    const int heads = cfg.num_heads;
    const int dh = cfg.head_dim();
    const T scale = T(1) / std::sqrt(static_cast<T>(dh));

    std::mt19937_64 rng(opts.dropout_seed);
    std::mt19937_64* drop_rng = opts.mode == RunMode::Train && cfg.dropout > 0.0 ? &rng : nullptr;

    ForwardCache<T> c;
    c.owner = &params;
    c.version = params.version;
    c.input = input;

    const Matrix<T> projected = affine(input, params.input_weight, params.input_bias);
    c.tokens.resize(cfg.num_tokens(), d);
    if (cfg.use_cls_token) {
        c.tokens.row(0) = params.cls_token.row(0);
        c.tokens.bottomRows(cfg.seq_len) = projected;
    } else {
        c.tokens = projected;
    }
    if (cfg.use_pos_embedding) c.tokens += params.pos_embedding;

    Matrix<T> z = c.tokens;
    c.layers.resize(params.layers.size());
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
        const auto& p = params.layers[li];
        auto& lc = c.layers[li];
        lc.input = z;
        lc.normed1 = layer_norm(z, p.norm1_scale, p.norm1_shift, lc.norm1);
        lc.q = affine(lc.normed1, p.query_weight, p.query_bias);
        lc.k = affine(lc.normed1, p.key_weight, p.key_bias);
        lc.v = affine(lc.normed1, p.value_weight, p.value_bias);
        lc.attn.resize(z.rows(), d);
        lc.probs.resize(static_cast<std::size_t>(heads));
        lc.probs_mask.resize(static_cast<std::size_t>(heads));
        for (int h = 0; h < heads; ++h) {
            const auto hs = static_cast<std::size_t>(h);
            Matrix<T> s = lc.q.middleCols(h * dh, dh) * lc.k.middleCols(h * dh, dh).transpose() * scale;
            softmax_rows(s);
            lc.probs[hs] = std::move(s);
            lc.probs_mask[hs] = dropout_mask<T>(z.rows(), z.rows(), cfg.dropout, drop_rng);
            lc.attn.middleCols(h * dh, dh) = apply_mask(lc.probs[hs], lc.probs_mask[hs]) * lc.v.middleCols(h * dh, dh);
        }
        const Matrix<T> attn_out = affine(lc.attn, p.out_weight, p.out_bias);
        lc.attn_out_mask = dropout_mask<T>(z.rows(), d, cfg.dropout, drop_rng);
        lc.mid = z + apply_mask(attn_out, lc.attn_out_mask);

        lc.normed2 = layer_norm(lc.mid, p.norm2_scale, p.norm2_shift, lc.norm2);
        lc.hidden_pre = affine(lc.normed2, p.mlp1_weight, p.mlp1_bias);
        lc.hidden = lc.hidden_pre.unaryExpr([](T x) { return gelu(x); });
        const Matrix<T> mlp_out = affine(lc.hidden, p.mlp2_weight, p.mlp2_bias);
        lc.mlp_out_mask = dropout_mask<T>(z.rows(), d, cfg.dropout, drop_rng);
        z = lc.mid + apply_mask(mlp_out, lc.mlp_out_mask);
    }
    c.encoded = z;

    if (cfg.use_cls_token) {
        c.pooled = z.topRows(1);
    } else {
        c.pooled = z.colwise().mean();
    }
    c.pooled_normed = layer_norm(c.pooled, params.final_norm_scale, params.final_norm_shift, c.final_norm);
    c.logits = affine(c.pooled_normed, params.head_weight, params.head_bias);
    return c;
}

template <typename T>
ForwardCache<T> forward(const ClassifierParams<T>& params, const SequenceTensor& seq, const ForwardOptions& opts) {
    if (seq.seq_len != params.config.seq_len || seq.frame_dim != params.config.input_dim) {
        throw InvalidInput("sequence tensor " + std::to_string(seq.seq_len) + "x" + std::to_string(seq.frame_dim) +
                           " does not match network input " + std::to_string(params.config.seq_len) + "x" +
                           std::to_string(params.config.input_dim));
    }
    return forward(params, Matrix<T>(to_matrix(seq).template cast<T>()), opts);
}

template <typename T>
void backward_accumulate(const ClassifierParams<T>& params, const ForwardCache<T>& c, const RowVec<T>& upstream,
                         Gradients<T>& g) {
    if (c.owner != &params || c.version != params.version) {
        throw InvalidInput("stale forward cache: parameters changed since the forward pass");
    }
    const NetConfig& cfg = params.config;
    if (upstream.size() != cfg.num_classes) throw InvalidInput("upstream gradient has wrong size");
    const int dh = cfg.head_dim();
    const T scale = T(1) / std::sqrt(static_cast<T>(dh));

    // Head.
    const Matrix<T> dlogits = upstream;
    g.head_weight += c.pooled_normed.transpose() * dlogits;
    g.head_bias += dlogits;
    const Matrix<T> dpooled_normed = dlogits * params.head_weight.transpose();
    const Matrix<T> dpooled = layer_norm_backward(dpooled_normed, params.final_norm_scale, c.final_norm,
                                                  g.final_norm_scale, g.final_norm_shift);

    Matrix<T> dz = Matrix<T>::Zero(c.encoded.rows(), c.encoded.cols());
    if (cfg.use_cls_token) {
        dz.row(0) = dpooled.row(0);
    } else {
        dz.rowwise() += dpooled.row(0) / static_cast<T>(c.encoded.rows());
    }

    for (std::size_t li = params.layers.size(); li-- > 0;) {
        const auto& p = params.layers[li];
        const auto& lc = c.layers[li];
        auto& gl = g.layers[li];

        // MLP block: z = mid + drop(fc2(gelu(fc1(norm2(mid))))).
        const Matrix<T> dmlp_out = apply_mask(dz, lc.mlp_out_mask);
        gl.mlp2_weight += lc.hidden.transpose() * dmlp_out;
        gl.mlp2_bias += dmlp_out.colwise().sum();
        Matrix<T> dhidden = dmlp_out * p.mlp2_weight.transpose();
        dhidden.array() *= lc.hidden_pre.unaryExpr([](T x) { return gelu_grad(x); }).array();
        gl.mlp1_weight += lc.normed2.transpose() * dhidden;
        gl.mlp1_bias += dhidden.colwise().sum();
        const Matrix<T> dnormed2 = dhidden * p.mlp1_weight.transpose();
        Matrix<T> dmid = dz + layer_norm_backward(dnormed2, p.norm2_scale, lc.norm2, gl.norm2_scale, gl.norm2_shift);

        // Attention block: mid = input + drop(out(attn(norm1(input)))).
        const Matrix<T> dattn_out = apply_mask(dmid, lc.attn_out_mask);
        gl.out_weight += lc.attn.transpose() * dattn_out;
        gl.out_bias += dattn_out.colwise().sum();
        const Matrix<T> dattn = dattn_out * p.out_weight.transpose();

        Matrix<T> dq(lc.q.rows(), lc.q.cols());
        Matrix<T> dk(lc.k.rows(), lc.k.cols());
        Matrix<T> dv(lc.v.rows(), lc.v.cols());
        for (int h = 0; h < cfg.num_heads; ++h) {
            const auto hs = static_cast<std::size_t>(h);
            const auto dattn_h = dattn.middleCols(h * dh, dh);
            const Matrix<T> dropped = apply_mask(lc.probs[hs], lc.probs_mask[hs]);
            dv.middleCols(h * dh, dh) = dropped.transpose() * dattn_h;
            const Matrix<T> ddropped = dattn_h * lc.v.middleCols(h * dh, dh).transpose();
            const Matrix<T> dprobs = apply_mask(ddropped, lc.probs_mask[hs]);
            const auto& probs = lc.probs[hs];
            // Softmax Jacobian applied row by row.
            const Eigen::Matrix<T, Eigen::Dynamic, 1> row_dot = (dprobs.array() * probs.array()).rowwise().sum();
            Matrix<T> dscores = probs.array() * (dprobs.array().colwise() - row_dot.array());
            dscores *= scale;
            dq.middleCols(h * dh, dh) = dscores * lc.k.middleCols(h * dh, dh);
            dk.middleCols(h * dh, dh) = dscores.transpose() * lc.q.middleCols(h * dh, dh);
        }
        gl.query_weight += lc.normed1.transpose() * dq;
        gl.query_bias += dq.colwise().sum();
        gl.key_weight += lc.normed1.transpose() * dk;
        gl.key_bias += dk.colwise().sum();
        gl.value_weight += lc.normed1.transpose() * dv;
        gl.value_bias += dv.colwise().sum();
        const Matrix<T> dnormed1 =
            dq * p.query_weight.transpose() + dk * p.key_weight.transpose() + dv * p.value_weight.transpose();
        dz = dmid + layer_norm_backward(dnormed1, p.norm1_scale, lc.norm1, gl.norm1_scale, gl.norm1_shift);
    }

    // Embedding.
    if (cfg.use_pos_embedding) g.pos_embedding += dz;
    Matrix<T> dprojected;
    if (cfg.use_cls_token) {
        g.cls_token += dz.topRows(1);
        dprojected = dz.bottomRows(cfg.seq_len);
    } else {
        dprojected = dz;
    }
    g.input_weight += c.input.transpose() * dprojected;
    g.input_bias += dprojected.colwise().sum();
}

template <typename T>
Gradients<T> backward(const ClassifierParams<T>& params, const ForwardCache<T>& cache, const RowVec<T>& upstream) {
    Gradients<T> g = zero_params<T>(params.config);
    backward_accumulate(params, cache, upstream, g);
    return g;
}

std::vector<float> predict_logits(const ClassifierParams<float>& params, const SequenceTensor& seq) {
    const auto cache = forward(params, seq, ForwardOptions{});
    return {cache.logits.data(), cache.logits.data() + cache.logits.size()};
}

int predict_label(const ClassifierParams<float>& params, const SequenceTensor& seq) {
    const auto logits = predict_logits(params, seq);
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

#define EGOACT_INSTANTIATE(T)                                                                                   \
    template ClassifierParams<T> zero_params<T>(const NetConfig&);                                              \
    template ForwardCache<T> forward<T>(const ClassifierParams<T>&, const Matrix<T>&, const ForwardOptions&);   \
    template ForwardCache<T> forward<T>(const ClassifierParams<T>&, const SequenceTensor&, const ForwardOptions&); \
    template void backward_accumulate<T>(const ClassifierParams<T>&, const ForwardCache<T>&, const RowVec<T>&,  \
                                         Gradients<T>&);                                                        \
    template Gradients<T> backward<T>(const ClassifierParams<T>&, const ForwardCache<T>&, const RowVec<T>&);

EGOACT_INSTANTIATE(float)
EGOACT_INSTANTIATE(double)

#undef EGOACT_INSTANTIATE

} // namespace egoact
