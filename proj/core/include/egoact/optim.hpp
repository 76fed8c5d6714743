#pragma once

#include <cmath>
#include <cstdint>
#include <span>

#include "egoact/net.hpp"

namespace egoact {

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

// Decoupled weight decay followed by a bias-corrected Adam step, applied
// elementwise. `step` is the 1-based index of this update.
template <typename T>
void adamw_update(std::span<T> theta, std::span<const T> grad, std::span<T> m, std::span<T> v, std::int64_t step,
                  double lr, const AdamWConfig& cfg) {
    const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double g = grad[i];
        double t = theta[i];
        t -= lr * cfg.weight_decay * t;
        const double mi = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        const double vi = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = mi / bias1;
        const double v_hat = vi / bias2;
        t -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        theta[i] = static_cast<T>(t);
    }
}

struct AdamWState {
    Gradients<float> first_moment;
    Gradients<float> second_moment;
    std::int64_t step = 0;

    static AdamWState zeros(const NetConfig& cfg);
};

// Applies one AdamW step to every tensor. Rejects the whole step, naming the
// offending tensor, if any gradient is non-finite. Bumps params.version.
void adamw_step(ClassifierParams<float>& params, const Gradients<float>& grads, AdamWState& state, double lr,
                const AdamWConfig& cfg);

} // namespace egoact
