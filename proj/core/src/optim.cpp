#include "egoact/optim.hpp"

#include <cmath>
#include <vector>

#include "egoact/error.hpp"

namespace egoact {

AdamWState AdamWState::zeros(const NetConfig& cfg) {
    return {zero_params<float>(cfg), zero_params<float>(cfg), 0};
}

void adamw_step(ClassifierParams<float>& params, const Gradients<float>& grads, AdamWState& state, double lr,
                const AdamWConfig& cfg) {
    std::vector<const Matrix<float>*> g;
    for_each_tensor(grads, [&](const std::string& name, const Matrix<float>& t) {
        if (!t.allFinite()) throw Error("non-finite gradient in tensor '" + name + "'; step rejected");
        g.push_back(&t);
    });
    std::vector<Matrix<float>*> m;
    std::vector<Matrix<float>*> v;
    for_each_tensor(state.first_moment, [&](const std::string&, Matrix<float>& t) { m.push_back(&t); });
    for_each_tensor(state.second_moment, [&](const std::string&, Matrix<float>& t) { v.push_back(&t); });

    std::vector<Matrix<float>*> p;
    for_each_tensor(params, [&](const std::string& name, Matrix<float>& t) {
        const std::size_t i = p.size();
        const bool missing = i >= g.size() || i >= m.size() || i >= v.size();
        if (missing || g[i]->size() != t.size() || m[i]->size() != t.size() || v[i]->size() != t.size()) {
            throw InvalidInput("optimizer shape mismatch at tensor '" + name + "'");
        }
        p.push_back(&t);
    });
    if (p.size() != g.size()) throw InvalidInput("optimizer tensor count mismatch");

    ++state.step;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto n = static_cast<std::size_t>(p[i]->size());
        adamw_update<float>({p[i]->data(), n}, {g[i]->data(), n}, {m[i]->data(), n}, {v[i]->data(), n}, state.step,
                            lr, cfg);
    }
    ++params.version;
}

} // namespace egoact
