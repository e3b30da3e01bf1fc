#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qtomo {

/// Adam with bias correction; deterministic given the gradient stream.
struct AdamState {
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int step = 0;
    std::vector<double> m;
    std::vector<double> v;

    AdamState() = default;
    AdamState(std::size_t n_params, double lr, double b1 = 0.9, double b2 = 0.999,
              double eps = 1e-8)
        : learning_rate(lr), beta1(b1), beta2(b2), epsilon(eps), m(n_params, 0.0),
          v(n_params, 0.0) {}
};

inline void adam_step(AdamState& opt, std::vector<double>& params,
                      const std::vector<double>& grads) {
    if (params.size() != grads.size() || params.size() != opt.m.size())
        throw std::invalid_argument("adam_step: size mismatch");
    opt.step += 1;
    const double c1 = 1.0 - std::pow(opt.beta1, opt.step);
    const double c2 = 1.0 - std::pow(opt.beta2, opt.step);
    for (std::size_t i = 0; i < params.size(); ++i) {
        opt.m[i] = opt.beta1 * opt.m[i] + (1.0 - opt.beta1) * grads[i];
        opt.v[i] = opt.beta2 * opt.v[i] + (1.0 - opt.beta2) * grads[i] * grads[i];
        const double m_hat = opt.m[i] / c1;
        const double v_hat = opt.v[i] / c2;
        params[i] -= opt.learning_rate * m_hat / (std::sqrt(v_hat) + opt.epsilon);
    }
}

}  // namespace qtomo
