#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qtomo/rng.hpp"

namespace qtomo {

/// Dense affine layer, weights row-major: w[o * in + i].
struct Layer {
    int in = 0;
    int out = 0;
    std::vector<double> w;
    std::vector<double> b;
};

/// Feed-forward policy: tanh hidden layers and a softmax head over the
/// action set.
struct PolicyNet {
    int input_dim = 0;
    int output_dim = 0;
    std::vector<Layer> layers;

    std::size_t n_weights() const {
        std::size_t n = 0;
        for (const Layer& l : layers) n += l.w.size() + l.b.size();
        return n;
    }
};

/// Weights uniform on ±1/sqrt(fan_in), biases zero.
inline PolicyNet make_policy(int input_dim, const std::vector<int>& hidden, int output_dim,
                             Rng& rng) {
    if (input_dim < 1 || output_dim < 1)
        throw std::invalid_argument("make_policy: dimensions must be positive");
    PolicyNet net;
    net.input_dim = input_dim;
    net.output_dim = output_dim;
    int prev = input_dim;
    std::vector<int> sizes = hidden;
    sizes.push_back(output_dim);
    for (int size : sizes) {
        Layer l{prev, size, std::vector<double>(static_cast<std::size_t>(size) * prev),
                std::vector<double>(size, 0.0)};
        const double bound = 1.0 / std::sqrt(static_cast<double>(prev));
        for (double& w : l.w) w = rng.uniform(-bound, bound);
        net.layers.push_back(std::move(l));
        prev = size;
    }
    return net;
}

/// Same shapes, all zeros; gradient accumulator.
inline PolicyNet zeros_like(const PolicyNet& net) {
    PolicyNet g = net;
    for (Layer& l : g.layers) {
        l.w.assign(l.w.size(), 0.0);
        l.b.assign(l.b.size(), 0.0);
    }
    return g;
}

namespace detail {

inline std::vector<double> softmax(std::vector<double> z) {
    double zmax = z[0];
    for (double v : z) zmax = std::max(zmax, v);
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - zmax);
        sum += v;
    }
    for (double& v : z) v /= sum;
    return z;
}

inline std::vector<double> affine(const Layer& l, const std::vector<double>& x) {
    std::vector<double> z(l.b);
    for (int o = 0; o < l.out; ++o) {
        const double* row = l.w.data() + static_cast<std::size_t>(o) * l.in;
        double acc = z[o];
        for (int i = 0; i < l.in; ++i) acc += row[i] * x[i];
        z[o] = acc;
    }
    return z;
}

}  // namespace detail

/// Per-layer inputs retained for backprop: activations[0] is the network
/// input, the last entry is the softmax output.
struct ForwardCache {
    std::vector<std::vector<double>> activations;
};

inline std::vector<double> policy_forward_cached(const PolicyNet& net,
                                                 const std::vector<double>& x,
                                                 ForwardCache& cache) {
    if (static_cast<int>(x.size()) != net.input_dim)
        throw std::invalid_argument("policy_forward: input size mismatch");
    cache.activations.clear();
    cache.activations.push_back(x);
    std::vector<double> h = x;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        std::vector<double> z = detail::affine(net.layers[l], h);
        if (l + 1 < net.layers.size()) {
            for (double& v : z) v = std::tanh(v);
            cache.activations.push_back(z);
        } else {
            z = detail::softmax(std::move(z));
            cache.activations.push_back(z);
        }
        h = cache.activations.back();
    }
    return h;
}

/// Action probabilities for an encoded state: softmax of the final affine
/// layer, strictly positive and summing to one.
inline std::vector<double> policy_forward(const PolicyNet& net, const std::vector<double>& x) {
    ForwardCache cache;
    return policy_forward_cached(net, x, cache);
}

/// Accumulate the gradient of weight · (−log p[action]) into grad, reusing
/// the cached forward pass. Softmax plus log collapses to
/// dz_out = weight · (p − onehot(action)).
inline void accumulate_logprob_gradient(const PolicyNet& net, const ForwardCache& cache,
                                        int action, double weight, PolicyNet& grad) {
    const std::size_t n_layers = net.layers.size();
    const std::vector<double>& probs = cache.activations[n_layers];
    std::vector<double> dz(probs);
    for (double& v : dz) v *= weight;
    dz[static_cast<std::size_t>(action)] -= weight;

    for (std::size_t l = n_layers; l-- > 0;) {
        const Layer& layer = net.layers[l];
        Layer& glayer = grad.layers[l];
        const std::vector<double>& h_prev = cache.activations[l];
        for (int o = 0; o < layer.out; ++o) {
            glayer.b[o] += dz[o];
            double* grow = glayer.w.data() + static_cast<std::size_t>(o) * layer.in;
            for (int i = 0; i < layer.in; ++i) grow[i] += dz[o] * h_prev[i];
        }
        if (l == 0) break;
        std::vector<double> dh(static_cast<std::size_t>(layer.in), 0.0);
        for (int o = 0; o < layer.out; ++o) {
            const double* row = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
            for (int i = 0; i < layer.in; ++i) dh[i] += row[i] * dz[o];
        }
        // back through tanh of the previous hidden layer
        const std::vector<double>& h = cache.activations[l];
        dz.assign(dh.size(), 0.0);
        for (std::size_t i = 0; i < dh.size(); ++i) dz[i] = dh[i] * (1.0 - h[i] * h[i]);
    }
}

inline std::vector<double> flatten(const PolicyNet& net) {
    std::vector<double> flat;
    flat.reserve(net.n_weights());
    for (const Layer& l : net.layers) {
        flat.insert(flat.end(), l.w.begin(), l.w.end());
        flat.insert(flat.end(), l.b.begin(), l.b.end());
    }
    return flat;
}

inline void unflatten(PolicyNet& net, const std::vector<double>& flat) {
    if (flat.size() != net.n_weights())
        throw std::invalid_argument("unflatten: size mismatch");
    std::size_t k = 0;
    for (Layer& l : net.layers) {
        for (double& w : l.w) w = flat[k++];
        for (double& b : l.b) b = flat[k++];
    }
}

}  // namespace qtomo
