#pragma once

// Test-only oracles, independent of the library's computation paths:
// finite-difference gradients, brute-force probability sums, power-iteration
// eigenpairs. Kept deliberately naive.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "qtomo/density.hpp"
#include "qtomo/policy.hpp"
#include "qtomo/rl.hpp"
#include "qtomo/rng.hpp"
#include "qtomo/state.hpp"
#include "qtomo/vqc.hpp"

namespace oracles {

using qtomo::cplx;
using qtomo::DensityMatrix;
using qtomo::StateVector;

/// Direct summation over the even basis indices.
inline double brute_force_prob_last_zero(const StateVector& s) {
    double p = 0.0;
    for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
        if (i % 2 == 0) {
            const double re = s.amplitudes[i].real();
            const double im = s.amplitudes[i].imag();
            p += re * re + im * im;
        }
    }
    return p;
}

/// Central finite differences of the sequence loss, step h.
inline std::vector<double> fd_loss_gradient(const StateVector& state,
                                            const qtomo::ParamCircuit& circuit,
                                            std::vector<double> params, double h = 1e-6) {
    std::vector<double> grad(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double saved = params[k];
        params[k] = saved + h;
        const double up = qtomo::sequence_loss(state, circuit, params);
        params[k] = saved - h;
        const double down = qtomo::sequence_loss(state, circuit, params);
        params[k] = saved;
        grad[k] = (up - down) / (2.0 * h);
    }
    return grad;
}

/// Central finite differences of the REINFORCE loss over the flattened
/// network weights.
inline std::vector<double> fd_policy_gradient(const std::vector<qtomo::Episode>& episodes,
                                              qtomo::PolicyNet net, double h = 1e-6) {
    std::vector<double> flat = qtomo::flatten(net);
    std::vector<double> grad(flat.size());
    for (std::size_t k = 0; k < flat.size(); ++k) {
        const double saved = flat[k];
        flat[k] = saved + h;
        qtomo::unflatten(net, flat);
        const double up = qtomo::policy_loss(episodes, net).first;
        flat[k] = saved - h;
        qtomo::unflatten(net, flat);
        const double down = qtomo::policy_loss(episodes, net).first;
        flat[k] = saved;
        grad[k] = (up - down) / (2.0 * h);
    }
    qtomo::unflatten(net, flat);
    return grad;
}

/// Componentwise gradient agreement with a small absolute floor for entries
/// that are numerically zero.
inline bool gradients_close(const std::vector<double>& a, const std::vector<double>& b,
                            double rtol = 1e-5, double atol = 1e-8) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = std::abs(a[i] - b[i]);
        if (diff > atol && diff > rtol * std::max(std::abs(a[i]), std::abs(b[i]))) return false;
    }
    return true;
}

inline std::vector<cplx> matvec(const DensityMatrix& rho, const std::vector<cplx>& v) {
    std::vector<cplx> out(rho.dim);
    for (std::size_t i = 0; i < rho.dim; ++i) {
        cplx acc{};
        for (std::size_t j = 0; j < rho.dim; ++j) acc += rho.at(i, j) * v[j];
        out[i] = acc;
    }
    return out;
}

struct EigenPair {
    double value = 0.0;
    std::vector<cplx> vector;
};

/// Power iteration for the dominant eigenpair of a Hermitian PSD matrix.
inline EigenPair dominant_eigenpair(const DensityMatrix& rho, int iterations = 5000) {
    qtomo::Rng rng(12345);
    std::vector<cplx> v(rho.dim);
    for (cplx& x : v) x = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    double value = 0.0;
    for (int it = 0; it < iterations; ++it) {
        std::vector<cplx> w = matvec(rho, v);
        double norm = 0.0;
        for (const cplx& x : w) norm += std::norm(x);
        norm = std::sqrt(norm);
        if (norm == 0.0) break;
        for (cplx& x : w) x /= norm;
        value = norm;
        v = std::move(w);
    }
    return {value, v};
}

/// Smallest eigenvalue via power iteration on 2I − ρ (eigenvalues of a
/// density matrix lie well inside [−1, 1]).
inline double min_eigenvalue(const DensityMatrix& rho, int iterations = 5000) {
    DensityMatrix shifted = rho;
    for (std::size_t i = 0; i < rho.dim; ++i) {
        for (std::size_t j = 0; j < rho.dim; ++j) shifted.at(i, j) = -rho.at(i, j);
        shifted.at(i, i) += 2.0;
    }
    return 2.0 - dominant_eigenpair(shifted, iterations).value;
}

/// Reduced density matrix of the last qubit alone (2x2), the other side of
/// the Schmidt split.
inline DensityMatrix last_qubit_density(const StateVector& s) {
    DensityMatrix rho{2, std::vector<cplx>(4)};
    const std::size_t half = s.dim() >> 1;
    for (std::size_t k = 0; k < half; ++k) {
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = 0; b < 2; ++b)
                rho.at(a, b) += s.amplitudes[2 * k + a] * std::conj(s.amplitudes[2 * k + b]);
    }
    return rho;
}

/// |sub> ⊗ |0>: re-attach a zeroed last qubit.
inline StateVector tensor_with_zero(const StateVector& sub) {
    StateVector out{sub.n_qubits + 1, std::vector<cplx>(sub.dim() * 2, cplx{})};
    for (std::size_t i = 0; i < sub.dim(); ++i) out.amplitudes[2 * i] = sub.amplitudes[i];
    return out;
}

inline double max_amp_diff(const StateVector& a, const StateVector& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.amplitudes.size(); ++i)
        d = std::max(d, std::abs(a.amplitudes[i] - b.amplitudes[i]));
    return d;
}

inline double hermitian_defect(const DensityMatrix& rho) {
    double d = 0.0;
    for (std::size_t i = 0; i < rho.dim; ++i)
        for (std::size_t j = 0; j < rho.dim; ++j)
            d = std::max(d, std::abs(rho.at(i, j) - std::conj(rho.at(j, i))));
    return d;
}

inline double trace_real(const DensityMatrix& rho) {
    double t = 0.0;
    for (std::size_t i = 0; i < rho.dim; ++i) t += rho.at(i, i).real();
    return t;
}

}  // namespace oracles
