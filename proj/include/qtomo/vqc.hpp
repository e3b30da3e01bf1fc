#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qtomo/adam.hpp"
#include "qtomo/circuit.hpp"
#include "qtomo/density.hpp"
#include "qtomo/rng.hpp"
#include "qtomo/state.hpp"

namespace qtomo {

struct OptimizerConfig {
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double loss_tolerance = 1e-4;
    int max_epochs_per_sequence = 5000;
    int repetition_r = 1;
    /// When set, each sequence stops once m_q reaches this value instead of
    /// the loss tolerance (models finite measurement precision).
    std::optional<double> precision_target;
    /// Purity is diagnostic only; compute it every k-th epoch.
    int purity_stride = 1;

    double stop_loss() const {
        return precision_target ? 1.0 - *precision_target : loss_tolerance;
    }

    void validate() const {
        if (learning_rate <= 0 || beta1 <= 0 || beta1 >= 1 || beta2 <= 0 || beta2 >= 1 ||
            epsilon <= 0 || loss_tolerance <= 0 || max_epochs_per_sequence < 0 ||
            repetition_r < 1 || purity_stride < 1)
            throw std::invalid_argument("OptimizerConfig: values out of range");
        if (precision_target && (*precision_target <= 0.0 || *precision_target > 1.0))
            throw std::invalid_argument("OptimizerConfig: precision target must be in (0, 1]");
    }
};

/// Outcome of optimizing one disentanglement sequence.
struct SequenceResult {
    ParamCircuit circuit;
    std::vector<double> params;
    std::vector<double> loss_trajectory;    // loss per epoch, entry 0 = initial
    std::vector<double> purity_trajectory;  // subsystem purity per sampled epoch
    double final_m_q = 0.0;
    int epochs_used = 0;  // gradient steps taken
    bool converged = false;
};

/// The full sequential decomposition: sequence j acts on N−j+1 qubits.
struct DisentangleRecord {
    int n_qubits = 0;
    OptimizerConfig config;
    std::vector<SequenceResult> sequences;
    double average_m = 0.0;  // mean of final_m_q over sequences
    bool converged = false;
};

struct EpochEvent {
    int sequence = 0;  // 1-based
    int n_active = 0;
    int epoch = 0;
    double loss = 0.0;
    double purity = 0.0;
};
using ProgressFn = std::function<void(const EpochEvent&)>;

/// Diagonal observables over the computational basis:
/// expectation = Σ_i w_i |φ_i|².
using DiagonalWeights = std::vector<double>;

/// Projector onto the last qubit's |0>: weight 1 on even basis indices.
inline DiagonalWeights last_zero_weights(int n_qubits) {
    DiagonalWeights w(state_dim(n_qubits), 0.0);
    for (std::size_t i = 0; i < w.size(); i += 2) w[i] = 1.0;
    return w;
}

/// Mean of the per-qubit |0> marginals: weight = (# zero bits)/n. Used by
/// the non-sequential benchmark loss.
inline DiagonalWeights mean_marginal_weights(int n_qubits) {
    DiagonalWeights w(state_dim(n_qubits));
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = static_cast<double>(n_qubits - std::popcount(i)) / n_qubits;
    return w;
}

inline double diag_expectation(const StateVector& phi, const DiagonalWeights& w) {
    double e = 0.0;
    for (std::size_t i = 0; i < phi.dim(); ++i) e += w[i] * std::norm(phi.amplitudes[i]);
    return e;
}

/// Per-sequence loss ℒ = 1 − m_q on the evolved state.
inline double sequence_loss(const StateVector& state, const ParamCircuit& c,
                            std::span<const double> params) {
    return 1.0 - prob_last_zero(apply_circuit(state, c, params));
}

namespace detail {

/// <lam| M_qubit |phi> for a 2x2 matrix M acting on one qubit.
inline cplx wire_overlap(const StateVector& lam, const StateVector& phi, const Mat2& m,
                         int qubit) {
    const std::size_t mask = std::size_t{1} << qubit_bit(phi.n_qubits, qubit);
    const std::size_t lo_mask = mask - 1;
    const std::size_t hi_mask = ~lo_mask;
    const std::size_t half = phi.dim() >> 1;
    cplx acc{};
    for (std::size_t i = 0; i < half; ++i) {
        const std::size_t i0 = ((i & hi_mask) << 1) | (i & lo_mask);
        const std::size_t i1 = i0 | mask;
        acc += std::conj(lam.amplitudes[i0]) *
               (m.m00 * phi.amplitudes[i0] + m.m01 * phi.amplitudes[i1]);
        acc += std::conj(lam.amplitudes[i1]) *
               (m.m10 * phi.amplitudes[i0] + m.m11 * phi.amplitudes[i1]);
    }
    return acc;
}

}  // namespace detail

struct LossGrad {
    double loss = 0.0;
    StateVector evolved;
    std::vector<double> gradient;
};

/// Loss 1 − Σ_i w_i |φ_i|² and its exact parameter gradient by adjoint
/// reverse-mode differentiation: one forward pass, then one backward sweep
/// that un-applies each gate from the evolved state while carrying
/// λ = W|φ> backward. For a parametrized gate the contribution is
/// dE/dx = 2·Re <λ| ∂U/∂x |φ_before>, evaluated with the elementwise
/// derivative matrices of the rotation.
inline LossGrad eval_loss_and_gradient(const StateVector& input, const ParamCircuit& c,
                                       std::span<const double> params,
                                       const DiagonalWeights& weights) {
    detail::check_apply_args(input, c, params);
    LossGrad out;
    out.evolved = apply_circuit(input, c, params);
    out.loss = 1.0 - diag_expectation(out.evolved, weights);
    out.gradient.assign(static_cast<std::size_t>(c.n_params), 0.0);

    StateVector phi = out.evolved;
    StateVector lam = out.evolved;
    for (std::size_t i = 0; i < lam.dim(); ++i) lam.amplitudes[i] *= weights[i];

    for (auto it = c.ops.rbegin(); it != c.ops.rend(); ++it) {
        switch (it->kind) {
            case OpKind::ParamV: {
                const VParams p = detail::slot_params(params, it->param_slot);
                const Mat2 v_dag = dagger(v_gate(p));
                detail::apply_mat2_inplace(phi, v_dag, it->wire);  // state before this gate
                const std::size_t base = 3 * static_cast<std::size_t>(it->param_slot);
                out.gradient[base] =
                    -2.0 * detail::wire_overlap(lam, phi, v_gate_dphi(p), it->wire).real();
                out.gradient[base + 1] =
                    -2.0 * detail::wire_overlap(lam, phi, v_gate_dtheta(p), it->wire).real();
                out.gradient[base + 2] =
                    -2.0 * detail::wire_overlap(lam, phi, v_gate_domega(p), it->wire).real();
                detail::apply_mat2_inplace(lam, v_dag, it->wire);
                break;
            }
            case OpKind::Fixed1Q: {
                const Mat2 g_dag = dagger(discrete_gate(it->label));
                detail::apply_mat2_inplace(phi, g_dag, it->wire);
                detail::apply_mat2_inplace(lam, g_dag, it->wire);
                break;
            }
            case OpKind::Cnot:
                detail::apply_cnot_inplace(phi, it->wire, it->wire2);
                detail::apply_cnot_inplace(lam, it->wire, it->wire2);
                break;
        }
    }
    return out;
}

/// Exact gradient of the sequence loss with respect to the circuit
/// parameters.
inline std::vector<double> loss_gradient(const StateVector& state, const ParamCircuit& c,
                                         std::span<const double> params) {
    return eval_loss_and_gradient(state, c, params, last_zero_weights(state.n_qubits)).gradient;
}

namespace detail {

inline double subsystem_purity(const StateVector& evolved) {
    if (evolved.n_qubits < 2) return 1.0;
    return purity(reduced_density(evolved));
}

inline SequenceResult trivial_sequence(const StateVector& state, double loss) {
    SequenceResult res;
    res.circuit.n_active = state.n_qubits;
    res.loss_trajectory.push_back(loss);
    res.purity_trajectory.push_back(subsystem_purity(state));
    res.final_m_q = 1.0 - loss;
    res.epochs_used = 0;
    res.converged = true;
    return res;
}

}  // namespace detail

/// Optimize one disentanglement sequence: build the layered circuit for the
/// current subsystem, initialize parameters near the identity (uniform on
/// [−0.1, 0.1]) and run Adam on ℒ = 1 − m_q until the stop criterion or the
/// epoch budget. Inputs whose last qubit already reads |0> within tolerance
/// return immediately with an empty (identity) circuit.
inline SequenceResult run_sequence(const StateVector& state, const OptimizerConfig& cfg,
                                   Rng& rng, const ProgressFn& progress = {},
                                   int sequence_index = 1) {
    cfg.validate();
    const double stop = cfg.stop_loss();
    const double input_loss = 1.0 - prob_last_zero(state);
    if (input_loss <= stop) return detail::trivial_sequence(state, input_loss);

    SequenceResult res;
    res.circuit = sequence_circuit(state.n_qubits, cfg.repetition_r);
    res.params.resize(static_cast<std::size_t>(res.circuit.n_params));
    for (double& p : res.params) p = rng.uniform(-0.1, 0.1);

    const DiagonalWeights weights = last_zero_weights(state.n_qubits);
    AdamState opt(res.params.size(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);

    for (int epoch = 0;; ++epoch) {
        const LossGrad ev = eval_loss_and_gradient(state, res.circuit, res.params, weights);
        res.loss_trajectory.push_back(ev.loss);

        const bool stopping = ev.loss <= stop || epoch == cfg.max_epochs_per_sequence;
        double pur = res.purity_trajectory.empty() ? 1.0 : res.purity_trajectory.back();
        if (epoch % cfg.purity_stride == 0 || stopping) {
            pur = detail::subsystem_purity(ev.evolved);
            res.purity_trajectory.push_back(pur);
        }
        if (progress)
            progress({sequence_index, state.n_qubits, epoch, ev.loss, pur});

        if (stopping) {
            res.epochs_used = epoch;
            res.converged = ev.loss <= stop;
            res.final_m_q = 1.0 - ev.loss;
            return res;
        }
        adam_step(opt, res.params, ev.gradient);
    }
}

/// Sequentially disentangle every qubit: optimize Û_j on the current
/// subsystem, project the measured qubit out, shrink, repeat. Returns a
/// partial record (converged = false) as soon as one sequence fails to
/// converge.
inline DisentangleRecord disentangle(const StateVector& psi, const OptimizerConfig& cfg,
                                     Rng& rng, const ProgressFn& progress = {}) {
    DisentangleRecord rec;
    rec.n_qubits = psi.n_qubits;
    rec.config = cfg;
    StateVector current = psi;
    for (int j = 1; j <= psi.n_qubits; ++j) {
        SequenceResult res = run_sequence(current, cfg, rng, progress, j);
        const bool ok = res.converged;
        rec.sequences.push_back(std::move(res));
        if (!ok) break;
        const SequenceResult& seq = rec.sequences.back();
        StateVector evolved = apply_circuit(current, seq.circuit, seq.params);
        if (evolved.n_qubits >= 2)
            current = project_out_last(evolved).state;
        else
            current = std::move(evolved);
    }
    rec.converged = rec.sequences.size() == static_cast<std::size_t>(psi.n_qubits) &&
                    rec.sequences.back().converged;
    double sum = 0.0;
    for (const SequenceResult& s : rec.sequences) sum += s.final_m_q;
    rec.average_m = rec.sequences.empty() ? 0.0 : sum / static_cast<double>(rec.sequences.size());
    return rec;
}

/// Rebuild |ψ'> = Û_1† Û_2† ... Û_N† |0...0>: each Û_j† is embedded on the
/// leading N−j+1 qubits of the full register, applied for j = N down to 1.
/// Equal to the original state up to a global phase when every sequence
/// loss vanishes.
inline StateVector reconstruct(const DisentangleRecord& rec) {
    if (rec.sequences.size() != static_cast<std::size_t>(rec.n_qubits))
        throw std::invalid_argument("reconstruct: record is incomplete");
    StateVector s = zero_state(rec.n_qubits);
    for (auto it = rec.sequences.rbegin(); it != rec.sequences.rend(); ++it)
        s = apply_circuit_inverse(std::move(s), it->circuit, it->params);
    return s;
}

}  // namespace qtomo
