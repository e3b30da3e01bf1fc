#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qtomo/gates.hpp"
#include "qtomo/state.hpp"

namespace qtomo {

enum class OpKind { ParamV, Fixed1Q, Cnot };

/// One circuit element: a parametrized rotation slot, a fixed gate from the
/// discrete set, or a CNOT. Wires are 1-based qubit indices.
struct GateOp {
    OpKind kind = OpKind::ParamV;
    int wire = 0;                    // single-qubit wire, or CNOT control
    int wire2 = 0;                   // CNOT target
    int param_slot = -1;             // ParamV only
    GateLabel label = GateLabel::I;  // Fixed1Q only
};

inline GateOp make_v(int wire, int slot) { return {OpKind::ParamV, wire, 0, slot, GateLabel::I}; }
inline GateOp make_fixed(GateLabel g, int wire) { return {OpKind::Fixed1Q, wire, 0, -1, g}; }
inline GateOp make_cnot(int control, int target) {
    if (control == target) throw std::invalid_argument("make_cnot: control == target");
    return {OpKind::Cnot, control, target, -1, GateLabel::I};
}

/// Ordered gate list acting on qubits 1..n_active. Parameters are packed
/// gate-major: slot k owns the contiguous angles (φ,θ,ω) at 3k..3k+2.
struct ParamCircuit {
    int n_active = 0;
    std::vector<GateOp> ops;
    int n_params = 0;
};

/// One layer of the variational ansatz: a parametrized rotation on every
/// qubit, then a CNOT chain with controls n_active−1 .. 1, each targeting
/// control+1, funneling entanglement toward the measured last qubit.
inline std::vector<GateOp> building_block(int n_active, int first_slot = 0) {
    if (n_active < 2) throw std::invalid_argument("building_block: need n_active >= 2");
    std::vector<GateOp> ops;
    ops.reserve(static_cast<std::size_t>(2 * n_active - 1));
    for (int q = 1; q <= n_active; ++q) ops.push_back(make_v(q, first_slot + q - 1));
    for (int c = n_active - 1; c >= 1; --c) ops.push_back(make_cnot(c, c + 1));
    return ops;
}

/// Stack m = n_active × r copies of the building block. For the final
/// single-qubit sequence the block degenerates to one rotation and the same
/// m = r counting applies, reproducing the benchmark's r·N_s² gate totals.
inline ParamCircuit sequence_circuit(int n_active, int r) {
    if (n_active < 1) throw std::invalid_argument("sequence_circuit: need n_active >= 1");
    if (r < 1) throw std::invalid_argument("sequence_circuit: need r >= 1");
    ParamCircuit c;
    c.n_active = n_active;
    const int copies = n_active * r;
    for (int m = 0; m < copies; ++m) {
        const int base = m * n_active;
        if (n_active == 1) {
            c.ops.push_back(make_v(1, base));
        } else {
            auto block = building_block(n_active, base);
            c.ops.insert(c.ops.end(), block.begin(), block.end());
        }
    }
    c.n_params = 3 * copies * n_active;
    return c;
}

/// Append src's ops to dst, shifting parameter slots past dst's. Wire
/// indices are kept as-is: a circuit on fewer qubits lands on the leading
/// (most significant) qubits of the combined register.
inline void append_circuit(ParamCircuit& dst, const ParamCircuit& src) {
    const int slot_shift = dst.n_params / 3;
    for (GateOp op : src.ops) {
        if (op.kind == OpKind::ParamV) op.param_slot += slot_shift;
        dst.ops.push_back(op);
    }
    dst.n_params += src.n_params;
    if (src.n_active > dst.n_active) dst.n_active = src.n_active;
}

namespace detail {

inline void check_apply_args(const StateVector& s, const ParamCircuit& c,
                             std::span<const double> params) {
    if (static_cast<int>(params.size()) != c.n_params)
        throw std::invalid_argument("apply_circuit: expected " + std::to_string(c.n_params) +
                                    " parameters, got " + std::to_string(params.size()));
    if (s.n_qubits < c.n_active)
        throw std::invalid_argument("apply_circuit: circuit acts on " +
                                    std::to_string(c.n_active) + " qubits but state has " +
                                    std::to_string(s.n_qubits));
}

inline VParams slot_params(std::span<const double> params, int slot) {
    return {params[3 * slot], params[3 * slot + 1], params[3 * slot + 2]};
}

inline void apply_op_inplace(StateVector& s, const GateOp& op, std::span<const double> params,
                             bool inverse) {
    switch (op.kind) {
        case OpKind::ParamV: {
            const Mat2 v = v_gate(slot_params(params, op.param_slot));
            apply_mat2_inplace(s, inverse ? dagger(v) : v, op.wire);
            break;
        }
        case OpKind::Fixed1Q: {
            const Mat2 g = discrete_gate(op.label);
            apply_mat2_inplace(s, inverse ? dagger(g) : g, op.wire);
            break;
        }
        case OpKind::Cnot:
            apply_cnot_inplace(s, op.wire, op.wire2);
            break;
    }
}

}  // namespace detail

/// Apply the circuit's ops in list order. The circuit occupies qubits
/// 1..n_active of the state; a smaller circuit acts on the leading qubits of
/// a larger register (how each Û_j† is embedded during reconstruction).
inline StateVector apply_circuit(StateVector state, const ParamCircuit& c,
                                 std::span<const double> params) {
    detail::check_apply_args(state, c, params);
    for (const GateOp& op : c.ops) detail::apply_op_inplace(state, op, params, false);
    return state;
}

/// Apply the inverse circuit: ops reversed, each gate conjugate-transposed.
inline StateVector apply_circuit_inverse(StateVector state, const ParamCircuit& c,
                                         std::span<const double> params) {
    detail::check_apply_args(state, c, params);
    for (auto it = c.ops.rbegin(); it != c.ops.rend(); ++it)
        detail::apply_op_inplace(state, *it, params, true);
    return state;
}

/// One discrete synthesis move: a gate g from the alphabet on a control
/// qubit, then a CNOT from that control onto the measured last qubit.
struct Action {
    GateLabel gate = GateLabel::I;
    int control = 0;
};

/// All d = 7·(n_active−1) actions: the gate alphabet crossed with every
/// control except the measured qubit itself.
inline std::vector<Action> action_set(int n_active) {
    if (n_active < 2) throw std::invalid_argument("action_set: need n_active >= 2");
    std::vector<Action> actions;
    actions.reserve(kGateSet.size() * static_cast<std::size_t>(n_active - 1));
    for (int c = 1; c <= n_active - 1; ++c)
        for (GateLabel g : kGateSet) actions.push_back({g, c});
    return actions;
}

/// The equivalent fixed-gate circuit of an action list on an n_active-qubit
/// subsystem; used for replay and for inverse application during
/// reconstruction.
inline ParamCircuit actions_to_circuit(const std::vector<Action>& actions, int n_active) {
    ParamCircuit c;
    c.n_active = n_active;
    for (const Action& a : actions) {
        c.ops.push_back(make_fixed(a.gate, a.control));
        c.ops.push_back(make_cnot(a.control, n_active));
    }
    return c;
}

/// Apply one action: g on the control qubit, then CNOT(control → last).
inline StateVector apply_action(StateVector state, const Action& a) {
    detail::require_qubit(state, a.control, "apply_action");
    if (a.control == state.n_qubits)
        throw std::invalid_argument("apply_action: control must differ from the measured qubit");
    detail::apply_mat2_inplace(state, discrete_gate(a.gate), a.control);
    detail::apply_cnot_inplace(state, a.control, state.n_qubits);
    return state;
}

}  // namespace qtomo
