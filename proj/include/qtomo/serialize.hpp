#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qtomo/bench.hpp"
#include "qtomo/circuit.hpp"
#include "qtomo/rl.hpp"
#include "qtomo/state.hpp"
#include "qtomo/vqc.hpp"

// JSON wire formats: states as [re, im] pairs in ascending basis order,
// circuits as op lists, run records with their configs and trajectories.
// Everything emitted here re-parses losslessly into the same value.

namespace qtomo {

using nlohmann::json;

inline void to_json(json& j, const StateVector& s) {
    json amps = json::array();
    for (const cplx& a : s.amplitudes) amps.push_back({a.real(), a.imag()});
    j = json{{"n_qubits", s.n_qubits}, {"amplitudes", std::move(amps)}};
}

inline void from_json(const json& j, StateVector& s) {
    s.n_qubits = j.at("n_qubits").get<int>();
    s.amplitudes.clear();
    for (const json& pair : j.at("amplitudes"))
        s.amplitudes.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
    if (s.amplitudes.size() != state_dim(s.n_qubits))
        throw std::invalid_argument("StateVector: amplitude count does not match n_qubits");
}

inline void to_json(json& j, const GateOp& op) {
    switch (op.kind) {
        case OpKind::ParamV:
            j = json{{"kind", "v"}, {"wires", {op.wire}}, {"param_slot", op.param_slot}};
            break;
        case OpKind::Fixed1Q:
            j = json{{"kind", "fixed"}, {"wires", {op.wire}}, {"label", to_string(op.label)}};
            break;
        case OpKind::Cnot:
            j = json{{"kind", "cnot"}, {"wires", {op.wire, op.wire2}}};
            break;
    }
}

inline void from_json(const json& j, GateOp& op) {
    const std::string kind = j.at("kind").get<std::string>();
    const auto& wires = j.at("wires");
    if (kind == "v") {
        op = make_v(wires.at(0).get<int>(), j.at("param_slot").get<int>());
    } else if (kind == "fixed") {
        op = make_fixed(parse_gate_label(j.at("label").get<std::string>()),
                        wires.at(0).get<int>());
    } else if (kind == "cnot") {
        op = make_cnot(wires.at(0).get<int>(), wires.at(1).get<int>());
    } else {
        throw std::invalid_argument("GateOp: unknown kind '" + kind + "'");
    }
}

inline void to_json(json& j, const ParamCircuit& c) {
    j = json{{"n_active", c.n_active}, {"ops", c.ops}};
}

inline void from_json(const json& j, ParamCircuit& c) {
    c.n_active = j.at("n_active").get<int>();
    c.ops = j.at("ops").get<std::vector<GateOp>>();
    int slots = 0;
    for (const GateOp& op : c.ops) {
        const int max_wire = op.kind == OpKind::Cnot ? std::max(op.wire, op.wire2) : op.wire;
        if (op.wire < 1 || max_wire > c.n_active)
            throw std::invalid_argument("ParamCircuit: wire outside 1..n_active");
        if (op.kind == OpKind::ParamV) ++slots;
    }
    std::vector<bool> seen(static_cast<std::size_t>(slots), false);
    for (const GateOp& op : c.ops) {
        if (op.kind != OpKind::ParamV) continue;
        if (op.param_slot < 0 || op.param_slot >= slots ||
            seen[static_cast<std::size_t>(op.param_slot)])
            throw std::invalid_argument("ParamCircuit: parameter slots must be 0..count-1, "
                                        "each exactly once");
        seen[static_cast<std::size_t>(op.param_slot)] = true;
    }
    c.n_params = 3 * slots;
}

inline void to_json(json& j, const Action& a) {
    j = json{{"gate_label", to_string(a.gate)}, {"control_qubit", a.control}};
}

inline void from_json(const json& j, Action& a) {
    a.gate = parse_gate_label(j.at("gate_label").get<std::string>());
    a.control = j.at("control_qubit").get<int>();
}

inline void to_json(json& j, const OptimizerConfig& c) {
    j = json{{"learning_rate", c.learning_rate},
             {"beta1", c.beta1},
             {"beta2", c.beta2},
             {"epsilon", c.epsilon},
             {"loss_tolerance", c.loss_tolerance},
             {"max_epochs_per_sequence", c.max_epochs_per_sequence},
             {"repetition_r", c.repetition_r},
             {"purity_stride", c.purity_stride}};
    if (c.precision_target)
        j["precision_target"] = *c.precision_target;
    else
        j["precision_target"] = nullptr;
}

inline void from_json(const json& j, OptimizerConfig& c) {
    j.at("learning_rate").get_to(c.learning_rate);
    j.at("beta1").get_to(c.beta1);
    j.at("beta2").get_to(c.beta2);
    j.at("epsilon").get_to(c.epsilon);
    j.at("loss_tolerance").get_to(c.loss_tolerance);
    j.at("max_epochs_per_sequence").get_to(c.max_epochs_per_sequence);
    j.at("repetition_r").get_to(c.repetition_r);
    j.at("purity_stride").get_to(c.purity_stride);
    if (j.contains("precision_target") && !j.at("precision_target").is_null())
        c.precision_target = j.at("precision_target").get<double>();
    else
        c.precision_target.reset();
}

inline void to_json(json& j, const SequenceResult& r) {
    j = json{{"circuit", r.circuit},
             {"params", r.params},
             {"loss_trajectory", r.loss_trajectory},
             {"purity_trajectory", r.purity_trajectory},
             {"final_m_q", r.final_m_q},
             {"epochs_used", r.epochs_used},
             {"converged", r.converged}};
}

inline void from_json(const json& j, SequenceResult& r) {
    j.at("circuit").get_to(r.circuit);
    j.at("params").get_to(r.params);
    j.at("loss_trajectory").get_to(r.loss_trajectory);
    j.at("purity_trajectory").get_to(r.purity_trajectory);
    j.at("final_m_q").get_to(r.final_m_q);
    j.at("epochs_used").get_to(r.epochs_used);
    j.at("converged").get_to(r.converged);
}

inline void to_json(json& j, const DisentangleRecord& r) {
    j = json{{"kind", "vqc"},
             {"n_qubits", r.n_qubits},
             {"config", r.config},
             {"sequences", r.sequences},
             {"average_m", r.average_m},
             {"converged", r.converged}};
}

inline void from_json(const json& j, DisentangleRecord& r) {
    j.at("n_qubits").get_to(r.n_qubits);
    j.at("config").get_to(r.config);
    j.at("sequences").get_to(r.sequences);
    j.at("average_m").get_to(r.average_m);
    j.at("converged").get_to(r.converged);
}

inline void to_json(json& j, const RlConfig& c) {
    j = json{{"episode_len", c.episode_len},
             {"dataset_size", c.dataset_size},
             {"epochs_per_sequence", c.epochs_per_sequence},
             {"reward_stop", c.reward_stop},
             {"policy_learning_rate", c.policy_learning_rate},
             {"hidden_sizes", c.hidden_sizes}};
}

inline void from_json(const json& j, RlConfig& c) {
    j.at("episode_len").get_to(c.episode_len);
    j.at("dataset_size").get_to(c.dataset_size);
    j.at("epochs_per_sequence").get_to(c.epochs_per_sequence);
    j.at("reward_stop").get_to(c.reward_stop);
    j.at("policy_learning_rate").get_to(c.policy_learning_rate);
    j.at("hidden_sizes").get_to(c.hidden_sizes);
}

inline void to_json(json& j, const RlSequenceResult& r) {
    j = json{{"winning_actions", r.winning_actions},
             {"winning_indices", r.winning_indices},
             {"winning_reward", r.winning_reward},
             {"reward_max_history", r.reward_max_history},
             {"reward_mean_history", r.reward_mean_history},
             {"stop_epoch", r.stop_epoch},
             {"converged", r.converged}};
}

inline void from_json(const json& j, RlSequenceResult& r) {
    j.at("winning_actions").get_to(r.winning_actions);
    j.at("winning_indices").get_to(r.winning_indices);
    j.at("winning_reward").get_to(r.winning_reward);
    j.at("reward_max_history").get_to(r.reward_max_history);
    j.at("reward_mean_history").get_to(r.reward_mean_history);
    j.at("stop_epoch").get_to(r.stop_epoch);
    j.at("converged").get_to(r.converged);
}

inline void to_json(json& j, const RlRecord& r) {
    j = json{{"kind", "rl"},
             {"n_qubits", r.n_qubits},
             {"config", r.config},
             {"sequences", r.sequences},
             {"final_qubit", r.final_qubit},
             {"final_qubit_residual", 1.0 - prob_last_zero(r.final_qubit)},
             {"converged", r.converged}};
}

inline void from_json(const json& j, RlRecord& r) {
    j.at("n_qubits").get_to(r.n_qubits);
    j.at("config").get_to(r.config);
    j.at("sequences").get_to(r.sequences);
    j.at("final_qubit").get_to(r.final_qubit);
    j.at("converged").get_to(r.converged);
}

}  // namespace qtomo
