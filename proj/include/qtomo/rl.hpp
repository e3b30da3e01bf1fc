#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qtomo/adam.hpp"
#include "qtomo/circuit.hpp"
#include "qtomo/density.hpp"
#include "qtomo/policy.hpp"
#include "qtomo/rng.hpp"
#include "qtomo/state.hpp"

namespace qtomo {

struct RlConfig {
    int episode_len = 10;      // L
    int dataset_size = 50;     // episodes per epoch
    int epochs_per_sequence = 100;
    double reward_stop = 1.0 - 1e-6;
    double policy_learning_rate = 0.003;
    std::vector<int> hidden_sizes = {64, 64};

    void validate() const {
        if (episode_len < 1 || dataset_size < 1 || epochs_per_sequence < 1 ||
            reward_stop <= 0 || reward_stop > 1 || policy_learning_rate <= 0)
            throw std::invalid_argument("RlConfig: values out of range");
        for (int h : hidden_sizes)
            if (h < 1) throw std::invalid_argument("RlConfig: hidden sizes must be positive");
    }
};

/// One sampled circuit configuration. reward is the terminal measured
/// probability (after all L actions); step_probs records the probability
/// after each action, which is where winning prefixes are detected — a
/// trajectory may pass through an exactly disentangled state and drift away
/// again before the episode ends.
struct Episode {
    std::vector<Action> actions;
    std::vector<int> chosen_indices;
    std::vector<double> step_probs;
    double reward = 0.0;

    double best_prob() const {
        double best = 0.0;
        for (double p : step_probs) best = std::max(best, p);
        return best;
    }
};

/// Encode a partial action list as L slots, each one-hot over d+1 symbols:
/// slot i carries the i-th chosen action index, or the trailing
/// identity/empty symbol. The empty list is the all-identity start set S_0.
inline std::vector<double> encode_state(const std::vector<int>& chosen, int episode_len, int d) {
    if (static_cast<int>(chosen.size()) > episode_len)
        throw std::invalid_argument("encode_state: more actions than episode slots");
    std::vector<double> x(static_cast<std::size_t>(episode_len) * (d + 1), 0.0);
    for (int slot = 0; slot < episode_len; ++slot) {
        const int symbol = slot < static_cast<int>(chosen.size()) ? chosen[slot] : d;
        x[static_cast<std::size_t>(slot) * (d + 1) + symbol] = 1.0;
    }
    return x;
}

/// Roll out one episode: at each of the L layers encode the actions chosen
/// so far, sample the next action from the policy's distribution and apply
/// it; the reward is the final state's m_q.
inline Episode sample_episode(const PolicyNet& net, const StateVector& input_state,
                              const RlConfig& cfg, Rng& rng) {
    if (input_state.n_qubits < 2)
        throw std::invalid_argument("sample_episode: need at least 2 qubits");
    const std::vector<Action> actions = action_set(input_state.n_qubits);
    const int d = static_cast<int>(actions.size());
    Episode ep;
    StateVector state = input_state;
    for (int t = 0; t < cfg.episode_len; ++t) {
        const std::vector<double> probs =
            policy_forward(net, encode_state(ep.chosen_indices, cfg.episode_len, d));
        const double u = rng.uniform01();
        int idx = d - 1;
        double cum = 0.0;
        for (int k = 0; k < d; ++k) {
            cum += probs[k];
            if (u < cum) {
                idx = k;
                break;
            }
        }
        ep.chosen_indices.push_back(idx);
        ep.actions.push_back(actions[idx]);
        state = apply_action(std::move(state), actions[idx]);
        ep.step_probs.push_back(prob_last_zero(state));
    }
    ep.reward = ep.step_probs.back();
    return ep;
}

/// REINFORCE loss  −Σ_s log P(a_s) ℛ(a_s)  over a batch of episodes, with
/// the episode's terminal reward weighting every step it took. Action
/// probabilities are re-evaluated under the current network; the gradient is
/// accumulated by backprop through the same forward caches.
inline std::pair<double, PolicyNet> policy_loss(const std::vector<Episode>& episodes,
                                                const PolicyNet& net) {
    if (episodes.empty()) throw std::invalid_argument("policy_loss: empty batch");
    const int d = net.output_dim;
    const int episode_len = net.input_dim / (d + 1);
    double loss = 0.0;
    PolicyNet grad = zeros_like(net);
    ForwardCache cache;
    std::vector<int> prefix;
    for (const Episode& ep : episodes) {
        if (ep.reward == 0.0) continue;  // zero-weight terms contribute nothing
        prefix.clear();
        for (int idx : ep.chosen_indices) {
            const std::vector<double> probs =
                policy_forward_cached(net, encode_state(prefix, episode_len, d), cache);
            loss -= std::log(probs[static_cast<std::size_t>(idx)]) * ep.reward;
            accumulate_logprob_gradient(net, cache, idx, ep.reward, grad);
            prefix.push_back(idx);
        }
    }
    return {loss, std::move(grad)};
}

/// Training outcome for one qubit's RL sequence. stop_epoch is the 1-based
/// epoch whose dataset produced the winner (0 for inputs that start
/// disentangled).
struct RlSequenceResult {
    std::vector<Action> winning_actions;
    std::vector<int> winning_indices;
    double winning_reward = 0.0;
    std::vector<double> reward_max_history;
    std::vector<double> reward_mean_history;
    int stop_epoch = 0;
    bool converged = false;
};

struct RlEpochEvent {
    int sequence = 0;
    int n_active = 0;
    int epoch = 0;
    double reward_max = 0.0;
    double reward_mean = 0.0;
};
using RlProgressFn = std::function<void(const RlEpochEvent&)>;

namespace detail {

/// Keep the winning episode only up to the first step at which the measured
/// probability reaches the stop threshold; trailing actions are discarded.
inline void truncate_winner(const Episode& winner, double reward_stop, RlSequenceResult& res) {
    for (std::size_t t = 0; t < winner.actions.size(); ++t) {
        res.winning_actions.push_back(winner.actions[t]);
        res.winning_indices.push_back(winner.chosen_indices[t]);
        if (winner.step_probs[t] >= reward_stop) {
            res.winning_reward = winner.step_probs[t];
            return;
        }
    }
    res.winning_reward = winner.reward;
}

/// Count qubits of the projected remainder that are stranded in a pure
/// non-basis state. Such a qubit can never be rotated back: once it becomes
/// the measured one, only CNOT targets touch it. The leading qubit is exempt
/// (it survives the whole pipeline and is reported as a residual).
inline int stranded_qubits(const StateVector& remainder) {
    int stranded = 0;
    for (int q = 2; q <= remainder.n_qubits; ++q) {
        const DensityMatrix rho = qubit_density(remainder, q);
        const double p0 = rho.at(0, 0).real();
        if (purity(rho) > 1.0 - 1e-9 && p0 > 1e-7 && p0 < 1.0 - 1e-7) ++stranded;
    }
    return stranded;
}

}  // namespace detail

/// Train a policy to disentangle the current last qubit: per epoch, sample a
/// dataset of episodes, record the max and mean of the episodes' best
/// achieved probabilities, and take one Adam step on the REINFORCE loss.
/// Training stops at the first episode that reaches reward_stop at any step;
/// if none appears within the epoch budget the sequence is reported
/// unconverged (synthesis is not always guaranteed).
inline RlSequenceResult train_rl_sequence(const StateVector& input_state, const RlConfig& cfg,
                                          Rng& rng, const RlProgressFn& progress = {},
                                          int sequence_index = 1) {
    cfg.validate();
    RlSequenceResult res;
    if (prob_last_zero(input_state) >= cfg.reward_stop) {
        res.winning_reward = prob_last_zero(input_state);
        res.converged = true;
        return res;
    }
    const int d = 7 * (input_state.n_qubits - 1);
    PolicyNet net =
        make_policy(cfg.episode_len * (d + 1), cfg.hidden_sizes, d, rng);
    AdamState opt(net.n_weights(), cfg.policy_learning_rate);

    std::vector<Episode> dataset;
    dataset.reserve(static_cast<std::size_t>(cfg.dataset_size));
    for (int epoch = 1; epoch <= cfg.epochs_per_sequence; ++epoch) {
        dataset.clear();
        bool have_winner = false;
        for (int k = 0; k < cfg.dataset_size; ++k) {
            dataset.push_back(sample_episode(net, input_state, cfg, rng));
            have_winner = have_winner || dataset.back().best_prob() >= cfg.reward_stop;
        }
        double max_r = 0.0, mean_r = 0.0;
        for (const Episode& ep : dataset) {
            max_r = std::max(max_r, ep.best_prob());
            mean_r += ep.best_prob();
        }
        mean_r /= static_cast<double>(dataset.size());
        res.reward_max_history.push_back(max_r);
        res.reward_mean_history.push_back(mean_r);
        if (progress)
            progress({sequence_index, input_state.n_qubits, epoch, max_r, mean_r});

        if (have_winner) {
            // Among this epoch's winners prefer the prefix whose projected
            // remainder leaves no qubit stranded, then the shortest one.
            int best_stranded = -1;
            std::size_t best_len = 0;
            for (const Episode& ep : dataset) {
                if (ep.best_prob() < cfg.reward_stop) continue;
                RlSequenceResult cand;
                detail::truncate_winner(ep, cfg.reward_stop, cand);
                StateVector evolved = input_state;
                for (const Action& a : cand.winning_actions)
                    evolved = apply_action(std::move(evolved), a);
                const int stranded =
                    detail::stranded_qubits(project_out_last(evolved).state);
                if (best_stranded < 0 || stranded < best_stranded ||
                    (stranded == best_stranded && cand.winning_actions.size() < best_len)) {
                    best_stranded = stranded;
                    best_len = cand.winning_actions.size();
                    res.winning_actions = std::move(cand.winning_actions);
                    res.winning_indices = std::move(cand.winning_indices);
                    res.winning_reward = cand.winning_reward;
                }
            }
            res.stop_epoch = epoch;
            res.converged = true;
            return res;
        }
        auto [loss, grad] = policy_loss(dataset, net);
        (void)loss;
        std::vector<double> flat = flatten(net);
        adam_step(opt, flat, flatten(grad));
        unflatten(net, flat);
    }
    res.stop_epoch = cfg.epochs_per_sequence;
    return res;
}

/// RL analogue of the sequential record: per-sequence winning action lists
/// plus the per-epoch reward curves. The last remaining qubit cannot be
/// rotated by the action set (every action needs a CNOT target), so it is
/// reported as-is in final_qubit together with its |0>-overlap residual.
struct RlRecord {
    int n_qubits = 0;
    RlConfig config;
    std::vector<RlSequenceResult> sequences;
    StateVector final_qubit;
    bool converged = false;
};

inline RlRecord rl_disentangle(const StateVector& psi, const RlConfig& cfg, Rng& rng,
                               const RlProgressFn& progress = {}) {
    if (psi.n_qubits < 2)
        throw std::invalid_argument("rl_disentangle: need at least 2 qubits");
    RlRecord rec;
    rec.n_qubits = psi.n_qubits;
    rec.config = cfg;
    StateVector current = psi;
    int j = 1;
    while (current.n_qubits >= 2) {
        RlSequenceResult res = train_rl_sequence(current, cfg, rng, progress, j);
        const bool ok = res.converged;
        rec.sequences.push_back(std::move(res));
        if (!ok) {
            rec.final_qubit = std::move(current);
            return rec;  // partial record, converged stays false
        }
        StateVector evolved = apply_circuit(
            current, actions_to_circuit(rec.sequences.back().winning_actions, current.n_qubits),
            {});
        current = project_out_last(evolved).state;
        ++j;
    }
    rec.final_qubit = std::move(current);
    rec.converged = true;
    return rec;
}

/// Rebuild the state from |0...0> by inverse application of the recorded
/// action circuits, mirroring the variational reconstruction. The residual
/// rotation of the final qubit is not invertible from measurements alone and
/// is left unresolved.
inline StateVector reconstruct(const RlRecord& rec) {
    if (rec.sequences.size() + 1 != static_cast<std::size_t>(rec.n_qubits) || !rec.converged)
        throw std::invalid_argument("reconstruct: RL record is incomplete");
    StateVector s = zero_state(rec.n_qubits);
    for (std::size_t j = rec.sequences.size(); j-- > 0;) {
        const int n_active = rec.n_qubits - static_cast<int>(j);
        s = apply_circuit_inverse(
            std::move(s), actions_to_circuit(rec.sequences[j].winning_actions, n_active), {});
    }
    return s;
}

}  // namespace qtomo
