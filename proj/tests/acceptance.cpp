// Acceptance suite: runs the end-to-end quality gates and prints one
// PASS/FAIL line per criterion. An optional argument selects a single
// criterion by number.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qtomo/bench.hpp"
#include "qtomo/circuit.hpp"
#include "qtomo/density.hpp"
#include "qtomo/policy.hpp"
#include "qtomo/rl.hpp"
#include "qtomo/rng.hpp"
#include "qtomo/state.hpp"
#include "qtomo/vqc.hpp"

namespace fs = std::filesystem;
using namespace qtomo;

namespace {

constexpr double kPi = 3.14159265358979323846;

StateVector bell_state() { return StateVector{2, {M_SQRT1_2, 0.0, 0.0, M_SQRT1_2}}; }

StateVector ghz_state(int n) {
    StateVector s{n, std::vector<cplx>(state_dim(n), cplx{})};
    s.amplitudes.front() = M_SQRT1_2;
    s.amplitudes.back() = M_SQRT1_2;
    return s;
}

bool gradients_close(const std::vector<double>& a, const std::vector<double>& b,
                     double rtol = 1e-5, double atol = 1e-8) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = std::abs(a[i] - b[i]);
        if (diff > atol && diff > rtol * std::max(std::abs(a[i]), std::abs(b[i]))) return false;
    }
    return true;
}

double replay_reward(const StateVector& input, const std::vector<Action>& actions) {
    StateVector s = input;
    for (const Action& a : actions) s = apply_action(std::move(s), a);
    return prob_last_zero(s);
}

// ---------------------------------------------------------------------------
// 1. Deterministic accounting table through the CLI.
bool criterion_table1(std::ostream& log) {
    const char* cli = std::getenv("QTOMO_CLI");
    if (!cli) {
        log << "QTOMO_CLI is not set\n";
        return false;
    }
    const fs::path dir = fs::temp_directory_path() / "qtomo_acceptance_table1";
    fs::remove_all(dir);
    fs::create_directories(dir);

    const std::string cmd = std::string(cli) + " bench table1 --qubits 8 --r 5 --output-dir " +
                            dir.string() + " >/dev/null 2>&1";
    const auto start = std::chrono::steady_clock::now();
    const int rc = std::system(cmd.c_str());
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (rc != 0) {
        log << "CLI exited with " << rc << "\n";
        return false;
    }

    std::ifstream in(dir / "table1.csv");
    std::ostringstream got;
    got << in.rdbuf();
    const std::string expected =
        "j,gates,parameters,epochs,s_gd\n"
        "1,320,960,,\n"
        "2,245,735,,\n"
        "3,180,540,,\n"
        "4,125,375,,\n"
        "5,80,240,,\n"
        "6,45,135,,\n"
        "7,20,60,,\n"
        "8,5,15,,\n"
        "total,1020,3060,,\n";
    log << "runtime " << elapsed << " s\n";
    if (got.str() != expected) {
        log << "table1.csv does not match the expected columns\n" << got.str();
        return false;
    }
    return elapsed < 1.0;
}

// ---------------------------------------------------------------------------
// 2. Sequential VQC end to end on 5-qubit random states.
bool criterion_vqc_end_to_end(std::ostream& log) {
    OptimizerConfig cfg;
    cfg.repetition_r = 4;
    cfg.loss_tolerance = 1e-4;
    cfg.max_epochs_per_sequence = 5000;

    int good_fidelity = 0;
    bool all_converged = true, purity_ok = true;
    for (int seed = 0; seed < 10; ++seed) {
        Rng state_rng(mix_seed(0xACC2, seed, 0));
        const StateVector psi = random_state(5, state_rng);
        Rng rng(mix_seed(0xACC2, seed, 1));
        const DisentangleRecord rec = disentangle(psi, cfg, rng);
        if (!rec.converged || rec.sequences.size() != 5) {
            all_converged = false;
            log << "seed " << seed << ": unconverged\n";
            continue;
        }
        for (const SequenceResult& s : rec.sequences) {
            if (s.epochs_used > 5000) all_converged = false;
            if (s.purity_trajectory.back() < 0.999) {
                purity_ok = false;
                log << "seed " << seed << ": final purity " << s.purity_trajectory.back()
                    << "\n";
            }
        }
        const double fid = fidelity(psi, reconstruct(rec));
        log << "seed " << seed << ": fidelity " << fid << "\n";
        if (fid >= 0.99) ++good_fidelity;
    }
    log << good_fidelity << "/10 seeds at fidelity >= 0.99\n";
    return all_converged && purity_ok && good_fidelity >= 9;
}

// ---------------------------------------------------------------------------
// 3. Fidelity-vs-size trend across precision targets.
bool criterion_sweep_trend(std::ostream& log) {
    OptimizerConfig cfg;
    cfg.repetition_r = 2;
    const std::vector<int> n_list{2, 3, 4, 5, 6};
    const std::vector<double> precisions{0.99, 0.999, 0.9999};
    const SweepResult sweep = fidelity_sweep(n_list, precisions, 10, cfg, 0xACC3, 2);

    auto mean_at = [&](int n, double p) -> const SweepPoint* {
        for (const SweepPoint& pt : sweep.points)
            if (pt.n_qubits == n && pt.precision == p) return &pt;
        return nullptr;
    };

    bool ok = true;
    for (const SweepPoint& pt : sweep.points) {
        log << "N=" << pt.n_qubits << " m=" << pt.precision << " mean_F=" << pt.mean_fidelity
            << " converged=" << pt.converged_count << "/" << pt.seeds << "\n";
        if (pt.converged_count < 8) {
            log << "too many unconverged runs at this grid point\n";
            ok = false;
        }
    }

    for (int n : n_list) {
        const SweepPoint* pt = mean_at(n, 0.9999);
        if (!pt || pt->mean_fidelity < 0.995) {
            log << "mean fidelity below 0.995 at m=0.9999, N=" << n << "\n";
            ok = false;
        }
    }

    int inversions = 0;
    for (std::size_t i = 0; i + 1 < n_list.size(); ++i) {
        const double f_lo = mean_at(n_list[i], 0.99)->mean_fidelity;
        const double f_hi = mean_at(n_list[i + 1], 0.99)->mean_fidelity;
        if (f_hi > f_lo + 1e-12) {
            ++inversions;
            if (f_hi - f_lo > 0.005) {
                log << "inversion of " << f_hi - f_lo << " at N=" << n_list[i + 1] << "\n";
                ok = false;
            }
        }
    }
    if (inversions > 1) {
        log << inversions << " inversions in the m=0.99 trend\n";
        ok = false;
    }

    for (int n : {4, 5, 6}) {
        if (mean_at(n, 0.99)->mean_fidelity >= mean_at(n, 0.9999)->mean_fidelity) {
            log << "m=0.99 not below m=0.9999 at N=" << n << "\n";
            ok = false;
        }
    }
    return ok;
}

// ---------------------------------------------------------------------------
// 4. Sequential scheme beats the non-sequential one in S_GD.
bool criterion_sgd_ordering(std::ostream& log) {
    OptimizerConfig cfg;
    cfg.loss_tolerance = 1e-4;
    bool ok = true;
    for (int r : {1, 2, 3}) {
        cfg.repetition_r = r;
        long long seq_total = 0, nonseq_total = 0;
        for (int seed = 0; seed < 3; ++seed) {
            Rng state_rng(mix_seed(0xACC4, r, 2 * seed));
            const StateVector psi = random_state(6, state_rng);
            Rng seq_rng(mix_seed(0xACC4, r, 2 * seed + 1));
            seq_total += run_sequential_bench(psi, cfg, seq_rng).back().s_gd;
            Rng nonseq_rng(mix_seed(0xACC4, r + 100, seed));
            nonseq_total += run_nonsequential_bench(psi, cfg, nonseq_rng).s_gd;
        }
        const double ratio =
            static_cast<double>(nonseq_total) / static_cast<double>(seq_total);
        log << "r=" << r << ": sequential " << seq_total << ", non-sequential " << nonseq_total
            << " (ratio " << ratio << ")\n";
        if (seq_total >= nonseq_total) ok = false;
    }
    return ok;
}

// ---------------------------------------------------------------------------
// 5. RL synthesis on Bell and GHZ_3.
bool criterion_rl_synthesis(std::ostream& log) {
    const RlConfig cfg;
    bool ok = true;
    int case_index = 0;
    for (const StateVector& input : {bell_state(), ghz_state(3)}) {
        int successes = 0;
        for (int seed = 0; seed < 10; ++seed) {
            Rng rng(mix_seed(0xACC5, case_index, seed));
            const RlRecord rec = rl_disentangle(input, cfg, rng);
            if (!rec.converged) continue;

            bool replay_ok = true;
            StateVector current = input;
            for (const RlSequenceResult& s : rec.sequences) {
                const double replayed = replay_reward(current, s.winning_actions);
                if (std::abs(replayed - s.winning_reward) > 1e-12 ||
                    s.winning_reward < cfg.reward_stop ||
                    s.stop_epoch > cfg.epochs_per_sequence) {
                    replay_ok = false;
                    break;
                }
                StateVector evolved = current;
                for (const Action& a : s.winning_actions)
                    evolved = apply_action(std::move(evolved), a);
                current = project_out_last(evolved).state;
            }
            if (replay_ok) ++successes;
        }
        log << (case_index == 0 ? "Bell" : "GHZ_3") << ": " << successes
            << "/10 seeds synthesized\n";
        if (successes < 8) ok = false;
        ++case_index;
    }
    return ok;
}

// ---------------------------------------------------------------------------
// 6. RL inverts states prepared from its own action set.
bool criterion_rl_self_inversion(std::ostream& log) {
    const RlConfig cfg;
    int successes = 0;
    for (int seed = 0; seed < 10; ++seed) {
        Rng prep_rng(mix_seed(0xACC6, seed, 0));
        const std::vector<Action> actions = action_set(5);
        StateVector psi = zero_state(5);
        for (int k = 0; k < 8; ++k)
            psi = apply_action(std::move(psi), actions[prep_rng.index(actions.size())]);

        Rng rng(mix_seed(0xACC6, seed, 1));
        const RlRecord rec = rl_disentangle(psi, cfg, rng);
        bool all_won = rec.converged;
        for (const RlSequenceResult& s : rec.sequences)
            all_won = all_won && s.winning_reward >= cfg.reward_stop;
        log << "seed " << seed << ": " << (all_won ? "disentangled" : "failed") << "\n";
        if (all_won) ++successes;
    }
    log << successes << "/10 seeds fully disentangled\n";
    return successes >= 7;
}

// ---------------------------------------------------------------------------
// 7. Gradient oracles: adjoint and policy gradients vs finite differences.
bool criterion_gradient_oracles(std::ostream& log) {
    Rng rng(0xACC7);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + trial % 3;
        const StateVector s = haar_random_state(n, rng);
        const ParamCircuit c = sequence_circuit(n, 1 + trial % 2);
        std::vector<double> params(static_cast<std::size_t>(c.n_params));
        for (double& p : params) p = rng.uniform(-kPi, kPi);

        const std::vector<double> adj = loss_gradient(s, c, params);
        std::vector<double> fd(params.size());
        const double h = 1e-6;
        for (std::size_t k = 0; k < params.size(); ++k) {
            const double saved = params[k];
            params[k] = saved + h;
            const double up = sequence_loss(s, c, params);
            params[k] = saved - h;
            const double down = sequence_loss(s, c, params);
            params[k] = saved;
            fd[k] = (up - down) / (2.0 * h);
        }
        if (!gradients_close(adj, fd)) {
            log << "adjoint gradient mismatch on trial " << trial << "\n";
            return false;
        }
    }
    log << "adjoint gradient: 100 instances matched\n";

    const int d = 7, episode_len = 5;
    for (int trial = 0; trial < 100; ++trial) {
        PolicyNet net = make_policy(episode_len * (d + 1), {16, 16}, d, rng);
        std::vector<Episode> episodes(2);
        for (Episode& ep : episodes) {
            for (int t = 0; t < episode_len; ++t)
                ep.chosen_indices.push_back(static_cast<int>(rng.index(d)));
            ep.reward = rng.uniform01();
        }
        const auto [loss, grad] = policy_loss(episodes, net);
        (void)loss;
        const std::vector<double> analytic = flatten(grad);

        std::vector<double> flat = flatten(net);
        std::vector<double> fd(flat.size());
        const double h = 1e-6;
        for (std::size_t k = 0; k < flat.size(); ++k) {
            const double saved = flat[k];
            flat[k] = saved + h;
            unflatten(net, flat);
            const double up = policy_loss(episodes, net).first;
            flat[k] = saved - h;
            unflatten(net, flat);
            const double down = policy_loss(episodes, net).first;
            flat[k] = saved;
            fd[k] = (up - down) / (2.0 * h);
        }
        unflatten(net, flat);
        if (!gradients_close(analytic, fd)) {
            log << "policy gradient mismatch on trial " << trial << "\n";
            return false;
        }
    }
    log << "policy gradient: 100 instances matched\n";
    return true;
}

// ---------------------------------------------------------------------------
// 8. Invariant suite.
bool criterion_invariants(std::ostream& log) {
    Rng rng(0xACC8);
    bool ok = true;
    auto expect = [&](bool cond, const char* name) {
        log << (cond ? "ok   " : "FAIL ") << name << "\n";
        ok = ok && cond;
    };

    bool norms = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + static_cast<int>(rng.index(6));
        StateVector s = haar_random_state(n, rng);
        const VParams p{rng.uniform(-kPi, kPi), rng.uniform(-kPi, kPi), rng.uniform(-kPi, kPi)};
        const int q = 1 + static_cast<int>(rng.index(n));
        s = apply_1q(std::move(s), v_gate(p), q);
        if (n >= 2) {
            const int c = 1 + static_cast<int>(rng.index(n - 1));
            s = apply_cnot(std::move(s), c, n);
        }
        norms = norms && std::abs(norm_sq(s) - 1.0) < 1e-12;
    }
    expect(norms, "norm preservation over 1000 randomized gate applications");

    bool probs = true;
    for (int trial = 0; trial < 200; ++trial) {
        const StateVector s = haar_random_state(2 + static_cast<int>(rng.index(4)), rng);
        probs = probs && std::abs(prob_last_bit(s, 0) + prob_last_bit(s, 1) - 1.0) < 1e-12;
    }
    expect(probs, "last-qubit outcome probabilities sum to one");

    bool purity_bounds = true, schmidt = true, density_ok = true;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.index(4));
        const StateVector s = haar_random_state(n, rng);
        const DensityMatrix rho = reduced_density(s);
        const double p = purity(rho);
        purity_bounds =
            purity_bounds && p <= 1.0 + 1e-12 && p >= 1.0 / static_cast<double>(rho.dim) - 1e-12;

        DensityMatrix last{2, std::vector<cplx>(4)};
        for (std::size_t k = 0; k < s.dim() / 2; ++k)
            for (std::size_t a = 0; a < 2; ++a)
                for (std::size_t b = 0; b < 2; ++b)
                    last.at(a, b) += s.amplitudes[2 * k + a] * std::conj(s.amplitudes[2 * k + b]);
        schmidt = schmidt && std::abs(p - purity(last)) < 1e-10;

        double trace = 0.0, herm = 0.0;
        for (std::size_t i = 0; i < rho.dim; ++i) {
            trace += rho.at(i, i).real();
            for (std::size_t j = 0; j < rho.dim; ++j)
                herm = std::max(herm, std::abs(rho.at(i, j) - std::conj(rho.at(j, i))));
        }
        density_ok = density_ok && std::abs(trace - 1.0) < 1e-12 && herm < 1e-10;
    }
    expect(purity_bounds, "purity within [1/dim, 1]");
    expect(schmidt, "Schmidt purity symmetry across the last-qubit split");
    expect(density_ok, "reduced density is Hermitian with unit trace");

    bool phases = true;
    const StateVector psi = haar_random_state(3, rng);
    for (double theta : {kPi / 7.0, kPi / 3.0, 1.0}) {
        StateVector rotated = psi;
        const cplx phase{std::cos(theta), std::sin(theta)};
        for (cplx& a : rotated.amplitudes) a *= phase;
        phases = phases && std::abs(fidelity(psi, rotated) - 1.0) < 1e-12;
    }
    expect(phases, "fidelity is global-phase invariant");

    bool softmax_ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const int d = 2 + static_cast<int>(rng.index(27));
        PolicyNet net = make_policy(d + 3, {8}, d, rng);
        std::vector<double> x(static_cast<std::size_t>(d + 3));
        for (double& v : x) v = rng.uniform(-2, 2);
        const std::vector<double> p = policy_forward(net, x);
        double sum = 0.0, minp = 1.0;
        for (double v : p) {
            sum += v;
            minp = std::min(minp, v);
        }
        softmax_ok = softmax_ok && std::abs(sum - 1.0) < 1e-10 && minp > 0.0;
    }
    expect(softmax_ok, "softmax outputs normalize over 1000 random nets");

    // dominant eigenvector of the partial trace vs the projected subsystem
    OptimizerConfig cfg;
    cfg.repetition_r = 2;
    bool eig_ok = true;
    for (int trial = 0; trial < 5; ++trial) {
        Rng state_rng(mix_seed(0xACC8, 17, trial));
        const StateVector input = random_state(3, state_rng);
        Rng opt_rng(mix_seed(0xACC8, 18, trial));
        const SequenceResult res = run_sequence(input, cfg, opt_rng);
        if (!res.converged) {
            eig_ok = false;
            continue;
        }
        const StateVector evolved = apply_circuit(input, res.circuit, res.params);
        const StateVector projected = project_out_last(evolved).state;
        const DensityMatrix rho = reduced_density(evolved);

        StateVector eigvec{projected.n_qubits, std::vector<cplx>(rho.dim)};
        for (std::size_t i = 0; i < rho.dim; ++i) eigvec.amplitudes[i] = {1.0, 0.3};
        for (int it = 0; it < 500; ++it) {
            std::vector<cplx> next(rho.dim);
            for (std::size_t i = 0; i < rho.dim; ++i) {
                cplx acc{};
                for (std::size_t j = 0; j < rho.dim; ++j) acc += rho.at(i, j) * eigvec.amplitudes[j];
                next[i] = acc;
            }
            double norm = 0.0;
            for (const cplx& v : next) norm += std::norm(v);
            norm = std::sqrt(norm);
            for (cplx& v : next) v /= norm;
            eigvec.amplitudes = std::move(next);
        }
        eig_ok = eig_ok && fidelity(projected, eigvec) >= 1.0 - 1e-6;
    }
    expect(eig_ok, "projection agrees with the partial trace's dominant eigenvector");

    Rng d1(424242), d2(424242);
    expect(random_state(4, d1).amplitudes == random_state(4, d2).amplitudes,
           "random_state is bit-identical per seed");

    return ok;
}

struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::ostream&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "Table 1 determinism through the CLI", criterion_table1},
        {2, "sequential VQC end-to-end at N=5", criterion_vqc_end_to_end},
        {3, "fidelity trend over N and precision", criterion_sweep_trend},
        {4, "sequential vs non-sequential S_GD ordering", criterion_sgd_ordering},
        {5, "RL synthesis on Bell and GHZ_3", criterion_rl_synthesis},
        {6, "RL self-inversion of action-prepared states", criterion_rl_self_inversion},
        {7, "gradient oracles vs finite differences", criterion_gradient_oracles},
        {8, "invariant suite", criterion_invariants},
    };

    int selected = 0;
    if (argc > 1) selected = std::atoi(argv[1]);

    int failures = 0, ran = 0;
    for (const Criterion& c : criteria) {
        if (selected != 0 && c.id != selected) continue;
        ++ran;
        std::ostringstream log;
        const bool passed = c.run(log);
        std::cout << (passed ? "PASS " : "FAIL ") << c.id << ". " << c.name << "\n";
        std::istringstream lines(log.str());
        for (std::string line; std::getline(lines, line);)
            std::cout << "      " << line << "\n";
        if (!passed) ++failures;
    }
    if (ran == 0) {
        std::cerr << "unknown criterion " << selected << "\n";
        return 1;
    }
    std::cout << (failures == 0 ? "ALL PASS" : "FAILURES: " + std::to_string(failures)) << " ("
              << ran << " criteria)\n";
    return failures == 0 ? 0 : 1;
}
