#pragma once

#include <algorithm>
#include <cstdio>
#include <functional>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qtomo/adam.hpp"
#include "qtomo/circuit.hpp"
#include "qtomo/rng.hpp"
#include "qtomo/state.hpp"
#include "qtomo/vqc.hpp"

namespace qtomo {

/// One row of the gate/parameter/epoch accounting table. epochs and s_gd
/// stay unfilled (-1) until an actual training run supplies them.
struct BenchRow {
    int sequence_index = 0;  // j; 0 for the totals row
    bool total = false;
    long long gates = 0;
    long long parameters = 0;
    long long epochs = -1;
    long long s_gd = -1;
    bool converged = true;
};

/// Deterministic circuit-size accounting: sequence j works on
/// N_s = n − j + 1 qubits with r·N_s² single-qubit gates and three
/// parameters per gate. A totals row is appended.
inline std::vector<BenchRow> gate_stats(int n, int r) {
    if (n < 1 || r < 1) throw std::invalid_argument("gate_stats: need n >= 1 and r >= 1");
    std::vector<BenchRow> rows;
    BenchRow total;
    total.total = true;
    for (int j = 1; j <= n; ++j) {
        const long long ns = n - j + 1;
        BenchRow row;
        row.sequence_index = j;
        row.gates = static_cast<long long>(r) * ns * ns;
        row.parameters = 3 * row.gates;
        rows.push_back(row);
        total.gates += row.gates;
        total.parameters += row.parameters;
    }
    rows.push_back(total);
    return rows;
}

/// Run the sequential optimizer and fill the epoch and S_GD columns,
/// S_GD = parameters × epochs per sequence.
inline std::vector<BenchRow> run_sequential_bench(const StateVector& psi,
                                                  const OptimizerConfig& cfg, Rng& rng,
                                                  const ProgressFn& progress = {}) {
    std::vector<BenchRow> rows = gate_stats(psi.n_qubits, cfg.repetition_r);
    const DisentangleRecord rec = disentangle(psi, cfg, rng, progress);
    BenchRow& total = rows.back();
    total.epochs = 0;
    total.s_gd = 0;
    for (std::size_t j = 0; j < rows.size() - 1; ++j) {
        BenchRow& row = rows[j];
        if (j < rec.sequences.size()) {
            row.epochs = rec.sequences[j].epochs_used;
            row.converged = rec.sequences[j].converged;
        } else {
            row.epochs = 0;  // never reached: an earlier sequence failed
            row.converged = false;
        }
        row.s_gd = row.parameters * row.epochs;
        total.epochs += row.epochs;
        total.s_gd += row.s_gd;
        total.converged = total.converged && row.converged;
    }
    return rows;
}

/// The non-sequential reference circuit: the same stack Û = Π Û_j, but
/// flattened onto the full register so all parameters train jointly.
inline ParamCircuit nonsequential_circuit(int n, int r) {
    ParamCircuit full;
    full.n_active = n;
    for (int ns = n; ns >= 1; --ns) append_circuit(full, sequence_circuit(ns, r));
    return full;
}

/// Train the full circuit against the all-qubit target: loss is one minus
/// the mean of the per-qubit |0> marginals, which vanishes exactly when the
/// evolved state is |0...0> up to phase. Reports a single row with the
/// combined gate/parameter totals.
inline BenchRow run_nonsequential_bench(const StateVector& psi, const OptimizerConfig& cfg,
                                        Rng& rng, const ProgressFn& progress = {}) {
    const ParamCircuit circuit = nonsequential_circuit(psi.n_qubits, cfg.repetition_r);
    BenchRow row;
    row.sequence_index = 1;
    row.gates = 0;
    for (const GateOp& op : circuit.ops)
        if (op.kind != OpKind::Cnot) ++row.gates;
    row.parameters = circuit.n_params;

    const double stop0 = cfg.stop_loss();
    if (1.0 - diag_expectation(psi, mean_marginal_weights(psi.n_qubits)) <= stop0) {
        row.epochs = 0;
        row.s_gd = 0;
        row.converged = true;
        return row;
    }

    std::vector<double> params(static_cast<std::size_t>(circuit.n_params));
    for (double& p : params) p = rng.uniform(-0.1, 0.1);
    const DiagonalWeights weights = mean_marginal_weights(psi.n_qubits);
    AdamState opt(params.size(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);
    const double stop = cfg.stop_loss();

    int epoch = 0;
    for (;; ++epoch) {
        const LossGrad ev = eval_loss_and_gradient(psi, circuit, params, weights);
        if (progress) progress({1, psi.n_qubits, epoch, ev.loss, 0.0});
        if (ev.loss <= stop) {
            row.converged = true;
            break;
        }
        if (epoch == cfg.max_epochs_per_sequence) {
            row.converged = false;
            break;
        }
        adam_step(opt, params, ev.gradient);
    }
    row.epochs = epoch;
    row.s_gd = row.parameters * row.epochs;
    return row;
}

/// Mean S_GD of both schemes per repetition factor, normalized by the
/// largest non-sequential mean (so that entry reads exactly 1).
struct SgdRow {
    int r = 0;
    bool sequential = false;
    double s_gd = 0.0;
    double s_gd_normalized = 0.0;
};

inline std::vector<SgdRow> sgd_comparison(int n, const std::vector<int>& r_list, int seeds,
                                          OptimizerConfig cfg, std::uint64_t seed,
                                          const ProgressFn& progress = {}) {
    if (r_list.empty() || seeds < 1)
        throw std::invalid_argument("sgd_comparison: need r values and seeds >= 1");
    std::vector<SgdRow> rows;
    double max_nonseq = 0.0;
    for (int r : r_list) {
        cfg.repetition_r = r;
        double seq_sum = 0.0, nonseq_sum = 0.0;
        for (int k = 0; k < seeds; ++k) {
            Rng state_rng(mix_seed(seed, static_cast<std::uint64_t>(k), 0));
            const StateVector psi = random_state(n, state_rng);
            Rng seq_rng(mix_seed(seed, static_cast<std::uint64_t>(k), 1));
            seq_sum += static_cast<double>(run_sequential_bench(psi, cfg, seq_rng, progress)
                                               .back()
                                               .s_gd);
            Rng nonseq_rng(mix_seed(seed, static_cast<std::uint64_t>(k), 2));
            nonseq_sum += static_cast<double>(
                run_nonsequential_bench(psi, cfg, nonseq_rng, progress).s_gd);
        }
        rows.push_back({r, true, seq_sum / seeds, 0.0});
        rows.push_back({r, false, nonseq_sum / seeds, 0.0});
        max_nonseq = std::max(max_nonseq, nonseq_sum / seeds);
    }
    for (SgdRow& row : rows) row.s_gd_normalized = row.s_gd / max_nonseq;
    return rows;
}

/// One reconstruction experiment of the precision sweep.
struct SweepCell {
    int n_qubits = 0;
    double precision = 0.0;
    int seed = 0;
    double fidelity = 0.0;
    bool converged = false;
};

/// Aggregate over seeds at one (N, precision) grid point; unconverged runs
/// are excluded from the mean and counted.
struct SweepPoint {
    int n_qubits = 0;
    double precision = 0.0;
    double mean_fidelity = 0.0;
    int seeds = 0;
    int converged_count = 0;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    std::vector<SweepPoint> points;
};

/// The state depends on (n, seed) only, so fidelities are paired across
/// precision levels.
inline SweepCell run_sweep_cell(int n, double precision, int seed_index, OptimizerConfig cfg,
                                std::uint64_t master_seed) {
    Rng state_rng(mix_seed(master_seed, static_cast<std::uint64_t>(n),
                           static_cast<std::uint64_t>(seed_index) << 1));
    const StateVector psi = random_state(n, state_rng);
    Rng opt_rng(mix_seed(master_seed, static_cast<std::uint64_t>(n),
                         (static_cast<std::uint64_t>(seed_index) << 1) | 1));
    cfg.precision_target = precision;
    SweepCell cell{n, precision, seed_index, 0.0, false};
    const DisentangleRecord rec = disentangle(psi, cfg, opt_rng);
    if (rec.converged) {
        cell.fidelity = fidelity(psi, reconstruct(rec));
        cell.converged = true;
    }
    return cell;
}

/// Reconstruction fidelity across system sizes and precision targets,
/// averaged over seeded random states. Cells are independent; jobs > 1 fans
/// them out over a small thread pool.
inline SweepResult fidelity_sweep(const std::vector<int>& n_list,
                                  const std::vector<double>& precision_list, int seeds,
                                  const OptimizerConfig& cfg, std::uint64_t master_seed,
                                  int jobs = 1,
                                  const std::function<void(const SweepCell&)>& on_cell = {}) {
    if (n_list.empty() || precision_list.empty() || seeds < 1)
        throw std::invalid_argument("fidelity_sweep: empty grid");
    struct Task {
        int n;
        double precision;
        int seed;
    };
    std::vector<Task> tasks;
    for (int n : n_list)
        for (double p : precision_list)
            for (int s = 0; s < seeds; ++s) tasks.push_back({n, p, s});

    SweepResult out;
    out.cells.resize(tasks.size());
    std::mutex mu;
    std::size_t next = 0;
    auto worker = [&] {
        for (;;) {
            std::size_t k;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next >= tasks.size()) return;
                k = next++;
            }
            SweepCell cell =
                run_sweep_cell(tasks[k].n, tasks[k].precision, tasks[k].seed, cfg, master_seed);
            {
                std::lock_guard<std::mutex> lock(mu);
                out.cells[k] = cell;
                if (on_cell) on_cell(cell);
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    for (int n : n_list) {
        for (double p : precision_list) {
            SweepPoint pt{n, p, 0.0, seeds, 0};
            for (const SweepCell& c : out.cells) {
                if (c.n_qubits != n || c.precision != p) continue;
                if (c.converged) {
                    pt.mean_fidelity += c.fidelity;
                    ++pt.converged_count;
                }
            }
            if (pt.converged_count > 0) pt.mean_fidelity /= pt.converged_count;
            out.points.push_back(pt);
        }
    }
    return out;
}

// --- CSV emission; column orders are part of the external interface. ---

inline void write_table1_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
    os << "j,gates,parameters,epochs,s_gd\n";
    for (const BenchRow& row : rows) {
        if (row.total)
            os << "total";
        else
            os << row.sequence_index;
        os << ',' << row.gates << ',' << row.parameters << ',';
        if (row.epochs >= 0) os << row.epochs;
        os << ',';
        if (row.s_gd >= 0) os << row.s_gd;
        os << '\n';
    }
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells) {
    os << "n,precision,seed,fidelity,converged\n";
    for (const SweepCell& c : cells) {
        os << c.n_qubits << ',' << format_double(c.precision) << ',' << c.seed << ',';
        if (c.converged) os << format_double(c.fidelity);
        os << ',' << (c.converged ? 1 : 0) << '\n';
    }
}

inline void write_sgd_csv(std::ostream& os, const std::vector<SgdRow>& rows) {
    os << "r,scheme,s_gd,s_gd_normalized\n";
    for (const SgdRow& row : rows) {
        os << row.r << ',' << (row.sequential ? "sequential" : "nonsequential") << ','
           << format_double(row.s_gd) << ',' << format_double(row.s_gd_normalized) << '\n';
    }
}

}  // namespace qtomo
