// Command-line driver: state generation, the variational and RL
// disentanglement pipelines, reconstruction, and the benchmark table/sweep
// emitters. Data goes to files (JSON/CSV); progress goes to stderr.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qtomo/bench.hpp"
#include "qtomo/rl.hpp"
#include "qtomo/serialize.hpp"
#include "qtomo/state.hpp"
#include "qtomo/vqc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qtomo;

namespace {

int fail_usage(const std::string& message) {
    std::cerr << "error: " << message << "\n";
    return 1;
}

int fail_run(const std::string& kind, const std::string& message, const json& detail = {}) {
    json err{{"error", kind}, {"message", message}};
    if (!detail.is_null() && !detail.empty()) err["detail"] = detail;
    std::cerr << err.dump() << "\n";
    return 2;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

json load_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return json::parse(in);
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    return s.substr(begin, s.find_last_not_of(" \t\r") - begin + 1);
}

/// Splice `--config FILE` into the argument list: each key=value line acts
/// as a default for the flag of the same name (explicit flags win), and
/// unknown keys fall through to the parser, which rejects them.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::string config_file;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw std::invalid_argument("--config needs a file");
            config_file = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_file = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (config_file.empty()) return out;

    std::vector<std::string> given;
    for (const std::string& a : out)
        if (a.rfind("--", 0) == 0) given.push_back(a.substr(0, a.find('=')));
    std::ifstream in(config_file);
    if (!in) throw std::invalid_argument("cannot read config file " + config_file);
    for (std::string line; std::getline(in, line);) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line is not key=value: '" + line + "'");
        const std::string key = "--" + trim(line.substr(0, eq));
        if (std::find(given.begin(), given.end(), key) == given.end())
            out.push_back(key + "=" + trim(line.substr(eq + 1)));
    }
    return out;
}

/// "2..6" (inclusive range), "1,3,5" or a single "4".
std::vector<int> parse_int_range(const std::string& text) {
    std::vector<int> out;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const int lo = std::stoi(text.substr(0, dots));
        const int hi = std::stoi(text.substr(dots + 2));
        if (hi < lo) throw std::invalid_argument("empty range '" + text + "'");
        for (int v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(std::stoi(item));
    if (out.empty()) throw std::invalid_argument("empty list '" + text + "'");
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(std::stod(item));
    if (out.empty()) throw std::invalid_argument("empty list '" + text + "'");
    return out;
}

ProgressFn make_progress(int every) {
    if (every <= 0) return {};
    return [every](const EpochEvent& e) {
        if (e.epoch % every == 0)
            std::fprintf(stderr, "seq %d (n=%d) epoch %d loss %.3e purity %.6f\n", e.sequence,
                         e.n_active, e.epoch, e.loss, e.purity);
    };
}

RlProgressFn make_rl_progress(int every) {
    if (every <= 0) return {};
    return [every](const RlEpochEvent& e) {
        if (e.epoch % every == 0)
            std::fprintf(stderr, "seq %d (n=%d) epoch %d reward max %.6f mean %.6f\n",
                         e.sequence, e.n_active, e.epoch, e.reward_max, e.reward_mean);
    };
}

std::string precision_tag(double p) {
    std::string tag = format_double(p);
    for (char& c : tag)
        if (c == '.') c = '_';
    return tag;
}

struct CommonOpts {
    std::uint64_t seed = 0;
    std::string output_dir = ".";
    std::string config_file;  // consumed by expand_config before parsing
    int log_every = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--seed", opts.seed, "Seed for every random draw in this run");
    cmd->add_option("--output-dir", opts.output_dir, "Directory for output files")
        ->envname("QTOMO_OUTPUT_DIR");
    cmd->add_option("--log-every", opts.log_every,
                    "Print progress to stderr every k epochs (0 = quiet)");
    cmd->add_option("--config", opts.config_file,
                    "Read flags from a key=value file (explicit flags win)");
}

StateVector load_or_generate(const std::string& state_file, int qubits, bool haar, Rng& rng) {
    if (!state_file.empty()) return load_json(state_file).get<StateVector>();
    return haar ? haar_random_state(qubits, rng) : random_state(qubits, rng);
}

// --- gen-state -------------------------------------------------------------

struct GenStateOpts {
    CommonOpts common;
    int qubits = 0;
    bool haar = false;
    std::string out;
};

int run_gen_state(const GenStateOpts& o) {
    Rng rng(o.common.seed);
    const StateVector s =
        o.haar ? haar_random_state(o.qubits, rng) : random_state(o.qubits, rng);
    const fs::path out =
        o.out.empty() ? fs::path(o.common.output_dir) / "state.json" : fs::path(o.out);
    write_text(out, json(s).dump(2) + "\n");
    std::fprintf(stderr, "wrote %s\n", out.string().c_str());
    return 0;
}

// --- vqc ---------------------------------------------------------------------

struct VqcOpts {
    CommonOpts common;
    std::string state_file;
    int qubits = 0;
    int r = 1;
    double tol = 1e-4;
    double precision = 0.0;
    int max_epochs = 5000;
    double learning_rate = 0.01;
    int purity_stride = 1;
    std::string out_record;
    std::string out_state;
};

int run_vqc(const VqcOpts& o) {
    if (o.state_file.empty() == (o.qubits == 0))
        return fail_usage("vqc: pass exactly one of --state or --qubits");
    Rng rng(o.common.seed);
    const StateVector psi = load_or_generate(o.state_file, o.qubits, false, rng);

    OptimizerConfig cfg;
    cfg.learning_rate = o.learning_rate;
    cfg.loss_tolerance = o.tol;
    cfg.max_epochs_per_sequence = o.max_epochs;
    cfg.repetition_r = o.r;
    cfg.purity_stride = o.purity_stride;
    if (o.precision > 0.0) cfg.precision_target = o.precision;

    const fs::path dir(o.common.output_dir);
    write_text(dir / "input_state.json", json(psi).dump(2) + "\n");

    const DisentangleRecord rec = disentangle(psi, cfg, rng, make_progress(o.common.log_every));
    const fs::path record_path =
        o.out_record.empty() ? dir / "vqc_record.json" : fs::path(o.out_record);
    write_text(record_path, json(rec).dump() + "\n");

    if (!rec.converged) {
        return fail_run("unconverged",
                        "sequence " + std::to_string(rec.sequences.size()) +
                            " did not reach the stop criterion",
                        {{"record", record_path.string()},
                         {"final_loss", rec.sequences.back().loss_trajectory.back()}});
    }

    const StateVector rebuilt = reconstruct(rec);
    const fs::path state_path =
        o.out_state.empty() ? dir / "reconstructed.json" : fs::path(o.out_state);
    write_text(state_path, json(rebuilt).dump(2) + "\n");
    std::printf("fidelity %.10g\n", fidelity(psi, rebuilt));
    std::printf("average_m %.10g\n", rec.average_m);
    return 0;
}

// --- rl ----------------------------------------------------------------------

struct RlOpts {
    CommonOpts common;
    std::string state_file;
    int qubits = 0;
    RlConfig cfg;
    std::string hidden = "64,64";
    std::string out_record;
};

int run_rl(const RlOpts& o) {
    if (o.state_file.empty() == (o.qubits == 0))
        return fail_usage("rl: pass exactly one of --state or --qubits");
    Rng rng(o.common.seed);
    const StateVector psi = load_or_generate(o.state_file, o.qubits, false, rng);

    RlConfig cfg = o.cfg;
    cfg.hidden_sizes.clear();
    for (int h : parse_int_range(o.hidden)) cfg.hidden_sizes.push_back(h);

    const RlRecord rec = rl_disentangle(psi, cfg, rng, make_rl_progress(o.common.log_every));
    const fs::path record_path = o.out_record.empty()
                                     ? fs::path(o.common.output_dir) / "rl_record.json"
                                     : fs::path(o.out_record);
    write_text(record_path, json(rec).dump() + "\n");

    if (!rec.converged) {
        return fail_run("synthesis-failure",
                        "no winning action sequence for subsystem of " +
                            std::to_string(rec.final_qubit.n_qubits) + " qubits",
                        {{"record", record_path.string()}});
    }
    std::printf("sequences %zu\n", rec.sequences.size());
    std::printf("final_qubit_residual %.10g\n", 1.0 - prob_last_zero(rec.final_qubit));
    return 0;
}

// --- reconstruct ---------------------------------------------------------------

struct ReconstructOpts {
    CommonOpts common;
    std::string record_file;
    std::string out;
    std::string expect;
};

int run_reconstruct(const ReconstructOpts& o) {
    const json j = load_json(o.record_file);
    StateVector rebuilt;
    const std::string kind = j.value("kind", "vqc");
    if (kind == "vqc")
        rebuilt = reconstruct(j.get<DisentangleRecord>());
    else if (kind == "rl")
        rebuilt = reconstruct(j.get<RlRecord>());
    else
        return fail_usage("reconstruct: unknown record kind '" + kind + "'");

    const fs::path out = o.out.empty() ? fs::path(o.common.output_dir) / "reconstructed.json"
                                       : fs::path(o.out);
    write_text(out, json(rebuilt).dump(2) + "\n");
    if (!o.expect.empty()) {
        const StateVector expected = load_json(o.expect).get<StateVector>();
        std::printf("fidelity %.10g\n", fidelity(expected, rebuilt));
    }
    return 0;
}

// --- bench ---------------------------------------------------------------------

struct Table1Opts {
    CommonOpts common;
    int qubits = 8;
    int r = 5;
    bool run = false;
    double tol = 1e-4;
    int max_epochs = 5000;
    std::string out;
};

int run_table1(const Table1Opts& o) {
    std::vector<BenchRow> rows;
    if (o.run) {
        OptimizerConfig cfg;
        cfg.repetition_r = o.r;
        cfg.loss_tolerance = o.tol;
        cfg.max_epochs_per_sequence = o.max_epochs;
        Rng rng(o.common.seed);
        const StateVector psi = random_state(o.qubits, rng);
        rows = run_sequential_bench(psi, cfg, rng, make_progress(o.common.log_every));
    } else {
        rows = gate_stats(o.qubits, o.r);
    }
    const fs::path out =
        o.out.empty() ? fs::path(o.common.output_dir) / "table1.csv" : fs::path(o.out);
    std::ostringstream csv;
    write_table1_csv(csv, rows);
    write_text(out, csv.str());
    std::fprintf(stderr, "wrote %s\n", out.string().c_str());
    if (o.run && !rows.back().converged)
        return fail_run("unconverged", "at least one sequence hit the epoch budget",
                        {{"csv", out.string()}});
    return 0;
}

struct SweepOpts {
    CommonOpts common;
    std::string qubits = "2..6";
    std::string precisions = "0.99,0.999,0.9999";
    int seeds = 10;
    int r = 2;
    int jobs = 1;
    double tol = 1e-4;
    int max_epochs = 5000;
    bool fresh = false;
    std::string out;
};

int run_sweep(const SweepOpts& o) {
    const std::vector<int> n_list = parse_int_range(o.qubits);
    const std::vector<double> precisions = parse_double_list(o.precisions);

    OptimizerConfig cfg;
    cfg.repetition_r = o.r;
    cfg.loss_tolerance = o.tol;
    cfg.max_epochs_per_sequence = o.max_epochs;

    const fs::path dir(o.common.output_dir);
    const fs::path cells_dir = dir / "sweep_cells";
    fs::create_directories(cells_dir);
    if (o.fresh) {
        fs::remove_all(cells_dir);
        fs::create_directories(cells_dir);
    }

    struct Task {
        int n;
        double precision;
        int seed;
        fs::path file;
    };
    std::vector<Task> tasks;
    for (int n : n_list)
        for (double p : precisions)
            for (int s = 0; s < o.seeds; ++s)
                tasks.push_back({n, p, s,
                                 cells_dir / ("n" + std::to_string(n) + "_p" + precision_tag(p) +
                                              "_s" + std::to_string(s) + ".json")});

    std::vector<SweepCell> cells(tasks.size());
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
            const Task& t = tasks[k];
            SweepCell cell;
            if (fs::exists(t.file)) {
                const json j = load_json(t.file);
                cell = {j.at("n").get<int>(), j.at("precision").get<double>(),
                        j.at("seed").get<int>(), j.at("fidelity").get<double>(),
                        j.at("converged").get<bool>()};
            } else {
                cell = run_sweep_cell(t.n, t.precision, t.seed, cfg, o.common.seed);
                const json j{{"n", cell.n_qubits},
                             {"precision", cell.precision},
                             {"seed", cell.seed},
                             {"fidelity", cell.fidelity},
                             {"converged", cell.converged}};
                write_text(t.file, j.dump() + "\n");
            }
            std::lock_guard<std::mutex> lock(mu);
            cells[k] = cell;
            if (o.common.log_every > 0)
                std::fprintf(stderr, "cell n=%d m=%g seed=%d fidelity=%.6f%s\n", cell.n_qubits,
                             cell.precision, cell.seed, cell.fidelity,
                             cell.converged ? "" : " (unconverged)");
        }
    };
    if (o.jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < o.jobs; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    const fs::path out = o.out.empty() ? dir / "sweep.csv" : fs::path(o.out);
    std::ostringstream csv;
    write_sweep_csv(csv, cells);
    write_text(out, csv.str());
    std::fprintf(stderr, "wrote %s\n", out.string().c_str());

    int unconverged = 0;
    for (int n : n_list) {
        for (double p : precisions) {
            double mean = 0.0;
            int count = 0;
            for (const SweepCell& c : cells) {
                if (c.n_qubits != n || c.precision != p || !c.converged) continue;
                mean += c.fidelity;
                ++count;
            }
            unconverged += o.seeds - count;
            if (count > 0) mean /= count;
            std::fprintf(stderr, "N=%d m=%g mean_fidelity=%.6f (%d/%d converged)\n", n, p, mean,
                         count, o.seeds);
        }
    }
    if (unconverged > 0)
        std::fprintf(stderr, "%d unconverged cells excluded from the means\n", unconverged);
    return 0;
}

struct SgdOpts {
    CommonOpts common;
    int qubits = 6;
    std::string r = "1..3";
    int seeds = 3;
    double tol = 1e-4;
    int max_epochs = 5000;
    std::string out;
};

int run_sgd(const SgdOpts& o) {
    OptimizerConfig cfg;
    cfg.loss_tolerance = o.tol;
    cfg.max_epochs_per_sequence = o.max_epochs;
    const std::vector<SgdRow> rows = sgd_comparison(o.qubits, parse_int_range(o.r), o.seeds,
                                                    cfg, o.common.seed,
                                                    make_progress(o.common.log_every));
    const fs::path out =
        o.out.empty() ? fs::path(o.common.output_dir) / "sgd.csv" : fs::path(o.out);
    std::ostringstream csv;
    write_sgd_csv(csv, rows);
    write_text(out, csv.str());
    std::fprintf(stderr, "wrote %s\n", out.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential disentanglement tomography toolkit"};
    app.require_subcommand(1);

    GenStateOpts gen;
    CLI::App* gen_cmd = app.add_subcommand("gen-state", "Generate a random state file");
    add_common(gen_cmd, gen.common);
    gen_cmd->add_option("--qubits", gen.qubits, "System size")->required()->check(CLI::Range(1, 24));
    gen_cmd->add_flag("--haar", gen.haar, "Sample Haar-uniformly instead of the biased default");
    gen_cmd->add_option("--out", gen.out, "Output file (default <output-dir>/state.json)");

    VqcOpts vqc;
    CLI::App* vqc_cmd =
        app.add_subcommand("vqc", "Variational disentanglement, reconstruction and fidelity");
    add_common(vqc_cmd, vqc.common);
    vqc_cmd->add_option("--state", vqc.state_file, "Input state JSON");
    vqc_cmd->add_option("--qubits", vqc.qubits, "Generate a random input of this size")
        ->check(CLI::Range(1, 24));
    vqc_cmd->add_option("--r", vqc.r, "Repetition factor (m = N_s * r blocks)")
        ->check(CLI::PositiveNumber);
    vqc_cmd->add_option("--tol", vqc.tol, "Per-sequence loss tolerance");
    vqc_cmd->add_option("--precision", vqc.precision,
                        "Stop each sequence at m_q >= this instead of the tolerance");
    vqc_cmd->add_option("--max-epochs", vqc.max_epochs, "Epoch budget per sequence");
    vqc_cmd->add_option("--lr", vqc.learning_rate, "Adam learning rate");
    vqc_cmd->add_option("--purity-stride", vqc.purity_stride, "Compute purity every k epochs");
    vqc_cmd->add_option("--out-record", vqc.out_record, "Run record path");
    vqc_cmd->add_option("--out-state", vqc.out_state, "Reconstructed state path");

    RlOpts rl;
    CLI::App* rl_cmd = app.add_subcommand("rl", "Discrete-gate synthesis by policy gradient");
    add_common(rl_cmd, rl.common);
    rl_cmd->add_option("--state", rl.state_file, "Input state JSON");
    rl_cmd->add_option("--qubits", rl.qubits, "Generate a random input of this size")
        ->check(CLI::Range(2, 24));
    rl_cmd->add_option("--episode-len", rl.cfg.episode_len, "Actions per episode (L)");
    rl_cmd->add_option("--dataset", rl.cfg.dataset_size, "Episodes per epoch (D)");
    rl_cmd->add_option("--epochs", rl.cfg.epochs_per_sequence, "Epoch budget per sequence (T)");
    rl_cmd->add_option("--reward-stop", rl.cfg.reward_stop, "Winning reward threshold");
    rl_cmd->add_option("--lr", rl.cfg.policy_learning_rate, "Policy Adam learning rate");
    rl_cmd->add_option("--hidden", rl.hidden, "Hidden layer sizes, e.g. 64,64");
    rl_cmd->add_option("--out-record", rl.out_record, "Run record path");

    ReconstructOpts rec;
    CLI::App* rec_cmd = app.add_subcommand("reconstruct", "Rebuild a state from a run record");
    add_common(rec_cmd, rec.common);
    rec_cmd->add_option("--record", rec.record_file, "Run record JSON")->required();
    rec_cmd->add_option("--out", rec.out, "Output state path");
    rec_cmd->add_option("--expect", rec.expect, "Reference state; prints the fidelity");

    CLI::App* bench_cmd = app.add_subcommand("bench", "Benchmark emitters");
    bench_cmd->require_subcommand(1);

    Table1Opts t1;
    CLI::App* t1_cmd = bench_cmd->add_subcommand("table1", "Gate/parameter accounting CSV");
    add_common(t1_cmd, t1.common);
    t1_cmd->add_option("--qubits", t1.qubits)->check(CLI::Range(1, 24));
    t1_cmd->add_option("--r", t1.r)->check(CLI::PositiveNumber);
    t1_cmd->add_flag("--run", t1.run, "Also train, filling the epochs and S_GD columns");
    t1_cmd->add_option("--tol", t1.tol, "Loss tolerance when training");
    t1_cmd->add_option("--max-epochs", t1.max_epochs);
    t1_cmd->add_option("--out", t1.out, "CSV path (default <output-dir>/table1.csv)");

    SweepOpts sweep;
    CLI::App* sweep_cmd = bench_cmd->add_subcommand("sweep", "Fidelity vs size and precision");
    add_common(sweep_cmd, sweep.common);
    sweep_cmd->add_option("--qubits", sweep.qubits, "Sizes, e.g. 2..6 or 2,4,6");
    sweep_cmd->add_option("--precisions", sweep.precisions, "Precision targets, comma-separated");
    sweep_cmd->add_option("--seeds", sweep.seeds, "Seeds per grid point")
        ->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--r", sweep.r, "Repetition factor")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads over sweep cells")
        ->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--tol", sweep.tol);
    sweep_cmd->add_option("--max-epochs", sweep.max_epochs);
    sweep_cmd->add_flag("--fresh", sweep.fresh, "Ignore checkpointed cells and recompute");
    sweep_cmd->add_option("--out", sweep.out, "CSV path (default <output-dir>/sweep.csv)");

    SgdOpts sgd;
    CLI::App* sgd_cmd =
        bench_cmd->add_subcommand("sgd", "Sequential vs non-sequential S_GD comparison");
    add_common(sgd_cmd, sgd.common);
    sgd_cmd->add_option("--qubits", sgd.qubits)->check(CLI::Range(2, 24));
    sgd_cmd->add_option("--r", sgd.r, "Repetition factors, e.g. 1..5");
    sgd_cmd->add_option("--seeds", sgd.seeds)->check(CLI::PositiveNumber);
    sgd_cmd->add_option("--tol", sgd.tol);
    sgd_cmd->add_option("--max-epochs", sgd.max_epochs);
    sgd_cmd->add_option("--out", sgd.out, "CSV path (default <output-dir>/sgd.csv)");

    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
    } catch (const std::exception& e) {
        return fail_usage(e.what());
    }
    std::vector<char*> argp;
    argp.reserve(args.size());
    for (std::string& a : args) argp.push_back(a.data());

    try {
        app.parse(static_cast<int>(argp.size()), argp.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (gen_cmd->parsed()) return run_gen_state(gen);
        if (vqc_cmd->parsed()) return run_vqc(vqc);
        if (rl_cmd->parsed()) return run_rl(rl);
        if (rec_cmd->parsed()) return run_reconstruct(rec);
        if (t1_cmd->parsed()) return run_table1(t1);
        if (sweep_cmd->parsed()) return run_sweep(sweep);
        if (sgd_cmd->parsed()) return run_sgd(sgd);
    } catch (const DegenerateProjection& e) {
        return fail_run("degenerate-projection", e.what());
    } catch (const std::invalid_argument& e) {
        return fail_usage(e.what());
    } catch (const std::exception& e) {
        return fail_run("exception", e.what());
    }
    return fail_usage("no subcommand given");
}
