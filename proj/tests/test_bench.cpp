#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "qtomo/bench.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace qtomo;

TEST_CASE("gate_stats reproduces the 8-qubit accounting table exactly", "[bench]") {
    const std::vector<BenchRow> rows = gate_stats(8, 5);
    REQUIRE(rows.size() == 9);
    const long long expected[8][2] = {{320, 960}, {245, 735}, {180, 540}, {125, 375},
                                      {80, 240},  {45, 135},  {20, 60},   {5, 15}};
    for (int j = 0; j < 8; ++j) {
        REQUIRE(rows[j].sequence_index == j + 1);
        REQUIRE(rows[j].gates == expected[j][0]);
        REQUIRE(rows[j].parameters == expected[j][1]);
        REQUIRE(rows[j].parameters == 3 * rows[j].gates);
        REQUIRE(rows[j].epochs == -1);
    }
    REQUIRE(rows.back().total);
    REQUIRE(rows.back().gates == 1020);
    REQUIRE(rows.back().parameters == 3060);

    REQUIRE_THROWS_AS(gate_stats(0, 5), std::invalid_argument);
    REQUIRE_THROWS_AS(gate_stats(8, 0), std::invalid_argument);
}

TEST_CASE("table1 CSV emission is byte-stable", "[bench]") {
    std::ostringstream os;
    write_table1_csv(os, gate_stats(8, 5));
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
    REQUIRE(os.str() == expected);
}

TEST_CASE("sequential bench on a product state costs zero descent steps", "[bench]") {
    OptimizerConfig cfg;
    Rng rng(81);
    const std::vector<BenchRow> rows = run_sequential_bench(zero_state(6), cfg, rng);
    for (const BenchRow& row : rows) {
        REQUIRE(row.epochs == 0);
        REQUIRE(row.s_gd == 0);
        REQUIRE(row.converged);
    }
}

TEST_CASE("sequential bench fills epochs and keeps the S_GD identity", "[bench]") {
    OptimizerConfig cfg;
    cfg.repetition_r = 1;
    Rng state_rng(82), rng(83);
    const StateVector psi = random_state(3, state_rng);
    const std::vector<BenchRow> rows = run_sequential_bench(psi, cfg, rng);
    REQUIRE(rows.size() == 4);
    long long total_sgd = 0;
    for (std::size_t j = 0; j + 1 < rows.size(); ++j) {
        REQUIRE(rows[j].converged);
        REQUIRE(rows[j].s_gd == rows[j].parameters * rows[j].epochs);
        total_sgd += rows[j].s_gd;
    }
    REQUIRE(rows.front().epochs > 0);
    REQUIRE(rows.back().s_gd == total_sgd);
}

TEST_CASE("the non-sequential circuit mirrors the stacked totals", "[bench]") {
    const ParamCircuit c = nonsequential_circuit(6, 2);
    long long v_count = 0;
    for (const GateOp& op : c.ops)
        if (op.kind == OpKind::ParamV) ++v_count;
    long long expected = 0;
    for (int ns = 1; ns <= 6; ++ns) expected += 2LL * ns * ns;
    REQUIRE(v_count == expected);
    REQUIRE(c.n_params == 3 * expected);
    REQUIRE(c.n_active == 6);

    // the widest stage comes first, the single-qubit tail last
    REQUIRE(c.ops.front().kind == OpKind::ParamV);
    REQUIRE(c.ops.front().param_slot == 0);
    REQUIRE(c.ops.back().kind == OpKind::ParamV);
    REQUIRE(c.ops.back().wire == 1);
    int max_wire_in_tail = 0;
    for (std::size_t i = c.ops.size() - 2; i < c.ops.size(); ++i)
        max_wire_in_tail = std::max(max_wire_in_tail, c.ops[i].wire);
    REQUIRE(max_wire_in_tail == 1);
}

TEST_CASE("the mean-marginal loss matches direct marginal computation", "[bench]") {
    Rng rng(84);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng.index(4));
        const StateVector s = haar_random_state(n, rng);
        const double via_weights = diag_expectation(s, mean_marginal_weights(n));
        double direct = 0.0;
        for (int q = 1; q <= n; ++q) direct += prob_qubit_zero(s, q);
        direct /= n;
        REQUIRE(std::abs(via_weights - direct) < 1e-12);
    }
}

TEST_CASE("non-sequential bench converges instantly on the zero state", "[bench]") {
    OptimizerConfig cfg;
    Rng rng(85);
    const BenchRow row = run_nonsequential_bench(zero_state(4), cfg, rng);
    REQUIRE(row.converged);
    REQUIRE(row.epochs == 0);
    REQUIRE(row.s_gd == 0);
}

TEST_CASE("non-sequential bench trains the joint circuit", "[bench]") {
    OptimizerConfig cfg;
    cfg.repetition_r = 1;
    Rng state_rng(86), rng(87);
    const StateVector psi = random_state(3, state_rng);
    const BenchRow row = run_nonsequential_bench(psi, cfg, rng);
    REQUIRE(row.converged);
    REQUIRE(row.epochs > 0);
    REQUIRE(row.parameters == 3LL * (9 + 4 + 1));
    REQUIRE(row.s_gd == row.parameters * row.epochs);
}

TEST_CASE("sgd_comparison normalizes by the largest non-sequential mean", "[bench]") {
    OptimizerConfig cfg;
    const std::vector<SgdRow> rows = sgd_comparison(3, {1}, 1, cfg, 88);
    REQUIRE(rows.size() == 2);
    double max_nonseq_norm = 0.0;
    for (const SgdRow& row : rows)
        if (!row.sequential) max_nonseq_norm = std::max(max_nonseq_norm, row.s_gd_normalized);
    REQUIRE(max_nonseq_norm == 1.0);

    std::ostringstream os;
    write_sgd_csv(os, rows);
    REQUIRE(os.str().rfind("r,scheme,s_gd,s_gd_normalized\n", 0) == 0);
}

TEST_CASE("fidelity_sweep aggregates converged cells", "[bench]") {
    OptimizerConfig cfg;
    cfg.repetition_r = 2;
    const SweepResult res = fidelity_sweep({2}, {0.999}, 2, cfg, 90, 2);
    REQUIRE(res.cells.size() == 2);
    REQUIRE(res.points.size() == 1);
    REQUIRE(res.points[0].converged_count == 2);
    REQUIRE(res.points[0].mean_fidelity > 0.95);

    // the same (n, seed) pair regenerates the same state across precisions
    const SweepCell again = run_sweep_cell(2, 0.999, 0, cfg, 90);
    REQUIRE(again.fidelity == res.cells[0].fidelity);

    std::ostringstream os;
    write_sweep_csv(os, res.cells);
    REQUIRE(os.str().rfind("n,precision,seed,fidelity,converged\n", 0) == 0);
}
