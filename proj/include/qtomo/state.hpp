#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qtomo/gates.hpp"
#include "qtomo/rng.hpp"

namespace qtomo {

/// Dense pure state over the computational basis. Qubit 1 is the most
/// significant bit of the basis label, so the last qubit (the measured and
/// disentangled one) is the least significant bit: basis states with the last
/// qubit in |0> sit at even indices.
struct StateVector {
    int n_qubits = 0;
    std::vector<cplx> amplitudes;

    std::size_t dim() const { return amplitudes.size(); }
};

/// Thrown when a projection onto the last qubit's |0> has vanishing weight.
struct DegenerateProjection : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kProjectionEpsilon = 1e-12;

inline std::size_t state_dim(int n_qubits) { return std::size_t{1} << n_qubits; }

/// Bit position (counted from the least significant end) of a 1-based qubit.
inline int qubit_bit(int n_qubits, int qubit) { return n_qubits - qubit; }

namespace detail {

inline void require_qubit(const StateVector& s, int qubit, const char* what) {
    if (qubit < 1 || qubit > s.n_qubits)
        throw std::invalid_argument(std::string(what) + ": qubit " + std::to_string(qubit) +
                                    " out of range for n_qubits=" + std::to_string(s.n_qubits));
}

/// In-place application of an arbitrary 2x2 matrix to one qubit. No
/// unitarity check; the backward gradient sweep applies non-unitary
/// derivative matrices through the same kernel.
inline void apply_mat2_inplace(StateVector& s, const Mat2& m, int qubit) {
    const std::size_t mask = std::size_t{1} << qubit_bit(s.n_qubits, qubit);
    const std::size_t lo_mask = mask - 1;
    const std::size_t hi_mask = ~lo_mask;
    const std::size_t half = s.dim() >> 1;
    for (std::size_t i = 0; i < half; ++i) {
        const std::size_t i0 = ((i & hi_mask) << 1) | (i & lo_mask);
        const std::size_t i1 = i0 | mask;
        const cplx a0 = s.amplitudes[i0];
        const cplx a1 = s.amplitudes[i1];
        s.amplitudes[i0] = m.m00 * a0 + m.m01 * a1;
        s.amplitudes[i1] = m.m10 * a0 + m.m11 * a1;
    }
}

inline void apply_cnot_inplace(StateVector& s, int control, int target) {
    const std::size_t cmask = std::size_t{1} << qubit_bit(s.n_qubits, control);
    const std::size_t tmask = std::size_t{1} << qubit_bit(s.n_qubits, target);
    const std::size_t d = s.dim();
    for (std::size_t i = 0; i < d; ++i) {
        if ((i & cmask) && !(i & tmask)) std::swap(s.amplitudes[i], s.amplitudes[i | tmask]);
    }
}

}  // namespace detail

inline double norm_sq(const StateVector& s) {
    double n = 0.0;
    for (const cplx& a : s.amplitudes) n += std::norm(a);
    return n;
}

/// |0...0> on n qubits.
inline StateVector zero_state(int n) {
    if (n < 1) throw std::invalid_argument("zero_state: n_qubits must be >= 1");
    StateVector s{n, std::vector<cplx>(state_dim(n), cplx{})};
    s.amplitudes[0] = 1.0;
    return s;
}

/// Random state with each unnormalized coefficient a + ib, a and b drawn
/// uniform on [0, 1), then normalized. Deterministic given the rng seed.
/// Note the deliberate first-quadrant bias; see haar_random_state for an
/// unbiased alternative.
inline StateVector random_state(int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("random_state: n_qubits must be >= 1");
    StateVector s{n, std::vector<cplx>(state_dim(n))};
    double norm = 0.0;
    for (cplx& a : s.amplitudes) {
        const double re = rng.uniform01();
        const double im = rng.uniform01();
        a = {re, im};
        norm += re * re + im * im;
    }
    const double scale = 1.0 / std::sqrt(norm);
    for (cplx& a : s.amplitudes) a *= scale;
    return s;
}

/// Haar-distributed random state: complex standard normal coefficients,
/// normalized.
inline StateVector haar_random_state(int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("haar_random_state: n_qubits must be >= 1");
    StateVector s{n, std::vector<cplx>(state_dim(n))};
    double norm = 0.0;
    for (cplx& a : s.amplitudes) {
        const double re = rng.normal();
        const double im = rng.normal();
        a = {re, im};
        norm += re * re + im * im;
    }
    const double scale = 1.0 / std::sqrt(norm);
    for (cplx& a : s.amplitudes) a *= scale;
    return s;
}

/// Apply a single-qubit unitary to qubit q (1-based).
inline StateVector apply_1q(StateVector state, const Mat2& u, int qubit) {
    detail::require_qubit(state, qubit, "apply_1q");
    if (!is_unitary(u)) throw std::invalid_argument("apply_1q: matrix is not unitary");
    detail::apply_mat2_inplace(state, u, qubit);
    return state;
}

inline StateVector apply_cnot(StateVector state, int control, int target) {
    detail::require_qubit(state, control, "apply_cnot");
    detail::require_qubit(state, target, "apply_cnot");
    if (control == target) throw std::invalid_argument("apply_cnot: control == target");
    detail::apply_cnot_inplace(state, control, target);
    return state;
}

/// Probability that the last qubit reads the given bit value (0 or 1).
inline double prob_last_bit(const StateVector& s, int bit_value) {
    double p = 0.0;
    const std::size_t d = s.dim();
    for (std::size_t i = static_cast<std::size_t>(bit_value); i < d; i += 2)
        p += std::norm(s.amplitudes[i]);
    return p;
}

/// Measured probability m_q of the last qubit occupying |0>.
inline double prob_last_zero(const StateVector& s) { return prob_last_bit(s, 0); }

/// Marginal probability of qubit q (1-based) reading |0>.
inline double prob_qubit_zero(const StateVector& s, int qubit) {
    detail::require_qubit(s, qubit, "prob_qubit_zero");
    const std::size_t mask = std::size_t{1} << qubit_bit(s.n_qubits, qubit);
    double p = 0.0;
    const std::size_t d = s.dim();
    for (std::size_t i = 0; i < d; ++i)
        if (!(i & mask)) p += std::norm(s.amplitudes[i]);
    return p;
}

struct Projection {
    StateVector state;  // subsystem with one qubit fewer
    double prob;        // projection probability
};

/// Keep the amplitudes with the last qubit in |0> (the even indices) and
/// renormalize. Fails when the projection weight is below
/// kProjectionEpsilon, i.e. when disentanglement did not steer the qubit
/// toward |0>.
inline Projection project_out_last(const StateVector& s) {
    if (s.n_qubits < 2)
        throw std::invalid_argument("project_out_last: need at least 2 qubits");
    const double prob = prob_last_zero(s);
    if (prob <= kProjectionEpsilon)
        throw DegenerateProjection("project_out_last: last-qubit |0> weight " +
                                   std::to_string(prob) + " below threshold");
    StateVector sub{s.n_qubits - 1, std::vector<cplx>(s.dim() >> 1)};
    const double scale = 1.0 / std::sqrt(prob);
    for (std::size_t i = 0; i < sub.dim(); ++i) sub.amplitudes[i] = s.amplitudes[2 * i] * scale;
    return {std::move(sub), prob};
}

/// Squared overlap |<a|b>|²; invariant under global phase of either side.
inline double fidelity(const StateVector& a, const StateVector& b) {
    if (a.n_qubits != b.n_qubits)
        throw std::invalid_argument("fidelity: qubit count mismatch");
    cplx overlap{};
    for (std::size_t i = 0; i < a.dim(); ++i)
        overlap += std::conj(a.amplitudes[i]) * b.amplitudes[i];
    return std::norm(overlap);
}

}  // namespace qtomo
