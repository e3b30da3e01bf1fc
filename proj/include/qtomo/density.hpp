#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qtomo/state.hpp"

namespace qtomo {

/// Dense Hermitian matrix with unit trace, row-major.
struct DensityMatrix {
    std::size_t dim = 0;
    std::vector<cplx> entries;

    cplx& at(std::size_t r, std::size_t c) { return entries[r * dim + c]; }
    const cplx& at(std::size_t r, std::size_t c) const { return entries[r * dim + c]; }
};

/// Partial trace over the last qubit: the reduced density matrix of the
/// still-entangled subsystem.
inline DensityMatrix reduced_density(const StateVector& s) {
    if (s.n_qubits < 2)
        throw std::invalid_argument("reduced_density: need at least 2 qubits");
    const std::size_t d = s.dim() >> 1;
    DensityMatrix rho{d, std::vector<cplx>(d * d)};
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            rho.at(i, j) = s.amplitudes[2 * i] * std::conj(s.amplitudes[2 * j]) +
                           s.amplitudes[2 * i + 1] * std::conj(s.amplitudes[2 * j + 1]);
        }
    }
    return rho;
}

/// Reduced 2x2 density matrix of one qubit (1-based index).
inline DensityMatrix qubit_density(const StateVector& s, int qubit) {
    detail::require_qubit(s, qubit, "qubit_density");
    const std::size_t mask = std::size_t{1} << qubit_bit(s.n_qubits, qubit);
    const std::size_t lo_mask = mask - 1;
    const std::size_t hi_mask = ~lo_mask;
    DensityMatrix rho{2, std::vector<cplx>(4)};
    const std::size_t half = s.dim() >> 1;
    for (std::size_t i = 0; i < half; ++i) {
        const std::size_t i0 = ((i & hi_mask) << 1) | (i & lo_mask);
        const std::size_t i1 = i0 | mask;
        rho.at(0, 0) += std::norm(s.amplitudes[i0]);
        rho.at(1, 1) += std::norm(s.amplitudes[i1]);
        rho.at(0, 1) += s.amplitudes[i0] * std::conj(s.amplitudes[i1]);
    }
    rho.at(1, 0) = std::conj(rho.at(0, 1));
    return rho;
}

/// Tr(ρ²); 1 iff the subsystem is pure, 1/dim when maximally mixed.
inline double purity(const DensityMatrix& rho) {
    double p = 0.0;
    for (std::size_t i = 0; i < rho.dim; ++i)
        for (std::size_t j = 0; j < rho.dim; ++j)
            p += (rho.at(i, j) * rho.at(j, i)).real();
    return p;
}

}  // namespace qtomo
