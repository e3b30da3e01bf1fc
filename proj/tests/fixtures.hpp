#pragma once

#include <vector>

#include "qtomo/state.hpp"

namespace fixtures {

using qtomo::cplx;
using qtomo::StateVector;

constexpr double kInvSqrt2 = 0.70710678118654752440;

/// (|00> + |11>)/sqrt(2)
inline StateVector bell_state() {
    StateVector s{2, {kInvSqrt2, 0.0, 0.0, kInvSqrt2}};
    return s;
}

/// (|0...0> + |1...1>)/sqrt(2)
inline StateVector ghz_state(int n) {
    StateVector s{n, std::vector<cplx>(qtomo::state_dim(n), cplx{})};
    s.amplitudes.front() = kInvSqrt2;
    s.amplitudes.back() = kInvSqrt2;
    return s;
}

inline StateVector from_amplitudes(int n, std::vector<cplx> amps) {
    return StateVector{n, std::move(amps)};
}

}  // namespace fixtures
