#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace qtomo {

using cplx = std::complex<double>;

/// 2x2 complex matrix, row-major.
struct Mat2 {
    cplx m00, m01, m10, m11;
};

inline Mat2 matmul(const Mat2& a, const Mat2& b) {
    return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
            a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
}

inline Mat2 dagger(const Mat2& m) {
    return {std::conj(m.m00), std::conj(m.m10), std::conj(m.m01), std::conj(m.m11)};
}

/// Max-abs entry of m†m − I.
inline double unitarity_defect(const Mat2& m) {
    const Mat2 p = matmul(dagger(m), m);
    double d = std::abs(p.m00 - 1.0);
    d = std::max(d, std::abs(p.m01));
    d = std::max(d, std::abs(p.m10));
    d = std::max(d, std::abs(p.m11 - 1.0));
    return d;
}

inline bool is_unitary(const Mat2& m, double tol = 1e-10) {
    return unitarity_defect(m) <= tol;
}

/// Euler angles of the parametrized single-qubit rotation. All angles are
/// periodic; no range restriction.
struct VParams {
    double phi = 0.0;
    double theta = 0.0;
    double omega = 0.0;
};

namespace detail {
inline void require_finite(const VParams& p) {
    if (!std::isfinite(p.phi) || !std::isfinite(p.theta) || !std::isfinite(p.omega))
        throw std::invalid_argument("v_gate: non-finite rotation angle");
}
inline cplx phase(double x) { return {std::cos(x), std::sin(x)}; }
}  // namespace detail

/// Parametrized rotation
///   [ cos(θ/2) e^{-i(φ+ω)/2}   -sin(θ/2) e^{ i(φ-ω)/2} ]
///   [ sin(θ/2) e^{-i(φ-ω)/2}    cos(θ/2) e^{ i(φ+ω)/2} ].
inline Mat2 v_gate(const VParams& p) {
    detail::require_finite(p);
    const double c = std::cos(p.theta / 2.0);
    const double s = std::sin(p.theta / 2.0);
    const cplx ep = detail::phase(-(p.phi + p.omega) / 2.0);
    const cplx em = detail::phase((p.phi - p.omega) / 2.0);
    return {c * ep, -s * em, s * std::conj(em), c * std::conj(ep)};
}

/// Elementwise derivatives of v_gate, used by the adjoint gradient pass.
inline Mat2 v_gate_dtheta(const VParams& p) {
    detail::require_finite(p);
    const double c = 0.5 * std::cos(p.theta / 2.0);
    const double s = 0.5 * std::sin(p.theta / 2.0);
    const cplx ep = detail::phase(-(p.phi + p.omega) / 2.0);
    const cplx em = detail::phase((p.phi - p.omega) / 2.0);
    return {-s * ep, -c * em, c * std::conj(em), -s * std::conj(ep)};
}

inline Mat2 v_gate_dphi(const VParams& p) {
    const Mat2 v = v_gate(p);
    const cplx ih(0.0, 0.5);
    return {-ih * v.m00, ih * v.m01, -ih * v.m10, ih * v.m11};
}

inline Mat2 v_gate_domega(const VParams& p) {
    const Mat2 v = v_gate(p);
    const cplx ih(0.0, 0.5);
    return {-ih * v.m00, -ih * v.m01, ih * v.m10, ih * v.m11};
}

/// The discrete gate alphabet: identity, Paulis, Hadamard, T and S phase
/// gates (T² = S).
enum class GateLabel { I, X, Y, Z, H, T, S };

inline constexpr std::array<GateLabel, 7> kGateSet{
    GateLabel::I, GateLabel::X, GateLabel::Y, GateLabel::Z,
    GateLabel::H, GateLabel::T, GateLabel::S};

inline const char* to_string(GateLabel g) {
    switch (g) {
        case GateLabel::I: return "I";
        case GateLabel::X: return "X";
        case GateLabel::Y: return "Y";
        case GateLabel::Z: return "Z";
        case GateLabel::H: return "H";
        case GateLabel::T: return "T";
        case GateLabel::S: return "S";
    }
    throw std::invalid_argument("to_string: unknown gate label");
}

inline GateLabel parse_gate_label(const std::string& s) {
    for (GateLabel g : kGateSet)
        if (s == to_string(g)) return g;
    throw std::invalid_argument("parse_gate_label: unknown gate label '" + s + "'");
}

inline Mat2 discrete_gate(GateLabel g) {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    switch (g) {
        case GateLabel::I: return {1, 0, 0, 1};
        case GateLabel::X: return {0, 1, 1, 0};
        case GateLabel::Y: return {0, cplx(0, -1), cplx(0, 1), 0};
        case GateLabel::Z: return {1, 0, 0, -1};
        case GateLabel::H: return {inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2};
        case GateLabel::T: return {1, 0, 0, cplx(inv_sqrt2, inv_sqrt2)};
        case GateLabel::S: return {1, 0, 0, cplx(0, 1)};
    }
    throw std::invalid_argument("discrete_gate: unknown gate label");
}

}  // namespace qtomo
