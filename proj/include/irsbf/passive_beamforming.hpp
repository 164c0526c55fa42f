#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <utility>

#include "irsbf/core_model.hpp"

namespace irsbf {

/// Phase-dependent part of the WMMSE objective at fixed (W, C, T), written as
///   h(phi) = e^H F e + 2 Re{e^H d},  e = e^{j phi}.
/// The building blocks are kept for inspection; F and d are what the solvers use.
template <class S> struct PassiveCoefficients {
    CMatrix<S> A0, A1, B0, B1, D;
    S a2 = 0;
    CMatrix<S> F;
    CVector<S> d;
    /// Largest eigenvalue of F, the curvature of the MM majorizer.
    S mu = 0;

    /// Coefficients given directly by (F, d); the building blocks stay empty.
    static PassiveCoefficients from_quadratic(CMatrix<S> F, CVector<S> d);
};

template <class S> S max_eigenvalue(const CMatrix<S>& F)
{
    if (F.size() == 0)
        return S(0);
    Eigen::SelfAdjointEigenSolver<CMatrix<S>> eig(F, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
        throw NumericalError("max_eigenvalue: eigensolver did not converge");
    return eig.eigenvalues()(eig.eigenvalues().size() - 1);
}

template <class S> PassiveCoefficients<S> PassiveCoefficients<S>::from_quadratic(CMatrix<S> F, CVector<S> d)
{
    if (F.rows() != F.cols() || F.rows() != d.size())
        throw ConfigError("PassiveCoefficients: F must be N x N and d of length N");
    PassiveCoefficients c;
    c.F = hermitian_part(F);
    c.d = std::move(d);
    c.mu = max_eigenvalue(c.F);
    return c;
}

/// Reduces the phase sub-problem to (F, d) for the current precoders, receive
/// filters and weights:
///   F = A0 o B0^T + diag(A1) + diag(B1) + a2 I,   d = diag(D).
/// a2 accumulates over all users.
template <class S>
PassiveCoefficients<S> build_passive_coefficients(const ChannelEstimates<S>& est, const ErrorModel<S>& err,
                                                  const BeamformingState<S>& st)
{
    detail::check_state(est, err, st);
    if (st.C.size() != st.W.size() || st.T.size() != st.W.size())
        throw ConfigError("build_passive_coefficients: receive filters and weights must be set");
    const auto N = est.G.rows();
    const CMatrix<S> Wt = transmit_covariance(st.W);
    const S trace_w = std::real(Wt.trace());

    PassiveCoefficients<S> c;
    c.B0 = hermitian_part(CMatrix<S>(est.G * Wt * est.G.adjoint()));
    c.A0 = CMatrix<S>::Zero(N, N);
    c.A1 = CMatrix<S>::Zero(N, N);
    c.B1 = CMatrix<S>::Zero(N, N);
    c.D = CMatrix<S>::Zero(N, N);
    const CMatrix<S> WtGh = Wt * est.G.adjoint(); // M x N

    for (int k = 0; k < est.users(); ++k) {
        const CMatrix<S>& C = st.C[k];
        const CMatrix<S>& T = st.T[k];
        const CMatrix<S> HrC = est.Hr[k] * C; // N x Ns
        const CMatrix<S> A0k = HrC * T * HrC.adjoint();
        const S tcc = std::real((T * C.adjoint() * C).trace());

        c.A0 += A0k;
        c.A1 += (err.sigma2_g * trace_w) * A0k;
        c.a2 += err.sigma2_g * err.sigma2_r[k] * tcc * trace_w;
        c.B1 += (err.sigma2_r[k] * tcc) * c.B0;
        c.D.noalias() += HrC * T * (C.adjoint() * est.Hd[k].adjoint() * WtGh - st.W[k].adjoint() * est.G.adjoint());
    }
    c.A0 = hermitian_part(c.A0);
    c.A1 = hermitian_part(c.A1);
    c.B1 = hermitian_part(c.B1);

    c.F = c.A0.cwiseProduct(c.B0.transpose());
    c.F.diagonal() += c.A1.diagonal() + c.B1.diagonal();
    c.F.diagonal().array() += c.a2;
    c.F = hermitian_part(c.F);
    c.d = c.D.diagonal();
    c.mu = max_eigenvalue(c.F);
    return c;
}

/// h(phi) = e^H F e + 2 Re{e^H d}.
template <class S> S evaluate_h(const PassiveCoefficients<S>& c, const RVector<S>& phi)
{
    const CVector<S> e = unit_modulus(phi);
    return std::real(e.dot(c.F * e)) + S(2) * std::real(e.dot(c.d));
}

/// Gradient of h with respect to the phases: 2 Re{-j conj(e) o (F e + d)}.
template <class S> RVector<S> gradient_h(const PassiveCoefficients<S>& c, const RVector<S>& phi)
{
    const CVector<S> e = unit_modulus(phi);
    const CVector<S> v = c.F * e + c.d;
    RVector<S> g(phi.size());
    const Complex<S> minus_j(0, -1);
    for (Eigen::Index n = 0; n < phi.size(); ++n)
        g(n) = S(2) * std::real(minus_j * std::conj(e(n)) * v(n));
    return g;
}

/// MM surrogate around phi_r: mu N + e_r^H (mu I - F) e_r - 2 Re{e^H (mu I - F) e_r} + 2 Re{e^H d}.
template <class S> S mm_surrogate(const PassiveCoefficients<S>& c, const RVector<S>& phi, const RVector<S>& phi_r)
{
    const CVector<S> e = unit_modulus(phi);
    const CVector<S> er = unit_modulus(phi_r);
    const CVector<S> shifted = c.mu * er - c.F * er;
    return c.mu * S(phi.size()) + std::real(er.dot(shifted)) - S(2) * std::real(e.dot(shifted)) + S(2) * std::real(e.dot(c.d));
}

/// One MM step: phi_{r+1} = arg((mu I - F) e^{j phi_r} - d), wrapped into [0, 2pi).
/// Components with a vanishing z keep their previous phase.
template <class S> RVector<S> mm_update(const PassiveCoefficients<S>& c, const RVector<S>& phi_r)
{
    const CVector<S> er = unit_modulus(phi_r);
    const CVector<S> z = c.mu * er - c.F * er - c.d;
    const S scale = std::max(std::abs(c.mu), c.d.size() > 0 ? c.d.cwiseAbs().maxCoeff() : S(0));
    RVector<S> next = wrap_phases(phi_r);
    for (Eigen::Index n = 0; n < z.size(); ++n)
        if (std::abs(z(n)) > S(1e-14) * scale)
            next(n) = wrap_phase(std::arg(z(n)));
    return next;
}

/// Backtracking parameters for the SCA step. A non-positive beta0 means
/// "use the MM curvature mu", falling back to the gradient's max-norm when mu = 0.
template <class S> struct ArmijoParams {
    S beta0 = 0;
    S growth = 2;
    S sufficient_decrease = S(0.25);
    int max_backtracks = 40;
};

template <class S> struct ScaStep {
    RVector<S> phi;
    S beta = 0;
    int backtracks = 0;
    bool stalled = false;
};

/// One SCA step: gradient descent on the second-order surrogate with curvature
/// beta, the smallest beta0 * growth^i meeting
///   h(phi - g/beta) <= h(phi) - (c / beta) |g|^2.
template <class S> ScaStep<S> sca_update(const PassiveCoefficients<S>& c, const RVector<S>& phi_r, const ArmijoParams<S>& armijo = {})
{
    ScaStep<S> step{wrap_phases(phi_r), 0, 0, false};
    const RVector<S> g = gradient_h(c, phi_r);
    const S g2 = g.squaredNorm();
    if (!std::isfinite(g2))
        throw NumericalError("sca_update: non-finite gradient");
    S beta = armijo.beta0 > S(0) ? armijo.beta0 : c.mu;
    if (!(beta > S(0)))
        beta = g.cwiseAbs().maxCoeff();
    step.beta = beta;
    if (g2 == S(0))
        return step;

    const S h0 = evaluate_h(c, phi_r);
    for (int i = 0; i <= armijo.max_backtracks; ++i) {
        const RVector<S> candidate = phi_r - g / beta;
        if (evaluate_h(c, candidate) <= h0 - armijo.sufficient_decrease / beta * g2) {
            step.phi = wrap_phases(candidate);
            step.beta = beta;
            step.backtracks = i;
            return step;
        }
        beta *= armijo.growth;
    }
    step.stalled = true;
    step.backtracks = armijo.max_backtracks;
    return step;
}

/// Nearest point of {0, 2pi/L, ..., 2pi(L-1)/L} under circular distance; bits = 0 is the identity.
template <class S> RVector<S> quantize_phases(const RVector<S>& phi, int bits)
{
    if (bits < 0)
        throw ConfigError("quantize_phases: bits must be >= 0");
    if (bits == 0)
        return phi;
    const std::int64_t L = std::int64_t(1) << bits;
    const S step = S(2) * std::numbers::pi_v<S> / S(L);
    RVector<S> out(phi.size());
    for (Eigen::Index n = 0; n < phi.size(); ++n) {
        const auto idx = static_cast<std::int64_t>(std::llround(wrap_phase(phi(n)) / step)) % L;
        out(n) = S(idx) * step;
    }
    return out;
}

/// Global minimizer of h over the discrete alphabet by enumeration. Ties keep the
/// lexicographically smallest phase tuple. Refuses search spaces above 10^6 points.
template <class S> std::pair<RVector<S>, S> exhaustive_phase_oracle(const PassiveCoefficients<S>& c, int bits)
{
    const auto N = c.F.rows();
    if (bits < 1)
        throw ConfigError("exhaustive_phase_oracle: needs a discrete alphabet (bits >= 1)");
    const std::int64_t L = std::int64_t(1) << bits;
    std::int64_t total = 1;
    for (Eigen::Index n = 0; n < N; ++n) {
        total *= L;
        if (total > 1'000'000)
            throw ConfigError("exhaustive_phase_oracle: search space exceeds 10^6 points");
    }
    const S step = S(2) * std::numbers::pi_v<S> / S(L);
    std::vector<std::int64_t> digits(static_cast<std::size_t>(N), 0);
    RVector<S> phi = RVector<S>::Zero(N);
    RVector<S> best_phi = phi;
    S best = std::numeric_limits<S>::infinity();
    for (std::int64_t count = 0; count < total; ++count) {
        for (Eigen::Index n = 0; n < N; ++n)
            phi(n) = S(digits[n]) * step;
        const S h = evaluate_h(c, phi);
        if (h < best) {
            best = h;
            best_phi = phi;
        }
        // odometer, last element fastest, so visiting order is lexicographic
        for (Eigen::Index n = N - 1; n >= 0; --n) {
            if (++digits[n] < L)
                break;
            digits[n] = 0;
        }
    }
    return {best_phi, best};
}

} // namespace irsbf
