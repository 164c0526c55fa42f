#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "irsbf/core_model.hpp"

namespace irsbf {

/// Outcome of the bisection on the power-constraint multiplier.
template <class S> struct DualSolveReport {
    S lambda_star = 0;
    S power_used = 0;
    int iterations = 0;
    S bracket_lo = 0;
    S bracket_hi = 0;
};

/// Receive filter minimizing the MSE matrix: (Q_k + sigma_k^2 I)^{-1} H_k W_k.
template <class S>
CMatrix<S> optimal_receive_filter(const ChannelEstimates<S>& est, const ErrorModel<S>& err, const BeamformingState<S>& st, int k)
{
    CMatrix<S> R = signal_plus_impairment_cov(est, err, st, k);
    R.diagonal().array() += err.sigma2_n[k];
    Eigen::LLT<CMatrix<S>> llt(R);
    if (llt.info() != Eigen::Success)
        throw NumericalError("optimal_receive_filter: Q_k + sigma_k^2 I is singular for user " + std::to_string(k));
    return llt.solve(effective_channel(est, k, st.phi) * st.W[k]);
}

template <class S> struct OptimalWeights {
    CMatrix<S> E;
    CMatrix<S> T;
};

/// MSE matrix at the optimal filter, E = I - W^H H^H C, and the weight T = omega E^{-1}.
/// Expects `st.C[k]` to hold the optimal receive filter.
template <class S>
OptimalWeights<S> optimal_weights(const ChannelEstimates<S>& est, const ErrorModel<S>& err, const BeamformingState<S>& st, int k)
{
    detail::check_state(est, err, st);
    const auto Ns = st.W[k].cols();
    const CMatrix<S> HW = effective_channel(est, k, st.phi) * st.W[k];
    CMatrix<S> E = hermitian_part(CMatrix<S>(CMatrix<S>::Identity(Ns, Ns) - HW.adjoint() * st.C.at(k)));
    Eigen::LLT<CMatrix<S>> llt(E);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<CMatrix<S>> eig(E, Eigen::EigenvaluesOnly);
        throw NumericalError("optimal_weights: MSE matrix of user " + std::to_string(k) +
                             " is not positive definite (min eigenvalue " + std::to_string(eig.eigenvalues().minCoeff()) +
                             ")");
    }
    CMatrix<S> T = st.omega.at(k) * llt.solve(CMatrix<S>::Identity(Ns, Ns));
    return {std::move(E), hermitian_part(T)};
}

/// Sets every C_k and T_k to their closed-form optima for the current W and phases.
template <class S>
void update_filters_and_weights(const ChannelEstimates<S>& est, const ErrorModel<S>& err, BeamformingState<S>& st)
{
    const int K = est.users();
    st.C.resize(K);
    st.T.resize(K);
    for (int k = 0; k < K; ++k)
        st.C[k] = optimal_receive_filter(est, err, st, k);
    for (int k = 0; k < K; ++k)
        st.T[k] = optimal_weights(est, err, st, k).T;
}

/// The lambda-independent part of the precoder stationarity condition:
///   (A + lambda I) W_k = H_k^H C_k T_k.
/// A is shared by all users.
template <class S> struct PrecoderSystem {
    CMatrix<S> A;
    std::vector<CMatrix<S>> rhs;
};

template <class S>
PrecoderSystem<S> precoder_system(const ChannelEstimates<S>& est, const ErrorModel<S>& err, const BeamformingState<S>& st)
{
    detail::check_state(est, err, st);
    const int K = est.users();
    const auto M = est.G.cols();
    const S N = S(est.elements());
    const CMatrix<S> GhG = est.G.adjoint() * est.G;

    PrecoderSystem<S> sys{CMatrix<S>::Zero(M, M), {}};
    S diag_load = 0;
    for (int i = 0; i < K; ++i) {
        const CMatrix<S>& C = st.C.at(i);
        const CMatrix<S>& T = st.T.at(i);
        const CMatrix<S> Hi = effective_channel(est, i, st.phi);
        const CMatrix<S> HC = Hi.adjoint() * C; // M x Ns
        sys.A.noalias() += HC * T * HC.adjoint();

        const S tcc = std::real((T * C.adjoint() * C).trace());
        const CMatrix<S> HrC = est.Hr[i] * C; // N x Ns
        const S tchc = std::real((T * HrC.adjoint() * HrC).trace());
        diag_load += (err.sigma2_d[i] + err.sigma2_g * err.sigma2_r[i] * N) * tcc + err.sigma2_g * tchc;
        sys.A.noalias() += (err.sigma2_r[i] * tcc) * GhG;
        sys.rhs.push_back(HC * T);
    }
    sys.A.diagonal().array() += diag_load;
    sys.A = hermitian_part(sys.A);
    return sys;
}

/// Solves the shared system once for this lambda and returns W_k(lambda) for every user.
/// At lambda == 0 a rank-deficient system gets a ridge of 1e-12 tr(A)/M; if it is
/// still not positive definite a NumericalError tells the caller to use lambda > 0.
template <class S> std::vector<CMatrix<S>> precoders_for_dual(const PrecoderSystem<S>& sys, S lambda)
{
    if (!(lambda >= S(0)))
        throw ConfigError("precoders_for_dual: lambda must be >= 0");
    const auto M = sys.A.rows();
    CMatrix<S> A = sys.A;
    A.diagonal().array() += lambda;
    Eigen::LLT<CMatrix<S>> llt(A);
    if (llt.info() != Eigen::Success || (lambda == S(0) && llt.rcond() < S(1e-12))) {
        const S ridge = S(1e-12) * std::real(sys.A.trace()) / S(M);
        if (ridge > S(0)) {
            A.diagonal().array() += ridge;
            llt.compute(A);
        }
        if (llt.info() != Eigen::Success || ridge == S(0))
            throw NumericalError("precoders_for_dual: singular precoder system, use lambda > 0");
    }
    std::vector<CMatrix<S>> W;
    W.reserve(sys.rhs.size());
    for (const auto& b : sys.rhs)
        W.push_back(llt.solve(b));
    return W;
}

template <class S>
std::vector<CMatrix<S>> precoders_for_dual(const ChannelEstimates<S>& est, const ErrorModel<S>& err, const BeamformingState<S>& st,
                                           S lambda)
{
    return precoders_for_dual(precoder_system(est, err, st), lambda);
}

/// Bisection on the multiplier of the total power constraint. Returns lambda = 0
/// whenever the unconstrained precoders already fit within the budget; otherwise
/// the returned precoders sit on the upper bracket end, so their power never
/// exceeds the budget. Stops once the power is within `power_tol` (relative) of
/// the budget or the bracket has shrunk to 1e-12 lambda_hi.
template <class S>
std::pair<DualSolveReport<S>, std::vector<CMatrix<S>>> solve_power_dual(const PrecoderSystem<S>& sys, S power_budget,
                                                                        S power_tol = S(1e-6))
{
    if (!(power_budget > S(0)))
        throw ConfigError("solve_power_dual: power budget must be > 0");
    if (!(power_tol > S(0)))
        throw ConfigError("solve_power_dual: power tolerance must be > 0");
    constexpr S width_tol = S(1e-12);
    constexpr int max_doublings = 60;
    constexpr int max_bisections = 400;

    DualSolveReport<S> report;
    try {
        auto W0 = precoders_for_dual(sys, S(0));
        const S p0 = total_power(W0);
        if (p0 <= power_budget) {
            report.power_used = p0;
            return {report, std::move(W0)};
        }
    } catch (const NumericalError&) {
        // no finite unconstrained solution; the constraint is active
    }

    S lo = 0;
    S hi = 1;
    auto W_hi = precoders_for_dual(sys, hi);
    S p_hi = total_power(W_hi);
    int doublings = 0;
    while (p_hi > power_budget) {
        if (++doublings > max_doublings)
            throw ConfigError("solve_power_dual: no multiplier bracket found after 60 doublings");
        lo = hi;
        hi *= S(2);
        W_hi = precoders_for_dual(sys, hi);
        p_hi = total_power(W_hi);
    }

    int it = 0;
    while ((power_budget - p_hi) / power_budget > power_tol && hi - lo > width_tol * hi && it < max_bisections) {
        ++it;
        const S mid = lo + (hi - lo) / S(2);
        auto W_mid = precoders_for_dual(sys, mid);
        const S p_mid = total_power(W_mid);
        if (p_mid <= power_budget) {
            hi = mid;
            W_hi = std::move(W_mid);
            p_hi = p_mid;
        } else {
            lo = mid;
        }
    }

    report.lambda_star = hi;
    report.power_used = p_hi;
    report.iterations = it;
    report.bracket_lo = lo;
    report.bracket_hi = hi;
    return {report, std::move(W_hi)};
}

template <class S>
std::pair<DualSolveReport<S>, std::vector<CMatrix<S>>> solve_power_dual(const ChannelEstimates<S>& est, const ErrorModel<S>& err,
                                                                        const BeamformingState<S>& st, S power_budget,
                                                                        S power_tol = S(1e-6))
{
    return solve_power_dual(precoder_system(est, err, st), power_budget, power_tol);
}

/// Lagrangian of the precoder sub-problem at the state's (W, C, T):
///   lambda (tr W~ - P) + sum_k tr(T C^H Q C - T C^H H W - T W^H H^H C).
template <class S>
S lagrangian_value(const ChannelEstimates<S>& est, const ErrorModel<S>& err, const BeamformingState<S>& st, S lambda,
                   S power_budget)
{
    S value = lambda * (total_power(st.W) - power_budget);
    for (int k = 0; k < est.users(); ++k) {
        const CMatrix<S>& C = st.C.at(k);
        const CMatrix<S>& T = st.T.at(k);
        const CMatrix<S> Q = signal_plus_impairment_cov(est, err, st, k);
        const CMatrix<S> THW = T * C.adjoint() * effective_channel(est, k, st.phi) * st.W[k];
        value += std::real((T * C.adjoint() * Q * C).trace()) - S(2) * std::real(THW.trace());
    }
    return value;
}

} // namespace irsbf
