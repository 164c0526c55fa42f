#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "irsbf/random.hpp"
#include "irsbf/types.hpp"

namespace irsbf {

// ---------------------------------------------------------------------------
// small dense helpers
// ---------------------------------------------------------------------------

template <class Derived>
auto hermitian_part(const Eigen::MatrixBase<Derived>& X)
{
    using Plain = typename Derived::PlainObject;
    Plain H = (X + X.adjoint()) / typename Derived::Scalar(2);
    return H;
}

/// log2 |X| for Hermitian positive definite X via Cholesky.
/// Throws NumericalError if X is not numerically positive definite.
template <class S> S log2_det_hpd(const CMatrix<S>& X, const char* what = "matrix")
{
    Eigen::LLT<CMatrix<S>> llt(hermitian_part(X));
    if (llt.info() != Eigen::Success)
        throw NumericalError(std::string(what) + " is not positive definite");
    S acc = 0;
    const auto& L = llt.matrixLLT();
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
        const S d = std::real(L(i, i));
        if (!(d > S(0)))
            throw NumericalError(std::string(what) + " is singular");
        acc += std::log2(d);
    }
    return S(2) * acc;
}

/// e^{j phi} elementwise.
template <class S> CVector<S> unit_modulus(const RVector<S>& phi)
{
    CVector<S> v(phi.size());
    for (Eigen::Index n = 0; n < phi.size(); ++n)
        v(n) = std::polar(S(1), phi(n));
    return v;
}

/// Maps an angle into [0, 2pi).
template <class S> S wrap_phase(S angle)
{
    constexpr S two_pi = S(2) * std::numbers::pi_v<S>;
    S r = std::fmod(angle, two_pi);
    if (r < S(0))
        r += two_pi;
    if (r >= two_pi)
        r = S(0);
    return r;
}

template <class S> RVector<S> wrap_phases(const RVector<S>& phi)
{
    return phi.unaryExpr([](S a) { return wrap_phase(a); });
}

/// Sum of per-user transmit covariances W_i W_i^H (M x M).
template <class S> CMatrix<S> transmit_covariance(const std::vector<CMatrix<S>>& W)
{
    CMatrix<S> Wt = CMatrix<S>::Zero(W.front().rows(), W.front().rows());
    for (const auto& Wi : W)
        Wt.noalias() += Wi * Wi.adjoint();
    return Wt;
}

template <class S> S total_power(const std::vector<CMatrix<S>>& W)
{
    S p = 0;
    for (const auto& Wi : W)
        p += Wi.squaredNorm();
    return p;
}

// ---------------------------------------------------------------------------
// statistical model
// ---------------------------------------------------------------------------

/// Composite estimated channel Hd^H + Hr^H diag(e^{j phi}) G (Nr x M).
template <class S> CMatrix<S> effective_channel(const ChannelEstimates<S>& est, int k, const RVector<S>& phi)
{
    if (k < 0 || k >= est.users())
        throw ConfigError("effective_channel: user index out of range");
    if (phi.size() != est.G.rows())
        throw ConfigError("effective_channel: phase vector length must equal N");
    if (est.Hd[k].rows() != est.G.cols() || est.Hr[k].rows() != est.G.rows() || est.Hd[k].cols() != est.Hr[k].cols())
        throw ConfigError("effective_channel: inconsistent channel dimensions");
    const CVector<S> theta = unit_modulus(phi);
    return est.Hd[k].adjoint() + est.Hr[k].adjoint() * theta.asDiagonal() * est.G;
}

namespace detail {

template <class S> void check_state(const ChannelEstimates<S>& est, const ErrorModel<S>& err, const BeamformingState<S>& st)
{
    const int K = est.users();
    err.validate(K);
    if (st.users() != K)
        throw ConfigError("state: one precoder per user required");
    for (const auto& Wk : st.W)
        if (Wk.rows() != est.G.cols() || Wk.cols() != st.W.front().cols())
            throw ConfigError("state: precoders must be M x Ns");
    if (st.phi.size() != est.G.rows())
        throw ConfigError("state: phase vector length must equal N");
}

/// Terms shared by J_k and Q_k: tr(W~) and tr(G W~ G^H).
template <class S> struct PowerTerms {
    S trace_w;
    S trace_gwg;
};

template <class S> PowerTerms<S> power_terms(const ChannelEstimates<S>& est, const std::vector<CMatrix<S>>& W)
{
    PowerTerms<S> t{0, 0};
    for (const auto& Wi : W) {
        t.trace_w += Wi.squaredNorm();
        t.trace_gwg += (est.G * Wi).squaredNorm();
    }
    return t;
}

template <class S> S impairment_scale(const ErrorModel<S>& err, int k, int N, const PowerTerms<S>& t)
{
    return (err.sigma2_d[k] + S(N) * err.sigma2_g * err.sigma2_r[k]) * t.trace_w + err.sigma2_r[k] * t.trace_gwg;
}

} // namespace detail

/// Interference-plus-noise covariance J_k. The phases only enter through the
/// estimated effective channel; every error term is phase-free.
template <class S>
CMatrix<S> interference_noise_cov(const ChannelEstimates<S>& est, const ErrorModel<S>& err, const BeamformingState<S>& st, int k)
{
    detail::check_state(est, err, st);
    const CMatrix<S> Hk = effective_channel(est, k, st.phi);
    const auto terms = detail::power_terms(est, st.W);
    const S alpha = detail::impairment_scale(err, k, est.elements(), terms) + err.sigma2_n[k];

    const auto Nr = Hk.rows();
    CMatrix<S> J = alpha * CMatrix<S>::Identity(Nr, Nr);
    J.noalias() += err.sigma2_g * terms.trace_w * (est.Hr[k].adjoint() * est.Hr[k]);
    for (int i = 0; i < st.users(); ++i) {
        if (i == k)
            continue;
        const CMatrix<S> HW = Hk * st.W[i];
        J.noalias() += HW * HW.adjoint();
    }
    return hermitian_part(J);
}

/// Signal-plus-impairment covariance Q_k, i.e. E[y y^H] minus the noise.
template <class S>
CMatrix<S> signal_plus_impairment_cov(const ChannelEstimates<S>& est, const ErrorModel<S>& err, const BeamformingState<S>& st, int k)
{
    detail::check_state(est, err, st);
    const CMatrix<S> Hk = effective_channel(est, k, st.phi);
    const auto terms = detail::power_terms(est, st.W);
    const S beta = detail::impairment_scale(err, k, est.elements(), terms);

    const auto Nr = Hk.rows();
    CMatrix<S> Q = beta * CMatrix<S>::Identity(Nr, Nr);
    Q.noalias() += err.sigma2_g * terms.trace_w * (est.Hr[k].adjoint() * est.Hr[k]);
    for (const auto& Wi : st.W) {
        const CMatrix<S> HW = Hk * Wi;
        Q.noalias() += HW * HW.adjoint();
    }
    return hermitian_part(Q);
}

template <class S>
CovarianceBundle<S> covariances(const ChannelEstimates<S>& est, const ErrorModel<S>& err, const BeamformingState<S>& st)
{
    CovarianceBundle<S> out;
    const auto terms = detail::power_terms(est, st.W);
    for (int k = 0; k < est.users(); ++k) {
        out.J.push_back(interference_noise_cov(est, err, st, k));
        out.Q.push_back(signal_plus_impairment_cov(est, err, st, k));
        out.alpha.push_back(detail::impairment_scale(err, k, est.elements(), terms) + err.sigma2_n[k]);
    }
    return out;
}

/// Weighted sum rate in bits/s/Hz:
///   sum_k omega_k log2 |I + H_k W_k W_k^H H_k^H J_k^{-1}|,
/// evaluated as log2|J_k + S_k| - log2|J_k| so both factors stay Hermitian.
template <class S>
S weighted_sum_rate(const ChannelEstimates<S>& est, const ErrorModel<S>& err, const BeamformingState<S>& st)
{
    detail::check_state(est, err, st);
    if (st.omega.size() != static_cast<std::size_t>(est.users()))
        throw ConfigError("weighted_sum_rate: one weight per user required");
    S rate = 0;
    for (int k = 0; k < est.users(); ++k) {
        if (st.W[k].squaredNorm() == S(0))
            continue;
        const CMatrix<S> J = interference_noise_cov(est, err, st, k);
        const CMatrix<S> HW = effective_channel(est, k, st.phi) * st.W[k];
        const CMatrix<S> total = J + HW * HW.adjoint();
        const S r = log2_det_hpd<S>(total, "J_k + signal") - log2_det_hpd<S>(J, "interference-plus-noise covariance J_k");
        rate += st.omega[k] * std::max(r, S(0));
    }
    return rate;
}

/// MSE matrix E_k = C^H Q C - C^H H W - W^H H^H C + sigma^2 C^H C + I.
template <class S>
CMatrix<S> mse_matrix(const ChannelEstimates<S>& est, const ErrorModel<S>& err, const BeamformingState<S>& st, int k)
{
    const CMatrix<S> Q = signal_plus_impairment_cov(est, err, st, k);
    const CMatrix<S>& C = st.C.at(k);
    const CMatrix<S>& W = st.W[k];
    if (C.rows() != Q.rows() || C.cols() != W.cols())
        throw ConfigError("mse_matrix: receive filter must be Nr x Ns");
    const CMatrix<S> cross = C.adjoint() * effective_channel(est, k, st.phi) * W;
    CMatrix<S> E = C.adjoint() * Q * C - cross - cross.adjoint() + err.sigma2_n[k] * (C.adjoint() * C);
    E += CMatrix<S>::Identity(W.cols(), W.cols());
    return hermitian_part(E);
}

/// WMMSE objective sum_k tr(T_k E_k) - omega_k log2 |T_k / omega_k|.
template <class S>
S wmmse_objective(const ChannelEstimates<S>& est, const ErrorModel<S>& err, const BeamformingState<S>& st)
{
    detail::check_state(est, err, st);
    S f = 0;
    for (int k = 0; k < est.users(); ++k) {
        const CMatrix<S>& T = st.T.at(k);
        const S w = st.omega.at(k);
        const CMatrix<S> E = mse_matrix(est, err, st, k);
        f += std::real((T * E).trace());
        f -= w * log2_det_hpd<S>(T / w, "weight matrix T_k / omega_k");
    }
    return f;
}

/// Sample estimate of E{N_k N_k^H}: draws data, noise and all three channel
/// errors and averages the outer product of the interference-plus-noise term.
template <class S>
CMatrix<S> monte_carlo_cov_oracle(const ChannelEstimates<S>& est, const ErrorModel<S>& err, const BeamformingState<S>& st,
                                  int k, std::int64_t samples, std::uint64_t seed)
{
    detail::check_state(est, err, st);
    if (samples < 1)
        throw ConfigError("monte_carlo_cov_oracle: samples must be >= 1");
    Rng rng(seed);
    const int K = est.users();
    const auto M = est.G.cols();
    const auto N = est.G.rows();
    const auto Nr = est.Hd[k].cols();
    const auto Ns = st.W.front().cols();

    const CVector<S> theta = unit_modulus(st.phi);
    const CMatrix<S> Hk = effective_channel(est, k, st.phi);
    const CMatrix<S> HrH_theta = est.Hr[k].adjoint() * theta.asDiagonal();

    CMatrix<S> acc = CMatrix<S>::Zero(Nr, Nr);
    CVector<S> x_all(M), x_other(M);
    for (std::int64_t s = 0; s < samples; ++s) {
        x_all.setZero();
        x_other.setZero();
        for (int i = 0; i < K; ++i) {
            const CVector<S> xi = st.W[i] * cscg_vector<S>(Ns, S(1), rng);
            x_all += xi;
            if (i != k)
                x_other += xi;
        }
        const CMatrix<S> dG = cscg_matrix<S>(N, M, err.sigma2_g, rng);
        const CMatrix<S> dHd = cscg_matrix<S>(M, Nr, err.sigma2_d[k], rng);
        const CMatrix<S> dHr = cscg_matrix<S>(N, Nr, err.sigma2_r[k], rng);
        const CVector<S> noise = cscg_vector<S>(Nr, err.sigma2_n[k], rng);

        const CMatrix<S> dHrH_theta = dHr.adjoint() * theta.asDiagonal();
        const CMatrix<S> channel_error = dHd.adjoint() + HrH_theta * dG + dHrH_theta * est.G + dHrH_theta * dG;
        const CVector<S> nk = Hk * x_other + channel_error * x_all + noise;
        acc.noalias() += nk * nk.adjoint();
    }
    return hermitian_part(CMatrix<S>(acc / S(samples)));
}

} // namespace irsbf
