#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace irsbf {

template <class S> using Complex = std::complex<S>;
template <class S> using CMatrix = Eigen::Matrix<std::complex<S>, Eigen::Dynamic, Eigen::Dynamic>;
template <class S> using CVector = Eigen::Matrix<std::complex<S>, Eigen::Dynamic, 1>;
template <class S> using RVector = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S> using RMatrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

/// Invalid dimensions, parameters or configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A quantity left its numerical domain (singular covariance, non-PD weight matrix, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Problem dimensions. `bits == 0` means continuous phases.
struct SystemDims {
    int M = 1;   ///< transmit antennas
    int N = 1;   ///< IRS elements
    int Nr = 1;  ///< receive antennas per user
    int K = 1;   ///< users
    int Ns = 1;  ///< data streams per user
    int bits = 0;

    [[nodiscard]] int alphabet_size() const { return bits > 0 ? (1 << bits) : 0; }

    void validate() const
    {
        if (M < 1 || N < 1 || Nr < 1 || K < 1 || Ns < 1)
            throw ConfigError("SystemDims: all counts must be >= 1");
        if (Ns > std::min(M, Nr))
            throw ConfigError("SystemDims: Ns must not exceed min(M, Nr)");
        if (bits < 0 || bits > 16)
            throw ConfigError("SystemDims: bits must lie in [0, 16]");
    }
};

/// Estimated channels. G is N x M (BS to IRS), Hd[k] is M x Nr, Hr[k] is N x Nr.
template <class S> struct ChannelEstimates {
    CMatrix<S> G;
    std::vector<CMatrix<S>> Hd;
    std::vector<CMatrix<S>> Hr;

    [[nodiscard]] int users() const { return static_cast<int>(Hd.size()); }
    [[nodiscard]] int tx_antennas() const { return static_cast<int>(G.cols()); }
    [[nodiscard]] int elements() const { return static_cast<int>(G.rows()); }
    [[nodiscard]] int rx_antennas() const { return Hd.empty() ? 0 : static_cast<int>(Hd.front().cols()); }

    void validate() const
    {
        const auto M = G.cols();
        const auto N = G.rows();
        if (M < 1 || N < 1)
            throw ConfigError("ChannelEstimates: G must be non-empty");
        if (Hd.empty() || Hd.size() != Hr.size())
            throw ConfigError("ChannelEstimates: Hd and Hr must hold one matrix per user");
        const auto Nr = Hd.front().cols();
        for (std::size_t k = 0; k < Hd.size(); ++k) {
            if (Hd[k].rows() != M || Hd[k].cols() != Nr)
                throw ConfigError("ChannelEstimates: Hd[" + std::to_string(k) + "] must be M x Nr");
            if (Hr[k].rows() != N || Hr[k].cols() != Nr)
                throw ConfigError("ChannelEstimates: Hr[" + std::to_string(k) + "] must be N x Nr");
            if (!Hd[k].allFinite() || !Hr[k].allFinite())
                throw ConfigError("ChannelEstimates: non-finite entry for user " + std::to_string(k));
        }
        if (!G.allFinite())
            throw ConfigError("ChannelEstimates: non-finite entry in G");
    }
};

/// Per-entry CSCG error variances of each link and the receiver noise power (linear mW).
template <class S> struct ErrorModel {
    S sigma2_g = 0;
    std::vector<S> sigma2_d;
    std::vector<S> sigma2_r;
    std::vector<S> sigma2_n;

    static ErrorModel error_free(int K, S noise)
    {
        return {S(0), std::vector<S>(K, S(0)), std::vector<S>(K, S(0)), std::vector<S>(K, noise)};
    }

    void validate(int K) const
    {
        const auto k = static_cast<std::size_t>(K);
        if (sigma2_d.size() != k || sigma2_r.size() != k || sigma2_n.size() != k)
            throw ConfigError("ErrorModel: one variance per user required");
        auto bad = [](S v) { return !(v >= S(0)); };
        if (bad(sigma2_g))
            throw ConfigError("ErrorModel: variances must be >= 0");
        for (std::size_t i = 0; i < k; ++i)
            if (bad(sigma2_d[i]) || bad(sigma2_r[i]) || bad(sigma2_n[i]))
                throw ConfigError("ErrorModel: variances must be >= 0");
    }
};

/// Optimization variables: precoders W (M x Ns), receive filters C (Nr x Ns),
/// weight matrices T (Ns x Ns), IRS phases and rate weights.
template <class S> struct BeamformingState {
    std::vector<CMatrix<S>> W;
    std::vector<CMatrix<S>> C;
    std::vector<CMatrix<S>> T;
    RVector<S> phi;
    std::vector<S> omega;

    [[nodiscard]] int users() const { return static_cast<int>(W.size()); }
};

/// Interference-plus-noise covariance J, signal-plus-impairment covariance Q and
/// the scaled-identity coefficient alpha, one entry per user.
template <class S> struct CovarianceBundle {
    std::vector<CMatrix<S>> J;
    std::vector<CMatrix<S>> Q;
    std::vector<S> alpha;
};

} // namespace irsbf
