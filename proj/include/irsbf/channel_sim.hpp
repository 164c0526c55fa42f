#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "irsbf/bcd_optimizer.hpp"
#include "irsbf/random.hpp"
#include "irsbf/types.hpp"

namespace irsbf {

using Point2 = std::array<double, 2>;

inline double distance(const Point2& a, const Point2& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

/// Direct-link path loss in dB: 32.6 + 36.7 lg d.
inline double path_loss_direct(double d)
{
    if (!(d > 0))
        throw ConfigError("path_loss_direct: distance must be > 0");
    return 32.6 + 36.7 * std::log10(d);
}

/// BS-IRS and IRS-user path loss in dB: 35.6 + 22.0 lg d.
inline double path_loss_irs(double d)
{
    if (!(d > 0))
        throw ConfigError("path_loss_irs: distance must be > 0");
    return 35.6 + 22.0 * std::log10(d);
}

/// Half-wavelength ULA response e^{j pi n sin(angle)}, n = 0..count-1.
template <class S = double> CVector<S> steering_vector(int count, S angle)
{
    if (count < 1)
        throw ConfigError("steering_vector: count must be >= 1");
    CVector<S> a(count);
    const S s = std::sin(angle);
    for (int n = 0; n < count; ++n)
        a(n) = std::polar(S(1), std::numbers::pi_v<S> * S(n) * s);
    return a;
}

/// i.i.d. CSCG entries with per-entry variance 10^(-loss_db/10).
template <class S, class Generator> CMatrix<S> sample_rayleigh(int rows, int cols, double loss_db, Generator& rng)
{
    return cscg_matrix<S>(rows, cols, S(std::pow(10.0, -loss_db / 10.0)), rng);
}

/// kappa (sqrt(nu/(nu+1)) a_r a_t^H + sqrt(1/(nu+1)) H_nlos), kappa = 10^(-loss_db/20),
/// H_nlos with unit-variance CSCG entries.
template <class S, class Generator>
CMatrix<S> sample_rician(int rows, int cols, double loss_db, double nu, const CVector<S>& a_r, const CVector<S>& a_t,
                         Generator& rng)
{
    if (!(nu >= 0))
        throw ConfigError("sample_rician: Rician factor must be >= 0");
    if (a_r.size() != rows || a_t.size() != cols)
        throw ConfigError("sample_rician: steering vector lengths must match the matrix shape");
    const S kappa = S(std::pow(10.0, -loss_db / 20.0));
    const S los = S(std::sqrt(nu / (nu + 1.0)));
    const S nlos = S(std::sqrt(1.0 / (nu + 1.0)));
    CMatrix<S> H = cscg_matrix<S>(rows, cols, S(1), rng);
    H *= nlos;
    H.noalias() += los * (a_r * a_t.adjoint());
    return kappa * H;
}

/// Deployment and link-budget parameters. Powers in dBm, positions in meters.
struct ScenarioConfig {
    Point2 bs_pos{0.0, 30.0};
    Point2 irs_pos{200.0, 30.0};
    Point2 ue_center{200.0, 0.0};
    double ue_radius = 10.0;
    double pt_dbm = 0.0;
    double bandwidth_hz = 180e3;
    double noise_psd_dbm_hz = -170.0;
    double rician_nu = 10.0;
    double nmse = 0.0;
    SystemDims dims{4, 16, 2, 2, 2, 2};
    /// Array axes as unit vectors in the plane; the broadside is normal to the axis.
    Point2 bs_axis{0.0, 1.0};
    Point2 irs_axis{1.0, 0.0};
    Point2 ue_axis{1.0, 0.0};

    void validate() const
    {
        dims.validate();
        if (!(ue_radius >= 0))
            throw ConfigError("ScenarioConfig: ue_radius must be >= 0");
        if (!(bandwidth_hz > 0))
            throw ConfigError("ScenarioConfig: bandwidth must be > 0");
        if (!(nmse >= 0) || nmse >= 1)
            throw ConfigError("ScenarioConfig: nmse must lie in [0, 1)");
        if (!(rician_nu >= 0))
            throw ConfigError("ScenarioConfig: rician_nu must be >= 0");
        if (!std::isfinite(pt_dbm) || !std::isfinite(noise_psd_dbm_hz))
            throw ConfigError("ScenarioConfig: powers must be finite");
        if (!(distance(bs_pos, irs_pos) > 0))
            throw ConfigError("ScenarioConfig: BS and IRS must not coincide");
        for (const auto& axis : {bs_axis, irs_axis, ue_axis})
            if (!(std::hypot(axis[0], axis[1]) > 0))
                throw ConfigError("ScenarioConfig: array axes must be non-zero");
    }

    [[nodiscard]] double noise_mw() const { return dbm_to_mw(noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz)); }
};

/// Angle between the direction `from -> to` and the broadside of an array along `axis`.
inline double array_angle(const Point2& from, const Point2& to, const Point2& axis)
{
    const double d = distance(from, to);
    const double a = std::hypot(axis[0], axis[1]);
    const double proj = ((to[0] - from[0]) * axis[0] + (to[1] - from[1]) * axis[1]) / (d * a);
    return std::asin(std::clamp(proj, -1.0, 1.0));
}

template <class S> struct Scenario {
    ChannelEstimates<S> est;
    std::vector<Point2> users;
    std::vector<S> omega;
};

/// Draws one channel realization. Random draws happen in a fixed order (user
/// positions, G, then Hd and Hr per user) that does not depend on the geometry,
/// so the same stream yields paired realizations across positions and powers.
template <class S, class Generator> Scenario<S> generate_scenario(const ScenarioConfig& cfg, Generator& rng)
{
    cfg.validate();
    const auto& dm = cfg.dims;
    Scenario<S> sc;

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < dm.K; ++k) {
        const double r = cfg.ue_radius * std::sqrt(unit(rng));
        const double t = 2.0 * std::numbers::pi * unit(rng);
        sc.users.push_back({cfg.ue_center[0] + r * std::cos(t), cfg.ue_center[1] + r * std::sin(t)});
    }

    const double d_bi = distance(cfg.bs_pos, cfg.irs_pos);
    const CVector<S> a_irs_in = steering_vector<S>(dm.N, S(array_angle(cfg.irs_pos, cfg.bs_pos, cfg.irs_axis)));
    const CVector<S> a_bs_out = steering_vector<S>(dm.M, S(array_angle(cfg.bs_pos, cfg.irs_pos, cfg.bs_axis)));
    sc.est.G = sample_rician<S>(dm.N, dm.M, path_loss_irs(d_bi), cfg.rician_nu, a_irs_in, a_bs_out, rng);

    std::vector<double> gain(dm.K);
    for (int k = 0; k < dm.K; ++k) {
        const Point2& u = sc.users[k];
        const double d_direct = distance(cfg.bs_pos, u);
        const double d_reflect = distance(cfg.irs_pos, u);
        const double loss_direct = path_loss_direct(d_direct);
        sc.est.Hd.push_back(sample_rayleigh<S>(dm.M, dm.Nr, loss_direct, rng));
        const CVector<S> a_irs_out = steering_vector<S>(dm.N, S(array_angle(cfg.irs_pos, u, cfg.irs_axis)));
        const CVector<S> a_ue_in = steering_vector<S>(dm.Nr, S(array_angle(u, cfg.irs_pos, cfg.ue_axis)));
        sc.est.Hr.push_back(sample_rician<S>(dm.N, dm.Nr, path_loss_irs(d_reflect), cfg.rician_nu, a_irs_out, a_ue_in, rng));
        gain[k] = std::pow(10.0, -loss_direct / 10.0);
    }

    // weights follow the inverse direct-link path loss, normalized to sum to K
    double total = 0;
    for (double g : gain)
        total += g;
    for (int k = 0; k < dm.K; ++k)
        sc.omega.push_back(S(gain[k] * dm.K / total));
    return sc;
}

/// Per-entry error variances giving each link the target NMSE for this
/// realization, plus the thermal noise power.
template <class S> ErrorModel<S> calibrate_error_variances(const ChannelEstimates<S>& est, double nmse, const ScenarioConfig& cfg)
{
    if (!(nmse >= 0))
        throw ConfigError("calibrate_error_variances: nmse must be >= 0");
    est.validate();
    const S rho = S(nmse);
    const S M = S(est.tx_antennas());
    const S N = S(est.elements());
    const S Nr = S(est.rx_antennas());
    ErrorModel<S> err;
    err.sigma2_g = rho * est.G.squaredNorm() / (N * M);
    for (int k = 0; k < est.users(); ++k) {
        err.sigma2_d.push_back(rho * est.Hd[k].squaredNorm() / (M * Nr));
        err.sigma2_r.push_back(rho * est.Hr[k].squaredNorm() / (N * Nr));
        err.sigma2_n.push_back(S(cfg.noise_mw()));
    }
    return err;
}

/// Scenario draw plus calibration, packaged for the optimizer.
template <class S, class Generator> Problem<S> make_problem(const ScenarioConfig& cfg, Generator& rng)
{
    auto sc = generate_scenario<S>(cfg, rng);
    Problem<S> p;
    p.dims = cfg.dims;
    p.err = calibrate_error_variances(sc.est, cfg.nmse, cfg);
    p.est = std::move(sc.est);
    p.omega = std::move(sc.omega);
    p.power_budget = S(dbm_to_mw(cfg.pt_dbm));
    return p;
}

} // namespace irsbf
