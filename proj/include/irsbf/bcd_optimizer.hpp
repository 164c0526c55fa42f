#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "irsbf/active_beamforming.hpp"
#include "irsbf/passive_beamforming.hpp"
#include "irsbf/random.hpp"

namespace irsbf {

enum class PassiveMethod { MM, SCA };

inline const char* to_string(PassiveMethod m) { return m == PassiveMethod::MM ? "MM" : "SCA"; }

struct OptimizerConfig {
    PassiveMethod method = PassiveMethod::MM;
    int max_outer = 100;
    /// Stop once the fractional decrease of the objective drops below this.
    double rel_tol = 1e-4;
    int passive_steps_per_outer = 1;
    /// Quantize after every passive step; otherwise only once, after the loop.
    bool quantize_each_iteration = true;
    /// With per-iteration quantization, let the passive solver continue from its
    /// own unquantized iterate while the reflection matrix uses the quantized phases.
    bool carry_continuous_phases = true;
    /// Ignore the phase resolution and optimize continuous phases.
    bool continuous_phases = false;
    /// Consecutive iterations without improving the best objective before giving up.
    int patience = 10;
    /// Relative power slack accepted by the multiplier bisection.
    double dual_power_tol = 1e-10;
    ArmijoParams<double> armijo{};

    void validate() const
    {
        if (max_outer < 1)
            throw ConfigError("OptimizerConfig: max_outer must be >= 1");
        if (!(rel_tol > 0))
            throw ConfigError("OptimizerConfig: rel_tol must be > 0");
        if (passive_steps_per_outer < 0)
            throw ConfigError("OptimizerConfig: passive_steps_per_outer must be >= 0");
        if (patience < 1)
            throw ConfigError("OptimizerConfig: patience must be >= 1");
        if (!(dual_power_tol > 0) || dual_power_tol > 1e-6)
            throw ConfigError("OptimizerConfig: dual_power_tol must lie in (0, 1e-6]");
        if (!(armijo.growth > 1) || !(armijo.sufficient_decrease > 0) || armijo.sufficient_decrease >= 1 ||
            armijo.max_backtracks < 0)
            throw ConfigError("OptimizerConfig: invalid Armijo parameters");
    }
};

/// Everything a single optimization run needs besides the starting point.
template <class S> struct Problem {
    SystemDims dims;
    ChannelEstimates<S> est;
    ErrorModel<S> err;
    std::vector<S> omega;
    S power_budget = 1; ///< mW
};

enum class StopReason { Converged, MaxIterations, NoImprovement };

inline const char* to_string(StopReason r)
{
    switch (r) {
    case StopReason::Converged: return "converged";
    case StopReason::MaxIterations: return "max-iterations";
    case StopReason::NoImprovement: return "no-improvement";
    }
    return "?";
}

template <class S> struct TracePoint {
    S objective;
    S rate;
};

template <class S> struct RunResult {
    BeamformingState<S> state;
    std::vector<TracePoint<S>> trace;
    S initial_objective = 0;
    S objective = 0;
    S rate = 0;
    int iterations = 0;
    StopReason stop = StopReason::MaxIterations;
    /// Outer iterations in which the Armijo search ran out of backtracks.
    int sca_stalls = 0;
    DualSolveReport<S> last_dual{};

    [[nodiscard]] std::string stop_description() const
    {
        std::string s = to_string(stop);
        if (sca_stalls > 0)
            s += " (sca stalled " + std::to_string(sca_stalls) + "x)";
        return s;
    }
};

/// Random starting point: phases uniform over the alphabet (or [0, 2pi) when
/// bits == 0), precoders i.i.d. CSCG scaled to use exactly the power budget.
template <class S, class Generator>
BeamformingState<S> initialize_state(const SystemDims& dims, const ChannelEstimates<S>& est, S power_budget,
                                     const std::vector<S>& omega, Generator& rng)
{
    dims.validate();
    if (est.elements() != dims.N || est.tx_antennas() != dims.M || est.users() != dims.K || est.rx_antennas() != dims.Nr)
        throw ConfigError("initialize_state: channel estimates do not match SystemDims");
    if (!(power_budget > S(0)))
        throw ConfigError("initialize_state: power budget must be > 0");

    BeamformingState<S> st;
    st.phi.resize(dims.N);
    constexpr S two_pi = S(2) * std::numbers::pi_v<S>;
    if (dims.bits > 0) {
        const int L = dims.alphabet_size();
        std::uniform_int_distribution<int> level(0, L - 1);
        for (int n = 0; n < dims.N; ++n)
            st.phi(n) = S(level(rng)) * two_pi / S(L);
    } else {
        std::uniform_real_distribution<S> angle(S(0), two_pi);
        for (int n = 0; n < dims.N; ++n)
            st.phi(n) = wrap_phase(angle(rng));
    }
    for (int k = 0; k < dims.K; ++k)
        st.W.push_back(cscg_matrix<S>(dims.M, dims.Ns, S(1), rng));
    const S scale = std::sqrt(power_budget / total_power(st.W));
    for (auto& Wk : st.W)
        Wk *= scale;
    st.omega = omega;
    return st;
}

namespace detail {

template <class S> S fractional_decrease(S previous, S current)
{
    return (previous - current) / std::max(std::abs(previous), std::numeric_limits<S>::min());
}

template <class S> struct Evaluated {
    S objective;
    S rate;
};

template <class S> Evaluated<S> refresh(const Problem<S>& p, BeamformingState<S>& st)
{
    update_filters_and_weights(p.est, p.err, st);
    return {wmmse_objective(p.est, p.err, st), weighted_sum_rate(p.est, p.err, st)};
}

} // namespace detail

/// Block coordinate descent from a given starting point. Each outer iteration
/// updates the precoders through the power dual, takes the configured number
/// of passive steps on (F, d) (skipped when `optimize_phases` is false),
/// quantizes, and refreshes (C, T). The traced objective is evaluated at the
/// refreshed (C, T), where it equals sum(omega) Ns - rate.
template <class S>
RunResult<S> run_bcd(const OptimizerConfig& cfg, const Problem<S>& p, BeamformingState<S> st, bool optimize_phases)
{
    cfg.validate();
    p.dims.validate();
    p.est.validate();
    p.err.validate(p.dims.K);
    const int bits = cfg.continuous_phases ? 0 : p.dims.bits;
    const bool quantize_inside = bits > 0 && cfg.quantize_each_iteration;
    if (st.omega.empty())
        st.omega = p.omega;
    if (bits > 0)
        st.phi = quantize_phases(st.phi, bits);

    RunResult<S> out;
    auto eval = detail::refresh(p, st);
    out.initial_objective = eval.objective;

    BeamformingState<S> best = st;
    auto best_eval = eval;
    int non_improving = 0;
    S previous = eval.objective;
    ArmijoParams<S> armijo{S(cfg.armijo.beta0), S(cfg.armijo.growth), S(cfg.armijo.sufficient_decrease),
                           cfg.armijo.max_backtracks};
    const bool carry = quantize_inside && cfg.carry_continuous_phases;
    RVector<S> iterate = st.phi;

    for (int r = 1; r <= cfg.max_outer; ++r) {
        out.iterations = r;
        auto [report, W] = solve_power_dual(precoder_system(p.est, p.err, st), p.power_budget, S(cfg.dual_power_tol));
        st.W = std::move(W);
        out.last_dual = report;

        if (optimize_phases && cfg.passive_steps_per_outer > 0) {
            const auto coef = build_passive_coefficients(p.est, p.err, st);
            RVector<S> phi = carry ? iterate : st.phi;
            bool stalled = false;
            for (int s = 0; s < cfg.passive_steps_per_outer; ++s) {
                if (cfg.method == PassiveMethod::MM) {
                    phi = mm_update(coef, phi);
                } else {
                    auto step = sca_update(coef, phi, armijo);
                    stalled = stalled || step.stalled;
                    phi = std::move(step.phi);
                }
                if (quantize_inside && !carry)
                    phi = quantize_phases(phi, bits);
            }
            out.sca_stalls += stalled ? 1 : 0;
            iterate = phi;
            st.phi = quantize_inside ? quantize_phases(phi, bits) : phi;
        }

        eval = detail::refresh(p, st);
        out.trace.push_back({eval.objective, eval.rate});

        const S step_decrease = detail::fractional_decrease(previous, eval.objective);
        previous = eval.objective;
        if (detail::fractional_decrease(best_eval.objective, eval.objective) > S(0)) {
            best = st;
            best_eval = eval;
            non_improving = 0;
        } else {
            ++non_improving;
        }

        if (std::abs(step_decrease) < S(cfg.rel_tol)) {
            out.stop = StopReason::Converged;
            break;
        }
        if (non_improving >= cfg.patience) {
            out.stop = StopReason::NoImprovement;
            break;
        }
    }

    if (bits > 0 && !cfg.quantize_each_iteration) {
        best.phi = quantize_phases(best.phi, bits);
        auto [report, W] = solve_power_dual(precoder_system(p.est, p.err, best), p.power_budget, S(cfg.dual_power_tol));
        best.W = std::move(W);
        out.last_dual = report;
        best_eval = detail::refresh(p, best);
    }

    out.state = std::move(best);
    out.objective = best_eval.objective;
    out.rate = best_eval.rate;
    return out;
}

template <class S, class Generator>
RunResult<S> run_joint_design(const OptimizerConfig& cfg, const Problem<S>& p, Generator& rng)
{
    SystemDims dims = p.dims;
    if (cfg.continuous_phases)
        dims.bits = 0;
    return run_bcd(cfg, p, initialize_state(dims, p.est, p.power_budget, p.omega, rng), true);
}

/// Active beamforming only, phases frozen at their random initial values.
template <class S, class Generator>
RunResult<S> run_baseline_fixed_irs(const OptimizerConfig& cfg, const Problem<S>& p, Generator& rng)
{
    SystemDims dims = p.dims;
    if (cfg.continuous_phases)
        dims.bits = 0;
    return run_bcd(cfg, p, initialize_state(dims, p.est, p.power_budget, p.omega, rng), false);
}

/// The same problem with every IRS link and its estimation error removed.
template <class S> Problem<S> without_irs(Problem<S> p)
{
    p.est.G.setZero();
    for (auto& Hr : p.est.Hr)
        Hr.setZero();
    p.err.sigma2_g = 0;
    std::fill(p.err.sigma2_r.begin(), p.err.sigma2_r.end(), S(0));
    return p;
}

/// Direct transmission only.
template <class S, class Generator>
RunResult<S> run_baseline_no_irs(const OptimizerConfig& cfg, const Problem<S>& p, Generator& rng)
{
    return run_baseline_fixed_irs(cfg, without_irs(p), rng);
}

} // namespace irsbf
