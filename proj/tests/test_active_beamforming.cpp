#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

using namespace irsbf;
using oracle::cd;
using oracle::Mat;
using oracle::RVec;

namespace {

oracle::Instance scalar_user(cd h, cd w, double noise, double omega)
{
    oracle::Instance in;
    in.est.G = Mat::Zero(1, 1);
    in.est.Hd = {Mat::Constant(1, 1, std::conj(h))};
    in.est.Hr = {Mat::Zero(1, 1)};
    in.err = ErrorModel<double>::error_free(1, noise);
    in.st.W = {Mat::Constant(1, 1, w)};
    in.st.phi = RVec::Zero(1);
    in.st.omega = {omega};
    return in;
}

/// Largest |dL/dRe W| and |dL/dIm W| over all precoder entries, with (C, T) held fixed.
double lagrangian_gradient(const oracle::Instance& in, double lambda, double P, double step = 1e-4)
{
    double worst = 0;
    for (int k = 0; k < in.st.users(); ++k)
        for (Eigen::Index i = 0; i < in.st.W[k].size(); ++i)
            for (cd dir : {cd(1, 0), cd(0, 1)}) {
                auto plus = in.st;
                auto minus = in.st;
                plus.W[k](i) += step * dir;
                minus.W[k](i) -= step * dir;
                const double g = (lagrangian_value(in.est, in.err, plus, lambda, P) -
                                  lagrangian_value(in.est, in.err, minus, lambda, P)) /
                                 (2 * step);
                worst = std::max(worst, std::abs(g));
            }
    return worst;
}

} // namespace

TEST_CASE("receive filter")
{
    SUBCASE("scalar")
    {
        auto in = scalar_user(1.0, 1.0, 1.0, 1.0);
        CHECK(optimal_receive_filter(in.est, in.err, in.st, 0)(0, 0).real() == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("silent user")
    {
        auto in = oracle::random_instance(1, 3, 4, 2, 2, 2);
        in.st.W[1].setZero();
        CHECK(optimal_receive_filter(in.est, in.err, in.st, 1).norm() == 0.0);
    }
    SUBCASE("perturbations never lower tr(T E)")
    {
        auto rng = make_stream(2, 0);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            auto in = oracle::random_instance(10 + seed, 4, 5, 2, 2, 2);
            const Mat T = oracle::random_psd(rng, 2);
            const double best = (T * mse_matrix(in.est, in.err, in.st, 0)).trace().real();
            for (int t = 0; t < 100; ++t) {
                auto moved = in.st;
                moved.C[0] += cscg_matrix<double>(2, 2, 1e-3 * (1 + t), rng);
                CHECK((T * mse_matrix(in.est, in.err, moved, 0)).trace().real() >= best - 1e-12 * best);
            }
        }
    }
}

TEST_CASE("MSE weights")
{
    SUBCASE("scalar")
    {
        auto in = scalar_user(1.0, 1.0, 1.0, 1.5);
        update_filters_and_weights(in.est, in.err, in.st);
        const auto ow = optimal_weights(in.est, in.err, in.st, 0);
        CHECK(ow.E(0, 0).real() == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(ow.T(0, 0).real() == doctest::Approx(3.0).epsilon(1e-15));
    }
    SUBCASE("silent user")
    {
        auto in = oracle::random_instance(3, 3, 4, 2, 2, 2);
        in.st.W[0].setZero();
        update_filters_and_weights(in.est, in.err, in.st);
        const auto ow = optimal_weights(in.est, in.err, in.st, 0);
        CHECK(oracle::rel_fro(ow.E, Mat::Identity(2, 2)) < 1e-15);
        CHECK(oracle::rel_fro(ow.T, in.st.omega[0] * Mat::Identity(2, 2)) < 1e-15);
    }
    SUBCASE("spectrum of E in (0, 1], T positive definite")
    {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            auto in = oracle::random_instance(100 + seed, 4, 6, 2, 3, 2, true, 10.0);
            for (int k = 0; k < 3; ++k) {
                const auto ow = optimal_weights(in.est, in.err, in.st, k);
                CHECK(oracle::min_eig(ow.E) > 0.0);
                CHECK(oracle::max_eig(ow.E) <= 1.0 + 1e-12);
                CHECK(oracle::min_eig(ow.T) > 0.0);
                CHECK((ow.E - ow.E.adjoint()).norm() == 0.0);
            }
        }
    }
    SUBCASE("a singular MSE matrix is reported")
    {
        auto in = scalar_user(1.0, 1.0, 1.0, 1.0);
        in.st.C = {Mat::Constant(1, 1, 1.0)};
        CHECK_THROWS_AS(optimal_weights(in.est, in.err, in.st, 0), NumericalError);
    }
}

TEST_CASE("precoders for a fixed multiplier")
{
    SUBCASE("scalar closed form")
    {
        const cd h(0.6, -0.8);
        auto in = scalar_user(h, 1.0, 0.7, 1.0);
        in.st.C = {Mat::Constant(1, 1, cd(0.3, 0.2))};
        in.st.T = {Mat::Constant(1, 1, 1.7)};
        const cd c = in.st.C[0](0, 0);
        const double t = 1.7;
        const double lambda = 0.3;
        const cd expect = c * t * std::conj(h) / (std::norm(h) * std::norm(c) * t + lambda);
        const cd got = precoders_for_dual(in.est, in.err, in.st, lambda)[0](0, 0);
        CHECK(std::abs(got - expect) < 1e-15);
    }
    SUBCASE("large multiplier switches the transmitter off")
    {
        auto in = oracle::random_instance(4, 4, 5, 2, 2, 2);
        CHECK(total_power(precoders_for_dual(in.est, in.err, in.st, 1e12)) < 1e-20);
    }
    SUBCASE("stationary point of the Lagrangian")
    {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            auto in = oracle::random_instance(200 + seed, 4, 5, 2, 2, 2);
            const double lambda = 0.05 * (1 + seed);
            in.st.W = precoders_for_dual(in.est, in.err, in.st, lambda);
            const double scale = std::abs(lagrangian_value(in.est, in.err, in.st, lambda, 1.0)) + 1.0;
            CHECK(lagrangian_gradient(in, lambda, 1.0) <= 1e-8 * scale);
        }
    }
    SUBCASE("rank-deficient system at zero multiplier gets a ridge")
    {
        auto in = oracle::random_instance(5, 4, 3, 2, 1, 1, false);
        const auto sys = precoder_system(in.est, in.err, in.st);
        const auto W = precoders_for_dual(sys, 0.0);
        CHECK(W[0].allFinite());
        PrecoderSystem<double> empty{Mat::Zero(4, 4), {Mat::Ones(4, 1)}};
        CHECK_THROWS_AS(precoders_for_dual(empty, 0.0), NumericalError);
        CHECK_THROWS_AS(precoders_for_dual(sys, -1.0), ConfigError);
    }
    SUBCASE("shared system matches a per-user solve")
    {
        auto in = oracle::random_instance(6, 4, 5, 2, 3, 2);
        const auto sys = precoder_system(in.est, in.err, in.st);
        const auto W = precoders_for_dual(sys, 0.2);
        const Mat A = sys.A + 0.2 * Mat::Identity(4, 4);
        for (int k = 0; k < 3; ++k)
            CHECK(oracle::rel_fro(W[k], Mat(A.fullPivLu().solve(sys.rhs[k]))) < 1e-12);
    }
}

TEST_CASE("power dual")
{
    SUBCASE("loose budget leaves the multiplier at zero")
    {
        auto in = oracle::random_instance(7, 4, 5, 2, 2, 2);
        const double p0 = total_power(precoders_for_dual(in.est, in.err, in.st, 0.0));
        const auto [report, W] = solve_power_dual(in.est, in.err, in.st, 1e6 * p0);
        CHECK(report.lambda_star == 0.0);
        CHECK(total_power(W) == doctest::Approx(p0).epsilon(1e-14));
    }
    SUBCASE("tight budget is met with equality")
    {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            auto in = oracle::random_instance(300 + seed, 4, 5, 2, 2, 2);
            const double P = 1e-3 * (1 + seed);
            const auto [report, W] = solve_power_dual(in.est, in.err, in.st, P);
            CHECK(report.lambda_star > 0.0);
            CHECK(total_power(W) <= P * (1 + 1e-6));
            CHECK(std::abs(total_power(W) - P) / P <= 1e-4);
            CHECK(report.power_used == total_power(W));

            // dense log-grid scan brackets the same multiplier
            const auto sys = precoder_system(in.est, in.err, in.st);
            double lo = 0, hi = 0;
            double prev = 1e-8;
            for (int i = 1; i <= 400; ++i) {
                const double lam = 1e-8 * std::pow(10.0, i * 0.04);
                if (total_power(precoders_for_dual(sys, lam)) <= P) {
                    lo = prev;
                    hi = lam;
                    break;
                }
                prev = lam;
            }
            REQUIRE(hi > 0);
            CHECK(report.lambda_star >= lo);
            CHECK(report.lambda_star <= hi);
        }
    }
    SUBCASE("power is non-increasing in the multiplier")
    {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            auto in = oracle::random_instance(400 + seed, 4, 5, 2, 2, 2);
            const auto sys = precoder_system(in.est, in.err, in.st);
            double prev = std::numeric_limits<double>::infinity();
            for (int i = 0; i < 100; ++i) {
                const double p = total_power(precoders_for_dual(sys, 1e-4 * std::pow(10.0, i * 0.07)));
                CHECK(p <= prev * (1 + 1e-12));
                prev = p;
            }
        }
    }
    SUBCASE("no bracket for absurd budgets")
    {
        PrecoderSystem<double> sys{Mat::Zero(2, 2), {Mat::Ones(2, 1)}};
        CHECK_THROWS_AS(solve_power_dual(sys, 1e-60), ConfigError);
        CHECK_THROWS_AS(solve_power_dual(sys, 0.0), ConfigError);
    }
}

TEST_CASE("Lagrangian")
{
    auto in = oracle::random_instance(8, 3, 4, 2, 2, 2);
    for (auto& W : in.st.W)
        W.setZero();
    CHECK(lagrangian_value(in.est, in.err, in.st, 0.7, 2.0) == doctest::Approx(-1.4).epsilon(1e-15));

    auto s = scalar_user(cd(0.5, 0.5), cd(1.0, -0.5), 0.3, 1.0);
    s.st.C = {Mat::Constant(1, 1, cd(0.2, 0.1))};
    s.st.T = {Mat::Constant(1, 1, 2.0)};
    const cd h = cd(0.5, 0.5);
    const cd w = cd(1.0, -0.5);
    const cd c = cd(0.2, 0.1);
    const double q = std::norm(h * w);
    const double expect = 0.4 * (std::norm(w) - 3.0) + 2.0 * std::norm(c) * q - 2.0 * 2.0 * std::real(std::conj(c) * h * w);
    CHECK(lagrangian_value(s.est, s.err, s.st, 0.4, 3.0) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("one active pass does not increase the objective")
{
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto in = oracle::random_instance(500 + seed, 4, 6, 2, 2, 2);
        const double P = 1.0;
        const double before = wmmse_objective(in.est, in.err, in.st);
        auto [report, W] = solve_power_dual(in.est, in.err, in.st, P, 1e-10);
        in.st.W = std::move(W);
        update_filters_and_weights(in.est, in.err, in.st);
        const double after = wmmse_objective(in.est, in.err, in.st);
        CHECK(after <= before + 1e-8 * std::abs(before));
    }
}
