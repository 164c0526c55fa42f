#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

using namespace irsbf;
using oracle::cd;
using oracle::Mat;
using oracle::Vec;

TEST_CASE("path loss")
{
    CHECK(path_loss_direct(1.0) == doctest::Approx(32.6));
    CHECK(path_loss_direct(10.0) == doctest::Approx(69.3));
    CHECK(path_loss_direct(200.0) == doctest::Approx(117.0478).epsilon(1e-6));
    CHECK(path_loss_irs(1.0) == doctest::Approx(35.6));
    CHECK(path_loss_irs(10.0) == doctest::Approx(57.6));
    CHECK(path_loss_irs(200.0) == doctest::Approx(86.2227).epsilon(1e-6));
    CHECK_THROWS_AS(path_loss_direct(0.0), ConfigError);
    CHECK_THROWS_AS(path_loss_irs(-3.0), ConfigError);
}

TEST_CASE("steering vector")
{
    CHECK(steering_vector(5, 0.0).isApproxToConstant(cd(1, 0)));
    CHECK(steering_vector(1, 0.7).size() == 1);
    CHECK(steering_vector(1, 0.7)(0) == cd(1, 0));
    const Vec a = steering_vector(8, 0.4);
    CHECK(a.cwiseAbs().isApproxToConstant(1.0, 1e-15));
    CHECK(std::arg(a(1)) == doctest::Approx(std::numbers::pi * std::sin(0.4)));
    CHECK_THROWS_AS(steering_vector(0, 0.1), ConfigError);
}

TEST_CASE("Rician links")
{
    const Vec ar = steering_vector(6, 0.3);
    const Vec at = steering_vector(4, -0.8);
    SUBCASE("line-of-sight limit is rank one")
    {
        auto rng = make_stream(1, 0);
        const Mat H = sample_rician<double>(6, 4, 20.0, 1e9, ar, at, rng);
        const double kappa = 0.1;
        CHECK(oracle::rel_fro(H, kappa * ar * at.adjoint()) < 1e-4);
        Eigen::JacobiSVD<Mat> svd(H);
        CHECK(svd.singularValues()(1) < 1e-4 * svd.singularValues()(0));
    }
    SUBCASE("no line of sight is Rayleigh with variance kappa^2")
    {
        auto rng = make_stream(2, 0);
        double acc = 0;
        const int draws = 10000;
        for (int i = 0; i < draws; ++i)
            acc += sample_rician<double>(6, 4, 10.0, 0.0, ar, at, rng).squaredNorm();
        CHECK(acc / (draws * 24.0) == doctest::Approx(0.1).epsilon(0.02));
    }
    SUBCASE("power normalization at nu = 10")
    {
        auto rng = make_stream(3, 0);
        double acc = 0;
        const int draws = 10000;
        for (int i = 0; i < draws; ++i)
            acc += sample_rician<double>(6, 4, 30.0, 10.0, ar, at, rng).squaredNorm();
        CHECK(acc / (draws * 24.0) == doctest::Approx(1e-3).epsilon(0.02));
    }
    SUBCASE("argument checks")
    {
        auto rng = make_stream(4, 0);
        CHECK_THROWS_AS(sample_rician<double>(6, 4, 0.0, -1.0, ar, at, rng), ConfigError);
        CHECK_THROWS_AS(sample_rician<double>(5, 4, 0.0, 1.0, ar, at, rng), ConfigError);
    }
}

TEST_CASE("Rayleigh links")
{
    auto rng = make_stream(5, 0);
    const int draws = 10000;
    double power = 0;
    cd mean = 0;
    for (int i = 0; i < draws; ++i) {
        const Mat H = sample_rayleigh<double>(2, 2, 0.0, rng);
        power += H.squaredNorm();
        mean += H.sum();
    }
    CHECK(power / (4.0 * draws) == doctest::Approx(1.0).epsilon(0.02));
    // each of the 4 draws per matrix has unit variance
    CHECK(std::abs(mean) / (4.0 * draws) < 3.0 / std::sqrt(4.0 * draws));

    auto a = make_stream(6, 0);
    auto b = make_stream(6, 0);
    CHECK(sample_rayleigh<double>(3, 2, 50.0, a) == sample_rayleigh<double>(3, 2, 50.0, b));
}

TEST_CASE("scenario generation")
{
    ScenarioConfig cfg;
    SUBCASE("users at the center get equal weights")
    {
        cfg.ue_radius = 0.0;
        auto rng = make_stream(7, 0);
        const auto sc = generate_scenario<double>(cfg, rng);
        for (double w : sc.omega)
            CHECK(w == doctest::Approx(1.0).epsilon(1e-14));
        for (const auto& u : sc.users)
            CHECK(distance(u, cfg.ue_center) == 0.0);
    }
    SUBCASE("full-size deployment")
    {
        cfg.dims = {8, 100, 2, 3, 2, 2};
        auto rng = make_stream(8, 0);
        const auto sc = generate_scenario<double>(cfg, rng);
        CHECK(sc.est.G.rows() == 100);
        CHECK(sc.est.G.cols() == 8);
        CHECK(sc.est.users() == 3);
        CHECK(sc.est.Hd[2].rows() == 8);
        CHECK(sc.est.Hr[2].rows() == 100);
        CHECK(sc.est.rx_antennas() == 2);
        double sum = 0;
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(distance(sc.users[k], cfg.ue_center) <= 10.0);
            sum += sc.omega[k];
        }
        CHECK(sum == doctest::Approx(3.0).epsilon(1e-14));
    }
    SUBCASE("weights follow inverse direct path loss")
    {
        auto rng = make_stream(9, 0);
        const auto sc = generate_scenario<double>(cfg, rng);
        const double l0 = std::pow(10.0, -path_loss_direct(distance(cfg.bs_pos, sc.users[0])) / 10);
        const double l1 = std::pow(10.0, -path_loss_direct(distance(cfg.bs_pos, sc.users[1])) / 10);
        CHECK(sc.omega[0] / sc.omega[1] == doctest::Approx(l0 / l1).epsilon(1e-12));
    }
    SUBCASE("seeded")
    {
        auto a = make_stream(10, 0);
        auto b = make_stream(10, 0);
        const auto s1 = generate_scenario<double>(cfg, a);
        const auto s2 = generate_scenario<double>(cfg, b);
        CHECK(s1.est.G == s2.est.G);
        CHECK(s1.est.Hr[1] == s2.est.Hr[1]);
        CHECK(s1.omega == s2.omega);
    }
    SUBCASE("moving the IRS keeps the random draws paired")
    {
        auto moved = cfg;
        moved.irs_pos = {100.0, 30.0};
        auto a = make_stream(11, 0);
        auto b = make_stream(11, 0);
        const auto s1 = generate_scenario<double>(cfg, a);
        const auto s2 = generate_scenario<double>(moved, b);
        CHECK(s1.users == s2.users);
        CHECK(s1.est.Hd[0] == s2.est.Hd[0]);
    }
    SUBCASE("geometry angles")
    {
        // BS array along y: the IRS straight along +x is broadside
        CHECK(array_angle({0, 30}, {200, 30}, {0, 1}) == doctest::Approx(0.0));
        CHECK(array_angle({200, 30}, {0, 30}, {1, 0}) == doctest::Approx(-std::numbers::pi / 2));
        CHECK(array_angle({200, 30}, {200, 0}, {1, 0}) == doctest::Approx(0.0));
    }
    SUBCASE("invalid configurations")
    {
        cfg.bandwidth_hz = 0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg = {};
        cfg.irs_pos = cfg.bs_pos;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg = {};
        cfg.nmse = 1.0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
}

TEST_CASE("error calibration")
{
    ScenarioConfig cfg;
    auto rng = make_stream(12, 0);
    const auto sc = generate_scenario<double>(cfg, rng);

    SUBCASE("perfect estimates")
    {
        const auto err = calibrate_error_variances(sc.est, 0.0, cfg);
        CHECK(err.sigma2_g == 0.0);
        CHECK(err.sigma2_d[0] == 0.0);
        CHECK(err.sigma2_r[1] == 0.0);
    }
    SUBCASE("thermal noise")
    {
        CHECK(cfg.noise_mw() == doctest::Approx(std::pow(10.0, -11.7447)).epsilon(1e-4));
        CHECK(10 * std::log10(cfg.noise_mw()) == doctest::Approx(-117.447).epsilon(1e-5));
        CHECK(cfg.noise_mw() == doctest::Approx(1.8e-12).epsilon(0.01));
        const auto err = calibrate_error_variances(sc.est, 0.05, cfg);
        CHECK(err.sigma2_n[1] == cfg.noise_mw());
    }
    SUBCASE("sampled errors hit the target NMSE")
    {
        const double rho = 0.05;
        const auto err = calibrate_error_variances(sc.est, rho, cfg);
        auto draw = make_stream(13, 0);
        double g = 0, d = 0, r = 0;
        const int draws = 10000;
        for (int i = 0; i < draws; ++i) {
            g += cscg_matrix<double>(16, 4, err.sigma2_g, draw).squaredNorm();
            d += cscg_matrix<double>(4, 2, err.sigma2_d[0], draw).squaredNorm();
            r += cscg_matrix<double>(16, 2, err.sigma2_r[1], draw).squaredNorm();
        }
        CHECK(g / draws / sc.est.G.squaredNorm() == doctest::Approx(rho).epsilon(0.02));
        CHECK(d / draws / sc.est.Hd[0].squaredNorm() == doctest::Approx(rho).epsilon(0.02));
        CHECK(r / draws / sc.est.Hr[1].squaredNorm() == doctest::Approx(rho).epsilon(0.02));
    }
    SUBCASE("problem packaging")
    {
        cfg.pt_dbm = 10.0;
        auto again = make_stream(12, 0);
        const auto p = make_problem<double>(cfg, again);
        CHECK(p.power_budget == doctest::Approx(10.0));
        CHECK(p.est.G == sc.est.G);
        CHECK_THROWS_AS(calibrate_error_variances(sc.est, -0.1, cfg), ConfigError);
    }
}
