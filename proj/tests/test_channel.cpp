#include <doctest.h>

#include <cmath>

#include "beamsim/channel.hpp"
#include "beamsim/rng.hpp"
#include "oracles.hpp"

using namespace beamsim;

namespace {

Scenario nominal_scene() {
    Scenario scene;
    scene.rx_pos = Eigen::Vector2d(10.0, 0.0);
    scene.scatterers = {Eigen::Vector2d(5.0, 5.0)};
    scene.symbol_energy = calibrate_symbol_energy(scene);
    return scene;
}

} // namespace

TEST_CASE("pulse correlation limits at zero delay are exact") {
    const double B = 100e6;
    CHECK(pulse_corr(0, 0.0, B) == 1.0);
    CHECK(pulse_corr(1, 0.0, B) == 0.0);
    CHECK(pulse_corr(2, 0.0, B) == doctest::Approx(pi * pi * B * B / 3.0).epsilon(1e-15));
    CHECK(std::abs(pulse_corr(0, 1.0 / B, B)) < 1e-12);
}

TEST_CASE("pulse correlations match time-domain quadrature") {
    const double B = 100e6;
    for (double bd : {0.03, 0.17, 0.37, 0.81, 1.43, 2.7}) {
        const double delta = bd / B;
        for (int order : {0, 1, 2}) {
            const double cf = pulse_corr(order, delta, B);
            const double quad = beamsim::testing::quad_pulse_corr(order, delta, B);
            CHECK(std::abs(cf - quad) <= 1e-6 * std::abs(cf));
        }
    }
}

TEST_CASE("A1 is odd and A0/A2 are even in the delay") {
    const double B = 100e6;
    const double delta = 0.23 / B;
    CHECK(pulse_corr(0, -delta, B) == doctest::Approx(pulse_corr(0, delta, B)).epsilon(1e-14));
    CHECK(pulse_corr(1, -delta, B) == doctest::Approx(-pulse_corr(1, delta, B)).epsilon(1e-14));
    CHECK(pulse_corr(2, -delta, B) == doctest::Approx(pulse_corr(2, delta, B)).epsilon(1e-14));
}

TEST_CASE("channel matrices are scaled rank-one outer products") {
    Scenario scene = nominal_scene();
    scene.scatterers.clear();
    auto paths = path_params_from_scene(scene);
    paths[0].aod = 0.0;
    paths[0].aoa = 0.0;
    const auto H = channel_matrices(paths, scene);
    REQUIRE(H.per_path.size() == 1);
    // broadside vectors make H = h * ones
    for (int r = 0; r < scene.n_rx; r += 17)
        for (int c = 0; c < scene.n_tx; c += 13)
            CHECK(std::abs(H.per_path[0](r, c) - paths[0].gain) < 1e-12 * std::abs(paths[0].gain));

    const double fro = H.per_path[0].norm();
    CHECK(fro == doctest::Approx(std::sqrt(64.0 * 64.0) * std::abs(paths[0].gain)).epsilon(1e-12));
}

TEST_CASE("two-path channel has rank two when angles differ") {
    const Scenario scene = nominal_scene();
    const auto paths = path_params_from_scene(scene);
    const auto H = channel_matrices(paths, scene);
    const Eigen::MatrixXcd sum = H.per_path[0] + H.per_path[1];
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sum);
    const auto& sv = svd.singularValues();
    CHECK(sv(0) > 0.0);
    CHECK(sv(1) > 1e-6 * sv(0));
    CHECK(sv(2) < 1e-10 * sv(0));
}

TEST_CASE("snr of the matched beam and calibration point") {
    Scenario scene = nominal_scene();
    const WaveformConfig wf = WaveformConfig::from_scene(scene);

    SUBCASE("single-path matched beam reaches Nt Nr Es |h|^2 / N0") {
        scene.scatterers.clear();
        const auto paths = path_params_from_scene(scene);
        const auto matched = make_beam(paths[0].aod, scene.n_tx, scene, CodebookKind::continuous);
        const double expected =
            64.0 * 64.0 * wf.symbol_energy * std::norm(paths[0].gain) / scene.noise_psd;
        CHECK(snr_linear(matched, paths, scene, wf) == doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("calibrated scene gives 0 dB at [10, 0]") {
        const auto paths = path_params_from_scene(scene);
        const auto matched = make_beam(paths[0].aod, scene.n_tx, scene, CodebookKind::continuous);
        CHECK(std::abs(snr_db(matched, paths, scene, wf)) < 1e-9);
    }

    SUBCASE("halving the symbol energy costs 3.01 dB") {
        const auto paths = path_params_from_scene(scene);
        const auto matched = make_beam(paths[0].aod, scene.n_tx, scene, CodebookKind::continuous);
        WaveformConfig half = wf;
        half.symbol_energy *= 0.5;
        const double drop = snr_db(matched, paths, scene, wf) - snr_db(matched, paths, scene, half);
        CHECK(drop == doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-9));
    }

    SUBCASE("snr at [20, 0] is -6.02 dB") {
        scene.rx_pos = Eigen::Vector2d(20.0, 0.0);
        const auto paths = path_params_from_scene(scene);
        const auto matched = make_beam(paths[0].aod, scene.n_tx, scene, CodebookKind::continuous);
        CHECK(snr_db(matched, paths, scene, wf) == doctest::Approx(-6.0206).epsilon(2e-3));
    }
}

TEST_CASE("snr is invariant to a global beam phase") {
    const Scenario scene = nominal_scene();
    const WaveformConfig wf = WaveformConfig::from_scene(scene);
    const auto paths = path_params_from_scene(scene);
    auto f = make_beam(0.2, 32, scene, CodebookKind::discrete4phase);
    const double before = snr_linear(f, paths, scene, wf);
    const double rsps_before = rsps(f, paths, scene, wf);
    f.weights *= std::polar(1.0, -2.1);
    CHECK(snr_linear(f, paths, scene, wf) == doctest::Approx(before).epsilon(1e-12));
    CHECK(rsps(f, paths, scene, wf) == doctest::Approx(rsps_before).epsilon(1e-12));
}

TEST_CASE("rsps closed form on a single path") {
    Scenario scene = nominal_scene();
    scene.scatterers.clear();
    const WaveformConfig wf = WaveformConfig::from_scene(scene);
    const auto paths = path_params_from_scene(scene);

    SUBCASE("matched beam collects N Es Nt Nr |h|^2") {
        const auto matched = make_beam(paths[0].aod, scene.n_tx, scene, CodebookKind::continuous);
        const double expected =
            wf.n_symbols * wf.symbol_energy * 64.0 * 64.0 * std::norm(paths[0].gain);
        CHECK(rsps(matched, paths, scene, wf) == doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("orthogonal beam collects nothing") {
        // steering directions separated by 2/N in sin space are orthogonal
        const double sin_orth = std::sin(paths[0].aod) + 2.0 / scene.n_tx;
        const auto f = make_beam(std::asin(sin_orth), scene.n_tx, scene, CodebookKind::continuous);
        const double expected =
            wf.n_symbols * wf.symbol_energy * 64.0 * 64.0 * std::norm(paths[0].gain);
        CHECK(rsps(f, paths, scene, wf) < 1e-20 * expected);
    }
}

TEST_CASE("rsps expansion matches direct time integration on random two-path scenes") {
    Rng rng(23);
    for (int trial = 0; trial < 3; ++trial) {
        Scenario scene = beamsim::testing::random_scene(rng, 2, 8, 8);
        scene.n_symbols = 16;
        const WaveformConfig wf = WaveformConfig::from_scene(scene);
        const auto paths = merge_unresolvable(path_params_from_scene(scene), scene);
        const auto f = make_beam(-0.7 + 1.4 * rng.uniform(), 4, scene, CodebookKind::discrete4phase);
        const double expansion = rsps(f, paths, scene, wf);
        const double direct = beamsim::testing::quad_rsps(f, paths, scene, wf);
        CHECK(std::abs(expansion - direct) <= 1e-5 * std::abs(direct));
    }
}

TEST_CASE("two-path rsps respects the cross-term bound") {
    const Scenario scene = nominal_scene();
    const WaveformConfig wf = WaveformConfig::from_scene(scene);
    const auto paths = path_params_from_scene(scene);
    const auto f = make_beam(paths[0].aod, scene.n_tx, scene, CodebookKind::continuous);

    const double both = rsps(f, paths, scene, wf);
    const double los_only = rsps(f, {paths[0]}, scene, wf);
    const double nlos_only = rsps(f, {paths[1]}, scene, wf);
    const double a0 = std::abs(pulse_corr(0, paths[0].delay - paths[1].delay, wf.bandwidth));
    CHECK(both >= los_only - 2.0 * std::sqrt(los_only * nlos_only) * a0 - 1e-12 * los_only);
}

TEST_CASE("calibration scaling properties") {
    Scenario scene;
    scene.scatterers = {Eigen::Vector2d(5.0, 5.0)};
    const double es = calibrate_symbol_energy(scene);
    CHECK(es > 0.0);

    Scenario noisier = scene;
    noisier.noise_psd *= 2.0;
    CHECK(calibrate_symbol_energy(noisier) == doctest::Approx(2.0 * es).epsilon(1e-12));
}
