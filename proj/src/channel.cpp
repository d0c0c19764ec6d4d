// SPDX-License-Identifier: Apache-2.0
//
// beamsim: mm-wave MIMO beam selection with in-band positioning

#include "beamsim/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace beamsim {

double pulse_corr(int order, double delta, double bandwidth) {
    const double B = bandwidth;
    if (delta == 0.0) {
        // exact limits
        if (order == 0)
            return 1.0;
        if (order == 1)
            return 0.0;
        if (order == 2)
            return pi * pi * B * B / 3.0;
    }
    const double x = pi * B * delta;
    switch (order) {
    case 0:
        if (std::abs(x) < 1e-4)
            return 1.0 - x * x / 6.0 + x * x * x * x / 120.0;
        return std::sin(x) / x;
    case 1:
        // Small-x series of (sin x - x cos x)/x^2 avoids catastrophic cancellation.
        if (std::abs(x) < 1e-2)
            return pi * B * (x / 3.0 - x * x * x / 30.0 + std::pow(x, 5) / 840.0);
        return pi * B * (std::sin(x) - x * std::cos(x)) / (x * x);
    case 2:
        if (std::abs(x) < 1e-1) {
            const double x2 = x * x;
            return pi * pi * B * B * (1.0 / 3.0 - x2 / 10.0 + x2 * x2 / 168.0 - x2 * x2 * x2 / 6480.0);
        }
        return pi * pi * B * B *
               (2.0 * std::cos(x) / (x * x) + std::sin(x) / x - 2.0 * std::sin(x) / (x * x * x));
    default:
        throw std::invalid_argument("pulse_corr: order must be 0, 1 or 2");
    }
}

ChannelMatrix channel_matrices(const std::vector<PathParams>& paths, const Scenario& scene) {
    ChannelMatrix H;
    H.per_path.reserve(paths.size());
    H.delays.reserve(paths.size());
    const double d = scene.spacing();
    const double lambda = scene.wavelength();
    const double amp = std::sqrt(static_cast<double>(scene.n_tx) * scene.n_rx);
    for (const auto& p : paths) {
        const Eigen::VectorXcd arx = steering_vector(p.aoa, scene.n_rx, d, lambda);
        const Eigen::VectorXcd atx = steering_vector(p.aod, scene.n_tx, d, lambda);
        H.per_path.push_back(amp * p.gain * arx * atx.adjoint());
        H.delays.push_back(p.delay);
    }
    return H;
}

double snr_linear(const Beamformer& f_sel, const std::vector<PathParams>& paths,
                  const Scenario& scene, const WaveformConfig& wf, int gain_exponent) {
    if (gain_exponent != 1 && gain_exponent != 2)
        throw std::invalid_argument("snr_linear: gain exponent must be 1 or 2");
    const double front = static_cast<double>(scene.n_tx) * scene.n_rx * wf.symbol_energy / scene.noise_psd;
    double total = 0.0;
    for (const auto& p : paths) {
        const double g = beam_gain(f_sel, p.aod, scene);
        total += front * std::norm(p.gain) * (gain_exponent == 2 ? g * g : g);
    }
    return total;
}

double snr_db(const Beamformer& f_sel, const std::vector<PathParams>& paths,
              const Scenario& scene, const WaveformConfig& wf, int gain_exponent) {
    return 10.0 * std::log10(snr_linear(f_sel, paths, scene, wf, gain_exponent));
}

double rsps(const Beamformer& f, const std::vector<PathParams>& paths, const Scenario& scene,
            const WaveformConfig& wf) {
    const double d = scene.spacing();
    const double lambda = scene.wavelength();
    const double amp = std::sqrt(static_cast<double>(scene.n_tx) * scene.n_rx);
    const std::size_t K = paths.size();

    std::vector<std::complex<double>> c(K);
    std::vector<Eigen::VectorXcd> arx(K);
    for (std::size_t k = 0; k < K; ++k) {
        const Eigen::VectorXcd atx = steering_vector(paths[k].aod, scene.n_tx, d, lambda);
        c[k] = amp * paths[k].gain * atx.dot(f.weights);
        arx[k] = steering_vector(paths[k].aoa, scene.n_rx, d, lambda);
    }

    std::complex<double> energy = 0.0;
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < K; ++l) {
            const std::complex<double> rx_ip = arx[k].dot(arx[l]);
            energy += std::conj(c[k]) * c[l] * rx_ip *
                      pulse_corr(0, paths[k].delay - paths[l].delay, wf.bandwidth);
        }
    return wf.n_symbols * wf.symbol_energy * energy.real();
}

double calibrate_symbol_energy(const Scenario& scene_template, int gain_exponent) {
    Scenario ref = scene_template;
    ref.rx_pos = Eigen::Vector2d(10.0, 0.0);
    ref.symbol_energy = 1.0;
    const auto paths = path_params_from_scene(ref);
    const Beamformer matched = make_beam(paths[0].aod, ref.n_tx, ref, CodebookKind::continuous);
    const WaveformConfig wf = WaveformConfig::from_scene(ref);
    const double snr_unit = snr_linear(matched, paths, ref, wf, gain_exponent);
    return 1.0 / snr_unit;
}

} // namespace beamsim
