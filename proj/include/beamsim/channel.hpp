// SPDX-License-Identifier: Apache-2.0
//
// beamsim: mm-wave MIMO beam selection with in-band positioning

#ifndef BEAMSIM_CHANNEL_H
#define BEAMSIM_CHANNEL_H

#include <Eigen/Dense>
#include <vector>

#include "beamsim/array_model.hpp"
#include "beamsim/geometry.hpp"

namespace beamsim {

enum class PulseModel { flat_spectrum };

// Training-signal parameters: x(t) = sum_n a_n p(t - n/B) with E{|a_n|^2} = E_s.
struct WaveformConfig {
    PulseModel pulse_model = PulseModel::flat_spectrum;
    double bandwidth = 100e6;     // Hz
    int n_symbols = 64;
    double symbol_energy = 1.0;   // J

    static WaveformConfig from_scene(const Scenario& scene) {
        return WaveformConfig{PulseModel::flat_spectrum, scene.bandwidth, scene.n_symbols,
                              scene.symbol_energy};
    }
};

// Rank-one per-path channel matrices H_k = sqrt(Nt Nr) h_k a_rx a_tx^H.
struct ChannelMatrix {
    std::vector<Eigen::MatrixXcd> per_path;
    std::vector<double> delays;
};

// Correlation functions of the unit-energy flat-spectrum pulse and its time
// derivative, with x = pi B delta:
//   A0 = int p(t-delta) p(t) dt        = sin(x)/x
//   A1 = int pdot(t-delta) p(t) dt     = pi B (sin x - x cos x) / x^2
//   A2 = int pdot(t-delta) pdot(t) dt  = pi^2 B^2 (2 cos x / x^2 + sin x / x - 2 sin x / x^3)
// Limits at delta = 0 are exact: A0(0) = 1, A1(0) = 0, A2(0) = pi^2 B^2 / 3.
double pulse_corr(int order, double delta, double bandwidth);

ChannelMatrix channel_matrices(const std::vector<PathParams>& paths, const Scenario& scene);

// SNR of the beamformed link, linear scale:
//   sum_k (Nt Nr E_s / N0) |h_k|^2 |a_tx(aod_k)^H f|^g
// The gain exponent g defaults to 2 (received energy is quadratic in the
// array response); g = 1 reproduces the unsquared form.
double snr_linear(const Beamformer& f_sel, const std::vector<PathParams>& paths,
                  const Scenario& scene, const WaveformConfig& wf, int gain_exponent = 2);

double snr_db(const Beamformer& f_sel, const std::vector<PathParams>& paths,
              const Scenario& scene, const WaveformConfig& wf, int gain_exponent = 2);

// Noise-free received reference-signal energy for one training beam,
//   int || sum_k H_k f x(t - tau_k) ||^2 dt
//     = N E_s sum_{k,k'} conj(c_k) c_k' (a_rx,k^H a_rx,k') A0(tau_k - tau_k'),
// with c_k = sqrt(Nt Nr) h_k (a_tx,k^H f).
double rsps(const Beamformer& f, const std::vector<PathParams>& paths, const Scenario& scene,
            const WaveformConfig& wf);

// Symbol energy that calibrates the matched full-array beam SNR to 0 dB at
// the reference receiver position [10, 0] of the given template scene.
double calibrate_symbol_energy(const Scenario& scene_template, int gain_exponent = 2);

} // namespace beamsim

#endif
