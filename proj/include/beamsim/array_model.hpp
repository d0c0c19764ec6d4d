// SPDX-License-Identifier: Apache-2.0
//
// beamsim: mm-wave MIMO beam selection with in-band positioning

#ifndef BEAMSIM_ARRAY_MODEL_H
#define BEAMSIM_ARRAY_MODEL_H

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "beamsim/geometry.hpp"

namespace beamsim {

enum class CodebookKind {
    discrete4phase,  // per-element phase quantized to {0, pi/2, pi, -pi/2}
    continuous,      // exact steering phases toward the pointing direction
};

// Unit-norm analog beamforming vector with N'_t active contiguous antennas,
// zero-padded symmetrically to the full aperture.
struct Beamformer {
    Eigen::VectorXcd weights;
    int active_count = 0;
    std::optional<double> pointing;   // rad; intended max-gain direction
    CodebookKind kind = CodebookKind::continuous;
};

struct BeamSet {
    std::vector<Beamformer> beams;
    int iteration = 0;
};

// ULA steering vector, entry l = (1/sqrt(n)) exp(j 2 pi l d sin(theta) / lambda).
Eigen::VectorXcd steering_vector(double theta, int n, double d, double lambda);

// Element-wise derivative of steering_vector with respect to theta:
// entry l picks up the factor j (2 pi l d / lambda) cos(theta).
Eigen::VectorXcd steering_vector_deriv(double theta, int n, double d, double lambda);

// Build a beam pointed at theta_m using n_active centered antennas. The
// discrete kind quantizes each active element's steering phase to the nearest
// of {0, pi/2, pi, -pi/2}. Throws if the zero padding cannot be centered.
Beamformer make_beam(double theta_m, int n_active, const Scenario& scene, CodebookKind kind);

// |a_tx(theta)^H f|, in [0, 1].
double beam_gain(const Beamformer& f, double theta, const Scenario& scene);

// Pointing directions of the M_t-beam codebook tiling sin-space:
// sin(theta_m) = -1 + (2m + 1) / M_t, m = 0 .. M_t - 1.
std::vector<double> codebook_directions(int m_beams);

// Half-power beamwidth of the beam with n_active antennas pointed at
// theta_max: angular separation of the two -3 dB points around the peak,
// found by bisection (1e-6 rad). Returns pi when a crossing is missing
// inside [-pi/2, pi/2]. Results are memoized; safe for concurrent use.
double hpbw(int n_active, double theta_max, const Scenario& scene, CodebookKind kind);

} // namespace beamsim

#endif
