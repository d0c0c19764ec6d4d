// SPDX-License-Identifier: Apache-2.0
//
// beamsim: mm-wave MIMO beam selection with in-band positioning

#ifndef BEAMSIM_PROTOCOL_H
#define BEAMSIM_PROTOCOL_H

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "beamsim/fim.hpp"
#include "beamsim/rng.hpp"

namespace beamsim {

enum class ProtocolKind { CBS, D_JPBS, C_JPBS };

const char* protocol_name(ProtocolKind kind);

struct ProtocolConfig {
    ProtocolKind kind = ProtocolKind::CBS;
    int initial_active = 2;           // N_t^(1)
    int initial_beams = 2;            // M_t^(1)
    double hpbw_multiplier = 3.0;     // factor in the AOD-uncertainty criterion
    std::vector<double> epsilon_grid; // search grid for the beam-direction offset, rad
    std::uint64_t rng_seed = 1;
    int snr_gain_exponent = 2;
    double cond_cap = 1e12;
    bool rsps_noise = false;          // additive gaussian RSPS measurement noise
    AngleResolutionRule angle_rule = AngleResolutionRule::rayleigh;

    static std::vector<double> default_epsilon_grid();
    void validate(const Scenario& scene) const;
};

struct IterationRecord {
    BeamSet beams;
    Eigen::VectorXd powers;           // measured RSPS per beam
    int n_active = 0;
    bool hierarchical = true;         // branch that selected this iteration's beams
    std::optional<LocationState> estimate;
    std::optional<FisherMatrix> fim_snapshot; // accumulated eta FIM through this iteration
    std::optional<double> peb_m;
    std::optional<double> reb_rad;
};

struct ProtocolTrace {
    ProtocolKind kind = ProtocolKind::CBS;
    std::vector<IterationRecord> iterations;
    Beamformer selected_beam;
    int transactions_exact = 0;       // sum_i (M_t^(i) + 2) + 1
    int transactions_approx = 0;      // sum_i M_t^(i)
    double final_snr_db = 0.0;
};

// Conventional hierarchical received-power beam search: level 1 probes
// initial_beams wide beams tiling sin-space; each level doubles the active
// antennas and probes the 3 codebook beams nearest the previous winner.
ProtocolTrace run_cbs(const Scenario& scene, const ProtocolConfig& cfg, const WaveformConfig& wf);

// Joint positioning and beam selection (discrete or continuous codebook).
ProtocolTrace run_jpbs(const Scenario& scene, const ProtocolConfig& cfg, const WaveformConfig& wf);

// CRLB-achieving gaussian estimator surrogate: the position/orientation
// estimate is drawn around the truth with covariance [J'^-1]_{1:3,1:3}.
// Returns nullopt (no estimate) when J' is unobservable.
std::optional<LocationState> estimator_surrogate(const FisherMatrix& J_prime,
                                                 const Eigen::Vector2d& true_pos,
                                                 double true_orientation, Rng& rng,
                                                 double cond_cap = 1e12);

// Same surrogate with the standard-normal error vector supplied by the
// caller. A protocol run keeps one such vector for all its iterations: the
// per-iteration marginals stay N(beta, Sigma^(i)) while the estimate path
// tightens consistently as information accumulates, the way the errors of a
// sequential estimator on growing data behave.
std::optional<LocationState> estimator_surrogate(const FisherMatrix& J_prime,
                                                 const Eigen::Vector2d& true_pos,
                                                 double true_orientation, const Eigen::Vector3d& z,
                                                 double cond_cap = 1e12);

// AOD estimate and its linearized standard deviation from a location estimate.
struct AodStats {
    double theta_hat = 0.0;
    double sigma = 0.0;
};
AodStats aod_stats(const LocationState& state, const Scenario& scene);

struct AntennaSelection {
    int n_next = 0;
    bool hierarchical = false;
};

// Next active-antenna count: hierarchical doubling while the AOD uncertainty
// is large, otherwise the largest ladder value N <= N_t that still satisfies
// multiplier * HPBW(N, theta_hat) >= sigma. The step into the full aperture
// is additionally gated on the three beams being able to tile the AOD span
// (the run terminates there, so a mispointed terminal set cannot recover).
AntennaSelection select_active_antennas(double theta_hat, double sigma, int n_prev,
                                        const Scenario& scene, CodebookKind kind,
                                        double multiplier);

// Three beam pointing directions covering the AOD region: the center beam at
// (or nearest to) theta_hat, the flankers chosen to minimize the expected
// future position uncertainty trace{[J_prev' + J'(theta_0,1,2)]^-1_{1:2,1:2}}
// with the new-beam FIMs evaluated at the estimated channel parameters and
// the objective averaged over quadrature nodes of the AOD posterior.
std::array<double, 3> optimize_beam_directions(double theta_hat, double sigma,
                                               const FisherMatrix& J_prev_eta_prime,
                                               const std::vector<PathParams>& est_paths,
                                               const Scenario& est_scene, int n_active,
                                               const ProtocolConfig& cfg,
                                               const WaveformConfig& wf);

// Line-oriented trace serialization, one row per iteration.
void write_trace(const ProtocolTrace& trace, std::ostream& os);

} // namespace beamsim

#endif
