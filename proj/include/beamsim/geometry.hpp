// SPDX-License-Identifier: Apache-2.0
//
// beamsim: mm-wave MIMO beam selection with in-band positioning

#ifndef BEAMSIM_GEOMETRY_H
#define BEAMSIM_GEOMETRY_H

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace beamsim {

inline constexpr double speed_of_light = 299792458.0;
inline constexpr double pi = 3.14159265358979323846;

// Wrap an angle to (-pi, pi].
double wrap_angle(double a);

// Wrap an angle to [0, 2*pi).
double wrap_angle_2pi(double a);

// Ground truth for one simulation instance: device positions, scatterers,
// array geometry and RF constants. All quantities in SI units.
struct Scenario {
    Eigen::Vector2d tx_pos{0.0, 0.0};              // D1 (known reference)
    Eigen::Vector2d rx_pos{10.0, 0.0};             // D2 (to be located)
    double rx_orientation = 0.0;                   // D2 array rotation, rad in [0, 2*pi)
    std::vector<Eigen::Vector2d> scatterers;       // point scatterers
    double carrier_freq = 60e9;                    // Hz
    double bandwidth = 100e6;                      // Hz
    double noise_psd = 3.9810717055349695e-21;     // W/Hz (-84 dBm/GHz)
    int n_tx = 64;
    int n_rx = 64;
    double element_spacing = 0.0;                  // m; 0 means lambda/2
    int n_symbols = 64;
    double symbol_energy = 1.0;                    // J

    double wavelength() const { return speed_of_light / carrier_freq; }
    double spacing() const { return element_spacing > 0.0 ? element_spacing : 0.5 * wavelength(); }
    int path_count() const { return 1 + static_cast<int>(scatterers.size()); }

    // Throws std::invalid_argument on coincident points or non-physical constants.
    void validate() const;
};

// One propagation path of the geometric channel: delay, angle of departure,
// angle of arrival (both measured from the respective array broadside) and
// complex gain. scatterer_index is -1 for the line-of-sight path.
struct PathParams {
    double delay = 0.0;             // s
    double aod = 0.0;               // rad
    double aoa = 0.0;               // rad
    std::complex<double> gain{0.0, 0.0};
    int scatterer_index = -1;
};

// Position/orientation estimate with its 3x3 covariance over [px, py, alpha].
struct LocationState {
    Eigen::Vector2d position{0.0, 0.0};
    double orientation = 0.0;
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
};

// Rule used to decide whether two paths are unresolvable in angle.
enum class AngleResolutionRule {
    rayleigh,   // |sin a - sin b| <= lambda / (N_r d)
    literal,    // N_r lambda |sin a - sin b| <= d
};

// Derive the per-path channel parameters (delays, AOD/AOA, complex gains)
// from the scene geometry. Entry 0 is the LOS path; entry k >= 1 goes via
// scatterer k-1. Gains follow the free-space model
//   h_0 = exp(-j 2 pi f_c tau_0) / sqrt(rho_0),  rho_0 = (2 pi |q-p| / lambda)^2
//   h_k = exp(-j 2 pi f_c tau_k) / sqrt(rho_k),  rho_k = (2 pi |q-s||s-p| / lambda)^2
std::vector<PathParams> path_params_from_scene(const Scenario& scene);

// Collapse every pair of paths that is unresolvable in BOTH time
// (|tau_a - tau_b| <= 1/B) and angle (AngleResolutionRule on the AOAs) into a
// single path carrying the summed complex gain and the parameters of the
// stronger member. Output is pairwise resolvable; idempotent.
std::vector<PathParams> merge_unresolvable(std::vector<PathParams> paths, const Scenario& scene,
                                           AngleResolutionRule rule = AngleResolutionRule::rayleigh);

// Jacobian T of the channel parameters eta = [tau_k, aod_k, aoa_k, hR_k, hI_k]
// with respect to the location parameters eta' = [p, alpha, h_0, s_1, h_1, ...]:
// T_ij = d eta_i / d eta'_j, size 5K x (3 + 2 + 4(K-1)) when path 0 is LOS.
Eigen::MatrixXd jacobian_T(const std::vector<PathParams>& paths, const Scenario& scene);

// Number of eta' columns implied by a (merged) path list: 3 for [p, alpha],
// plus 2 gain columns per path plus 2 scatterer-coordinate columns per
// non-LOS path.
int eta_prime_dimension(const std::vector<PathParams>& paths);

// Recover the receiver pose from the LOS parameters (tau_0, aod_0, aoa_0);
// inverse of the LOS part of path_params_from_scene.
void location_from_los(const PathParams& los, const Scenario& scene,
                       Eigen::Vector2d& rx_pos, double& rx_orientation);

} // namespace beamsim

#endif
