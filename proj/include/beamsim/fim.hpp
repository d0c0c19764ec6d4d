// SPDX-License-Identifier: Apache-2.0
//
// beamsim: mm-wave MIMO beam selection with in-band positioning

#ifndef BEAMSIM_FIM_H
#define BEAMSIM_FIM_H

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "beamsim/channel.hpp"
#include "beamsim/geometry.hpp"

namespace beamsim {

enum class Parameterization { eta, eta_prime };

// Real symmetric information matrix tagged with its parameterization:
// eta = [tau_k, aod_k, aoa_k, hR_k, hI_k] per path (5K x 5K), or
// eta' = [p, alpha, h_0, s_1, h_1, ...].
struct FisherMatrix {
    Eigen::MatrixXd entries;
    Parameterization param = Parameterization::eta;
    int path_count = 0;
};

// Exact Fisher information of the channel parameters for one transmitted
// beam, assembled from the closed-form entries (1/sigma^2 = 2 N E_s Nr Nt / N0,
// pulse correlations A0/A1/A2 evaluated at the inter-path delay differences).
// Symmetric positive semidefinite by construction.
FisherMatrix fim_beam(const Beamformer& f, const std::vector<PathParams>& paths,
                      const Scenario& scene, const WaveformConfig& wf);

// Entrywise sum; Fisher information is additive across beams and iterations.
FisherMatrix accumulate(const std::vector<FisherMatrix>& fims);

// Congruence transform J' = T^T J T into the location parameterization.
FisherMatrix to_eta_prime(const FisherMatrix& J, const Eigen::MatrixXd& T);

// Inverse of an information matrix, computed through a Jacobi-equilibrated
// eigendecomposition. Returns nullopt when the matrix is singular or its
// equilibrated condition number exceeds cond_cap (unobservable geometry).
std::optional<Eigen::MatrixXd> invert_information(const Eigen::MatrixXd& J, double cond_cap = 1e12);

// Position error bound: sqrt of the trace of the 2x2 upper-left block of the
// full inverse. Rotation error bound: sqrt of the (3,3) element of the full
// inverse. Both return nullopt for unobservable J'.
std::optional<double> peb(const FisherMatrix& J_prime, double cond_cap = 1e12);
std::optional<double> reb(const FisherMatrix& J_prime, double cond_cap = 1e12);

// Error bounds on a log scale: 0 dB corresponds to 1 m (or 1 rad).
inline double error_bound_db(double bound) { return 20.0 * std::log10(bound); }

} // namespace beamsim

#endif
