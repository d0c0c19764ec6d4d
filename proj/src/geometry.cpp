// SPDX-License-Identifier: Apache-2.0
//
// beamsim: mm-wave MIMO beam selection with in-band positioning

#include "beamsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace beamsim {

namespace {

double bearing(const Eigen::Vector2d& v) { return std::atan2(v.y(), v.x()); }

// d atan2(v_y, v_x) / d v
Eigen::RowVector2d bearing_grad(const Eigen::Vector2d& v) {
    const double n2 = v.squaredNorm();
    return Eigen::RowVector2d(-v.y() / n2, v.x() / n2);
}

std::complex<double> path_gain(double delay, double rho, double carrier_freq) {
    const double phase = -2.0 * pi * carrier_freq * delay;
    return std::polar(1.0 / std::sqrt(rho), phase);
}

} // namespace

double wrap_angle(double a) {
    a = std::fmod(a + pi, 2.0 * pi);
    if (a <= 0.0)
        a += 2.0 * pi;
    return a - pi;
}

double wrap_angle_2pi(double a) {
    a = std::fmod(a, 2.0 * pi);
    if (a < 0.0)
        a += 2.0 * pi;
    return a;
}

void Scenario::validate() const {
    constexpr double eps = 1e-9;
    if ((tx_pos - rx_pos).norm() < eps)
        throw std::invalid_argument("invalid scene: transmitter and receiver coincide");
    for (const auto& s : scatterers) {
        if ((s - tx_pos).norm() < eps || (s - rx_pos).norm() < eps)
            throw std::invalid_argument("invalid scene: scatterer coincides with a device");
    }
    if (element_spacing < 0.0)
        throw std::invalid_argument("invalid scene: element_spacing < 0");
    if (bandwidth <= 0.0 || carrier_freq <= 0.0 || noise_psd <= 0.0 || symbol_energy <= 0.0)
        throw std::invalid_argument("invalid scene: non-positive RF constant");
    if (n_tx < 2 || n_rx < 2 || n_symbols < 1)
        throw std::invalid_argument("invalid scene: array/symbol counts out of range");
}

std::vector<PathParams> path_params_from_scene(const Scenario& scene) {
    scene.validate();
    const Eigen::Vector2d q = scene.tx_pos;
    const Eigen::Vector2d p = scene.rx_pos;
    const double lambda = scene.wavelength();
    const double alpha = scene.rx_orientation;

    std::vector<PathParams> paths;
    paths.reserve(scene.path_count());

    // Broadside convention: the ULAs lie along the vertical axis, so path
    // angles are plane bearings measured from +x. The AOA is referenced to
    // the D2 array rotated by alpha.
    PathParams los;
    const double r0 = (p - q).norm();
    los.delay = r0 / speed_of_light;
    los.aod = bearing(p - q);
    los.aoa = wrap_angle(bearing(q - p) - alpha);
    los.gain = path_gain(los.delay, std::pow(2.0 * pi * r0 / lambda, 2), scene.carrier_freq);
    los.scatterer_index = -1;
    paths.push_back(los);

    for (std::size_t k = 0; k < scene.scatterers.size(); ++k) {
        const Eigen::Vector2d s = scene.scatterers[k];
        PathParams pk;
        const double r1 = (s - q).norm();
        const double r2 = (p - s).norm();
        pk.delay = (r1 + r2) / speed_of_light;
        pk.aod = bearing(s - q);
        pk.aoa = wrap_angle(bearing(s - p) - alpha);
        pk.gain = path_gain(pk.delay, std::pow(2.0 * pi * r1 * r2 / lambda, 2), scene.carrier_freq);
        pk.scatterer_index = static_cast<int>(k);
        paths.push_back(pk);
    }
    return paths;
}

std::vector<PathParams> merge_unresolvable(std::vector<PathParams> paths, const Scenario& scene,
                                           AngleResolutionRule rule) {
    if (paths.empty())
        throw std::invalid_argument("merge_unresolvable: empty path list");

    const double time_thresh = 1.0 / scene.bandwidth;
    const double lambda = scene.wavelength();
    const double d = scene.spacing();
    const double sin_thresh = (rule == AngleResolutionRule::rayleigh)
                                  ? lambda / (scene.n_rx * d)
                                  : d / (scene.n_rx * lambda);

    auto unresolvable = [&](const PathParams& a, const PathParams& b) {
        return std::abs(a.delay - b.delay) <= time_thresh &&
               std::abs(std::sin(a.aoa) - std::sin(b.aoa)) <= sin_thresh;
    };

    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i < paths.size() && !merged; ++i) {
            for (std::size_t j = i + 1; j < paths.size() && !merged; ++j) {
                if (!unresolvable(paths[i], paths[j]))
                    continue;
                const std::size_t strong = std::abs(paths[i].gain) >= std::abs(paths[j].gain) ? i : j;
                PathParams m = paths[strong];
                m.gain = paths[i].gain + paths[j].gain;
                paths[i] = m;
                paths.erase(paths.begin() + static_cast<std::ptrdiff_t>(j));
                merged = true;
            }
        }
    }
    return paths;
}

int eta_prime_dimension(const std::vector<PathParams>& paths) {
    int cols = 3;
    for (const auto& p : paths)
        cols += (p.scatterer_index < 0) ? 2 : 4;
    return cols;
}

Eigen::MatrixXd jacobian_T(const std::vector<PathParams>& paths, const Scenario& scene) {
    const Eigen::Vector2d q = scene.tx_pos;
    const Eigen::Vector2d p = scene.rx_pos;
    constexpr double eps = 1e-12;

    const int rows = 5 * static_cast<int>(paths.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(rows, eta_prime_dimension(paths));

    int col = 3;
    for (std::size_t k = 0; k < paths.size(); ++k) {
        const int r = 5 * static_cast<int>(k);
        if (paths[k].scatterer_index < 0) {
            const Eigen::Vector2d u = p - q;
            const double r0 = u.norm();
            if (r0 < eps)
                throw std::invalid_argument("jacobian_T: singular geometry (zero-length LOS segment)");
            T.block<1, 2>(r + 0, 0) = u.transpose() / (speed_of_light * r0);
            T.block<1, 2>(r + 1, 0) = bearing_grad(u);
            // bearing(q - p) has the same gradient in p as bearing(p - q)
            T.block<1, 2>(r + 2, 0) = bearing_grad(u);
            T(r + 2, 2) = -1.0;
            T(r + 3, col) = 1.0;
            T(r + 4, col + 1) = 1.0;
            col += 2;
        } else {
            const Eigen::Vector2d s = scene.scatterers.at(static_cast<std::size_t>(paths[k].scatterer_index));
            const Eigen::Vector2d w = s - q;
            const Eigen::Vector2d z = p - s;
            const double r1 = w.norm();
            const double r2 = z.norm();
            if (r1 < eps || r2 < eps)
                throw std::invalid_argument("jacobian_T: singular geometry (zero-length path segment)");
            T.block<1, 2>(r + 0, 0) = z.transpose() / (speed_of_light * r2);
            T.block<1, 2>(r + 0, col) = (w.transpose() / r1 - z.transpose() / r2) / speed_of_light;
            T.block<1, 2>(r + 1, col) = bearing_grad(w);
            T.block<1, 2>(r + 2, 0) = bearing_grad(z);
            T.block<1, 2>(r + 2, col) = -bearing_grad(z);
            T(r + 2, 2) = -1.0;
            T(r + 3, col + 2) = 1.0;
            T(r + 4, col + 3) = 1.0;
            col += 4;
        }
    }
    return T;
}

void location_from_los(const PathParams& los, const Scenario& scene,
                       Eigen::Vector2d& rx_pos, double& rx_orientation) {
    const double r0 = speed_of_light * los.delay;
    rx_pos = scene.tx_pos + r0 * Eigen::Vector2d(std::cos(los.aod), std::sin(los.aod));
    rx_orientation = wrap_angle_2pi(pi + los.aod - los.aoa);
}

} // namespace beamsim
