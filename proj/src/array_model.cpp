// SPDX-License-Identifier: Apache-2.0
//
// beamsim: mm-wave MIMO beam selection with in-band positioning

#include "beamsim/array_model.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace beamsim {

Eigen::VectorXcd steering_vector(double theta, int n, double d, double lambda) {
    if (n < 1)
        throw std::invalid_argument("steering_vector: n must be >= 1");
    Eigen::VectorXcd a(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const double phase_step = 2.0 * pi * d / lambda * std::sin(theta);
    for (int l = 0; l < n; ++l)
        a(l) = std::polar(scale, phase_step * l);
    return a;
}

Eigen::VectorXcd steering_vector_deriv(double theta, int n, double d, double lambda) {
    Eigen::VectorXcd a = steering_vector(theta, n, d, lambda);
    const double factor = 2.0 * pi * d / lambda * std::cos(theta);
    for (int l = 0; l < n; ++l)
        a(l) *= std::complex<double>(0.0, factor * l);
    return a;
}

Beamformer make_beam(double theta_m, int n_active, const Scenario& scene, CodebookKind kind) {
    const int n_tx = scene.n_tx;
    if (n_active < 1 || n_active > n_tx)
        throw std::invalid_argument("make_beam: n_active out of range");
    if ((n_tx - n_active) % 2 != 0)
        throw std::invalid_argument("make_beam: zero padding cannot be centered");

    Beamformer f;
    f.weights = Eigen::VectorXcd::Zero(n_tx);
    f.active_count = n_active;
    f.pointing = theta_m;
    f.kind = kind;

    const int offset = (n_tx - n_active) / 2;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_active));
    const double phase_step = 2.0 * pi * scene.spacing() / scene.wavelength() * std::sin(theta_m);
    for (int i = 0; i < n_active; ++i) {
        double phase = phase_step * i;
        if (kind == CodebookKind::discrete4phase)
            phase = std::round(phase / (pi / 2.0)) * (pi / 2.0);
        f.weights(offset + i) = std::polar(scale, phase);
    }
    return f;
}

double beam_gain(const Beamformer& f, double theta, const Scenario& scene) {
    const Eigen::VectorXcd a = steering_vector(theta, scene.n_tx, scene.spacing(), scene.wavelength());
    return std::abs(a.dot(f.weights));
}

std::vector<double> codebook_directions(int m_beams) {
    if (m_beams < 1)
        throw std::invalid_argument("codebook_directions: m_beams must be >= 1");
    std::vector<double> dirs(static_cast<std::size_t>(m_beams));
    for (int m = 0; m < m_beams; ++m)
        dirs[static_cast<std::size_t>(m)] = std::asin(-1.0 + (2.0 * m + 1.0) / m_beams);
    return dirs;
}

namespace {

struct HpbwCache {
    std::mutex mutex;
    std::map<std::tuple<int, double, int>, double> values;
};

HpbwCache& hpbw_cache() {
    static HpbwCache cache;
    return cache;
}

} // namespace

double hpbw(int n_active, double theta_max, const Scenario& scene, CodebookKind kind) {
    if (n_active < 2)
        throw std::invalid_argument("hpbw: n_active must be >= 2");

    const auto key = std::make_tuple(n_active, theta_max, static_cast<int>(kind));
    {
        std::lock_guard<std::mutex> lock(hpbw_cache().mutex);
        auto it = hpbw_cache().values.find(key);
        if (it != hpbw_cache().values.end())
            return it->second;
    }

    const Beamformer f = make_beam(theta_max, n_active, scene, kind);
    auto power = [&](double theta) {
        const double g = beam_gain(f, theta, scene);
        return g * g;
    };

    // Local peak around theta_max by golden-section (the discrete codebook can
    // shift the true maximum slightly off the pointing direction).
    const double width_est = 0.886 * scene.wavelength() / (n_active * scene.spacing()) /
                             std::max(std::abs(std::cos(theta_max)), 0.05);
    double lo = std::max(theta_max - width_est, -pi / 2.0);
    double hi = std::min(theta_max + width_est, pi / 2.0);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = power(x1), f2 = power(x2);
    while (hi - lo > 1e-8) {
        if (f1 < f2) {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + gr * (hi - lo); f2 = power(x2);
        } else {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - gr * (hi - lo); f1 = power(x1);
        }
    }
    const double peak_theta = 0.5 * (lo + hi);
    const double half_power = 0.5 * std::max(power(peak_theta), power(theta_max));

    // March outward to bracket the -3 dB points, then bisect.
    auto crossing = [&](int dir) -> std::optional<double> {
        const double step = std::max(width_est / 20.0, 1e-5);
        double prev = peak_theta;
        for (double th = peak_theta + dir * step;; th += dir * step) {
            if (th > pi / 2.0 || th < -pi / 2.0) {
                if (power(dir > 0 ? pi / 2.0 : -pi / 2.0) >= half_power)
                    return std::nullopt;
                th = dir > 0 ? pi / 2.0 : -pi / 2.0;
            }
            if (power(th) < half_power) {
                double a = prev, b = th;
                while (std::abs(b - a) > 1e-6) {
                    const double mid = 0.5 * (a + b);
                    (power(mid) >= half_power ? a : b) = mid;
                }
                return 0.5 * (a + b);
            }
            if (th >= pi / 2.0 || th <= -pi / 2.0)
                return std::nullopt;
            prev = th;
        }
    };

    const auto upper = crossing(+1);
    const auto lower = crossing(-1);
    const double result = (upper && lower) ? (*upper - *lower) : pi;

    std::lock_guard<std::mutex> lock(hpbw_cache().mutex);
    if (hpbw_cache().values.size() < (1u << 20))
        hpbw_cache().values.emplace(key, result);
    return result;
}

} // namespace beamsim
