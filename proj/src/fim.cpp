// SPDX-License-Identifier: Apache-2.0
//
// beamsim: mm-wave MIMO beam selection with in-band positioning

#include "beamsim/fim.hpp"

#include <cmath>
#include <stdexcept>

namespace beamsim {

namespace {

// Every eta-parameter derivative of the noise-free signal has the shape
//   d m / d x = sqrt(Nt Nr) * coeff * v_rx * w(t - tau_i)
// with v_rx either a_rx or its angle derivative, and w either the pulse or
// its time derivative. The entry Phi(x1, x2) then reduces to
//   (1/sigma^2) Re{ conj(c1) c2 (v1^H v2) A_w(delta) }.
struct Descriptor {
    std::complex<double> coeff;
    bool rx_deriv;
    bool time_deriv;
};

} // namespace

FisherMatrix fim_beam(const Beamformer& f, const std::vector<PathParams>& paths,
                      const Scenario& scene, const WaveformConfig& wf) {
    const int K = static_cast<int>(paths.size());
    if (K == 0)
        throw std::invalid_argument("fim_beam: empty path list");

    const double d = scene.spacing();
    const double lambda = scene.wavelength();
    const double inv_sigma2 =
        2.0 * wf.n_symbols * wf.symbol_energy * scene.n_rx * scene.n_tx / scene.noise_psd;

    std::vector<std::complex<double>> g(K), gd(K);
    std::vector<Eigen::VectorXcd> arx(K), darx(K);
    for (int k = 0; k < K; ++k) {
        const auto& p = paths[static_cast<std::size_t>(k)];
        g[k] = steering_vector(p.aod, scene.n_tx, d, lambda).dot(f.weights);
        gd[k] = steering_vector_deriv(p.aod, scene.n_tx, d, lambda).dot(f.weights);
        arx[k] = steering_vector(p.aoa, scene.n_rx, d, lambda);
        darx[k] = steering_vector_deriv(p.aoa, scene.n_rx, d, lambda);
    }

    // rx inner products for all path pairs and derivative orders
    Eigen::MatrixXcd beta(K, K), beta_d(K, K), beta_dd(K, K);
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) {
            beta(i, j) = arx[i].dot(arx[j]);
            beta_d(i, j) = arx[i].dot(darx[j]);
            beta_dd(i, j) = darx[i].dot(darx[j]);
        }

    auto descriptor = [&](int path, int par) -> Descriptor {
        const std::complex<double> h = paths[static_cast<std::size_t>(path)].gain;
        switch (par) {
        case 0: return {-h * g[path], false, true};                       // tau
        case 1: return {h * gd[path], false, false};                      // aod
        case 2: return {h * g[path], true, false};                        // aoa
        case 3: return {g[path], false, false};                           // hR
        default: return {std::complex<double>(0.0, 1.0) * g[path], false, false}; // hI
        }
    };

    FisherMatrix J;
    J.param = Parameterization::eta;
    J.path_count = K;
    J.entries.resize(5 * K, 5 * K);

    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j) {
            const double delta = paths[static_cast<std::size_t>(i)].delay -
                                 paths[static_cast<std::size_t>(j)].delay;
            const double a0 = pulse_corr(0, delta, wf.bandwidth);
            const double a1_ij = pulse_corr(1, delta, wf.bandwidth);
            const double a1_ji = pulse_corr(1, -delta, wf.bandwidth);
            const double a2 = pulse_corr(2, delta, wf.bandwidth);
            for (int pi_ = 0; pi_ < 5; ++pi_)
                for (int pj = 0; pj < 5; ++pj) {
                    const Descriptor d1 = descriptor(i, pi_);
                    const Descriptor d2 = descriptor(j, pj);
                    std::complex<double> rx_ip;
                    if (!d1.rx_deriv && !d2.rx_deriv)
                        rx_ip = beta(i, j);
                    else if (!d1.rx_deriv && d2.rx_deriv)
                        rx_ip = beta_d(i, j);
                    else if (d1.rx_deriv && !d2.rx_deriv)
                        rx_ip = std::conj(beta_d(j, i));
                    else
                        rx_ip = beta_dd(i, j);
                    double w;
                    if (d1.time_deriv && d2.time_deriv)
                        w = a2;
                    else if (d1.time_deriv)
                        w = a1_ij;
                    else if (d2.time_deriv)
                        w = a1_ji;
                    else
                        w = a0;
                    J.entries(5 * i + pi_, 5 * j + pj) =
                        inv_sigma2 * (std::conj(d1.coeff) * d2.coeff * rx_ip * w).real();
                }
        }
    return J;
}

FisherMatrix accumulate(const std::vector<FisherMatrix>& fims) {
    if (fims.empty())
        throw std::invalid_argument("accumulate: empty list");
    FisherMatrix total = fims.front();
    for (std::size_t i = 1; i < fims.size(); ++i) {
        const auto& J = fims[i];
        if (J.param != total.param || J.entries.rows() != total.entries.rows() ||
            J.entries.cols() != total.entries.cols())
            throw std::invalid_argument("accumulate: parameterization or dimension mismatch");
        total.entries += J.entries;
    }
    return total;
}

FisherMatrix to_eta_prime(const FisherMatrix& J, const Eigen::MatrixXd& T) {
    if (J.param != Parameterization::eta)
        throw std::invalid_argument("to_eta_prime: input must be in eta parameterization");
    if (T.rows() != J.entries.rows())
        throw std::invalid_argument("to_eta_prime: Jacobian dimension mismatch");
    FisherMatrix out;
    out.param = Parameterization::eta_prime;
    out.path_count = J.path_count;
    out.entries = T.transpose() * J.entries * T;
    // symmetrize away the last-bit asymmetry of the triple product
    out.entries = 0.5 * (out.entries + out.entries.transpose()).eval();
    return out;
}

std::optional<Eigen::MatrixXd> invert_information(const Eigen::MatrixXd& J, double cond_cap) {
    const Eigen::Index n = J.rows();
    Eigen::VectorXd scale(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(J(i, i) > 0.0))
            return std::nullopt;
        scale(i) = 1.0 / std::sqrt(J(i, i));
    }
    // Jacobi equilibration makes the condition test unit-free.
    const Eigen::MatrixXd Jn = scale.asDiagonal() * J * scale.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Jn);
    if (es.info() != Eigen::Success)
        return std::nullopt;
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    if (lmin <= 0.0 || lmax / lmin > cond_cap)
        return std::nullopt;
    const Eigen::MatrixXd inv_n =
        es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    return scale.asDiagonal() * inv_n * scale.asDiagonal();
}

std::optional<double> peb(const FisherMatrix& J_prime, double cond_cap) {
    if (J_prime.param != Parameterization::eta_prime)
        throw std::invalid_argument("peb: expected eta_prime parameterization");
    const auto inv = invert_information(J_prime.entries, cond_cap);
    if (!inv)
        return std::nullopt;
    return std::sqrt(inv->topLeftCorner<2, 2>().trace());
}

std::optional<double> reb(const FisherMatrix& J_prime, double cond_cap) {
    if (J_prime.param != Parameterization::eta_prime)
        throw std::invalid_argument("reb: expected eta_prime parameterization");
    const auto inv = invert_information(J_prime.entries, cond_cap);
    if (!inv)
        return std::nullopt;
    return std::sqrt((*inv)(2, 2));
}

} // namespace beamsim
