// SPDX-License-Identifier: Apache-2.0
//
// beamsim: mm-wave MIMO beam selection with in-band positioning

#include "beamsim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

namespace beamsim {

namespace {

double clamp_visible(double theta) {
    return std::clamp(theta, -pi / 2.0, pi / 2.0);
}

// Half-width (in standard deviations) of the AOD region the protocol reasons
// about: the planning quadrature spans theta_hat +/- this many sigma, and the
// terminal beam set must be able to tile the slightly wider terminal span
// (the last iteration has no later chance to recover).
constexpr double aod_span_sigmas = 1.5;
constexpr double terminal_span_sigmas = 1.8;

// Codebook directions ordered by sin-space distance to 'center' (the
// codebook tiles sin uniformly); ties break toward the smaller angle.
std::vector<double> nearest_directions(double center, int m_codebook, int count) {
    std::vector<double> dirs = codebook_directions(m_codebook);
    const double sc = std::sin(clamp_visible(center));
    std::sort(dirs.begin(), dirs.end(), [&](double a, double b) {
        const double da = std::abs(std::sin(a) - sc);
        const double db = std::abs(std::sin(b) - sc);
        if (da != db)
            return da < db;
        return a < b;
    });
    dirs.resize(static_cast<std::size_t>(std::min<int>(count, static_cast<int>(dirs.size()))));
    return dirs;
}

// The 'count' codebook directions nearest to 'center', ordered ascending.
std::vector<double> child_directions(double center, int m_codebook, int count) {
    std::vector<double> dirs = nearest_directions(center, m_codebook, count);
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

// Hierarchical child directions hedged between the power-validated winner
// and the AOD estimate: when the two disagree, probing both regions keeps a
// mis-steered descent recoverable. With agreement this reduces to the plain
// nearest-children rule.
std::vector<double> hedged_children(double winner, std::optional<double> theta_hat,
                                    int m_codebook) {
    if (!theta_hat)
        return child_directions(winner, m_codebook, 3);
    const auto from_winner = nearest_directions(winner, m_codebook, 3);
    const auto from_est = nearest_directions(*theta_hat, m_codebook, 2);
    std::vector<double> dirs;
    auto push_unique = [&](double d) {
        if (dirs.size() < 3 && std::find(dirs.begin(), dirs.end(), d) == dirs.end())
            dirs.push_back(d);
    };
    push_unique(from_winner[0]);
    push_unique(from_est[0]);
    if (from_winner.size() > 1)
        push_unique(from_winner[1]);
    if (from_est.size() > 1)
        push_unique(from_est[1]);
    if (from_winner.size() > 2)
        push_unique(from_winner[2]);
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

double measure_rsps(const Beamformer& f, const std::vector<PathParams>& paths,
                    const Scenario& scene, const WaveformConfig& wf, const ProtocolConfig& cfg,
                    Rng& rng) {
    double p = rsps(f, paths, scene, wf);
    if (cfg.rsps_noise)
        p += std::sqrt(scene.noise_psd * scene.bandwidth) * rng.gaussian();
    return p;
}

int argmax_power(const Eigen::VectorXd& powers) {
    int best = 0;
    for (int i = 1; i < powers.size(); ++i)
        if (powers(i) > powers(best))
            best = i;
    return best;
}

// Bearing spread of the position posterior through the exact (nonlinear)
// bearing map, from unscented sigma points of the 2x2 position block. Matches
// the linearized sigma for small spreads and stays honest when the position
// uncertainty is comparable to the range, where the linearization collapses.
double robust_aod_sigma(const LocationState& state, const Scenario& scene, double theta_hat) {
    const Eigen::Matrix2d cov = state.covariance.topLeftCorner<2, 2>();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    double var = 0.0;
    for (int i = 0; i < 2; ++i) {
        const Eigen::Vector2d step =
            std::sqrt(std::max(2.0 * es.eigenvalues()(i), 0.0)) * es.eigenvectors().col(i);
        for (double sign : {-1.0, 1.0}) {
            const Eigen::Vector2d p = state.position + sign * step - scene.tx_pos;
            double delta = pi / 2.0; // sigma point collapsed onto the transmitter
            if (p.norm() > 1e-9)
                delta = wrap_angle(std::atan2(p.y(), p.x()) - theta_hat);
            var += 0.25 * delta * delta;
        }
    }
    return std::sqrt(var);
}

// HPBW of the beam the protocol would actually transmit toward theta: with a
// discrete codebook the beam points at the nearest codebook direction. The
// continuous pointing is clamped to the steepest usable direction (the
// extreme codebook cell), where both half-power crossings still exist.
double protocol_hpbw(int n_active, double theta, const Scenario& scene, CodebookKind kind) {
    double point = clamp_visible(theta);
    if (kind == CodebookKind::discrete4phase) {
        point = nearest_directions(point, n_active, 1).front();
    } else {
        const double sin_max = 1.0 - 1.0 / n_active;
        point = std::clamp(point, -std::asin(sin_max), std::asin(sin_max));
    }
    return hpbw(n_active, point, scene, kind);
}

// The planning objective is the expected future position uncertainty: the
// candidate-beam FIMs are evaluated at the estimated channel parameters and
// averaged over the AOD posterior (Gauss-Hermite points of the bearing
// error), so triplets that fail to cover the plausible AOD range get
// penalized. One world per quadrature node, each with its own estimated
// path geometry.
struct PlanningWorld {
    double weight = 0.0;
    Scenario scene;
    std::vector<PathParams> paths;
    Eigen::MatrixXd T;
    bool prev_compatible = false;
    std::map<long long, Eigen::MatrixXd> beam_info; // direction key -> eta' contribution
};

constexpr double planning_bad_objective = 1e9;

struct PlanningContext {
    std::vector<PlanningWorld> worlds;
    const WaveformConfig& wf;
    const ProtocolConfig& cfg;
    int n_active;
    CodebookKind kind;
    const FisherMatrix& J_prev;
};

PlanningContext make_planning_context(double sigma, const FisherMatrix& J_prev,
                                      const std::vector<PathParams>& est_paths,
                                      const Scenario& est_scene, int n_active, CodebookKind kind,
                                      const ProtocolConfig& cfg, const WaveformConfig& wf) {
    // Quadrature nodes of the bearing posterior with deliberately heavy
    // tails: a triplet that leaves the posterior flanks uncovered pays for
    // it, which keeps the selected beams spread over the plausible AOD region.
    static constexpr double nodes[3] = {-aod_span_sigmas, 0.0, aod_span_sigmas};
    static constexpr double weights[3] = {0.30, 0.40, 0.30};
    PlanningContext ctx{{}, wf, cfg, n_active, kind, J_prev};
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double delta = std::clamp(nodes[i] * sigma, -1.2, 1.2);
        PlanningWorld world;
        world.weight = weights[i];
        world.scene = est_scene;
        const Eigen::Vector2d rel = est_scene.rx_pos - est_scene.tx_pos;
        world.scene.rx_pos =
            est_scene.tx_pos + Eigen::Rotation2Dd(delta).toRotationMatrix() * rel;
        try {
            world.paths = delta == 0.0 ? est_paths
                                       : merge_unresolvable(path_params_from_scene(world.scene),
                                                            world.scene, cfg.angle_rule);
            world.T = jacobian_T(world.paths, world.scene);
        } catch (const std::invalid_argument&) {
            continue;
        }
        world.prev_compatible =
            J_prev.entries.rows() == eta_prime_dimension(world.paths);
        total += world.weight;
        ctx.worlds.push_back(std::move(world));
    }
    for (auto& w : ctx.worlds)
        w.weight /= total;
    return ctx;
}

const Eigen::MatrixXd& world_beam_info(PlanningContext& ctx, PlanningWorld& world, double theta) {
    const long long key = std::llround(theta * 1e12);
    auto it = world.beam_info.find(key);
    if (it != world.beam_info.end())
        return it->second;
    const Beamformer f = make_beam(theta, ctx.n_active, world.scene, ctx.kind);
    const Eigen::MatrixXd J_eta = fim_beam(f, world.paths, world.scene, ctx.wf).entries;
    Eigen::MatrixXd J_p = world.T.transpose() * J_eta * world.T;
    J_p = 0.5 * (J_p + J_p.transpose()).eval();
    return world.beam_info.emplace(key, std::move(J_p)).first->second;
}

double planning_objective(PlanningContext& ctx, const std::array<double, 3>& dirs) {
    double total = 0.0;
    for (auto& world : ctx.worlds) {
        Eigen::MatrixXd J = world_beam_info(ctx, world, dirs[0]);
        J += world_beam_info(ctx, world, dirs[1]);
        J += world_beam_info(ctx, world, dirs[2]);
        if (world.prev_compatible)
            J += ctx.J_prev.entries;
        const auto inv = invert_information(J, ctx.cfg.cond_cap);
        total += world.weight *
                 (inv ? inv->topLeftCorner<2, 2>().trace() : planning_bad_objective);
    }
    return ctx.worlds.empty() ? planning_bad_objective : total;
}

} // namespace

const char* protocol_name(ProtocolKind kind) {
    switch (kind) {
    case ProtocolKind::CBS: return "cbs";
    case ProtocolKind::D_JPBS: return "djpbs";
    default: return "cjpbs";
    }
}

std::vector<double> ProtocolConfig::default_epsilon_grid() {
    return {0.0,  0.0025, 0.005, 0.01, 0.015, 0.02, 0.03, 0.045,
            0.065, 0.09,  0.12,  0.17, 0.24,  0.34, 0.48};
}

void ProtocolConfig::validate(const Scenario& scene) const {
    if (initial_active < 2)
        throw std::invalid_argument("protocol config: initial_active must be >= 2");
    int n = initial_active;
    while (n < scene.n_tx)
        n *= 2;
    if (n != scene.n_tx)
        throw std::invalid_argument("protocol config: initial_active must reach n_tx by doubling");
    if (initial_beams < 1)
        throw std::invalid_argument("protocol config: initial_beams must be >= 1");
    if (hpbw_multiplier <= 0.0)
        throw std::invalid_argument("protocol config: hpbw_multiplier must be positive");
}

ProtocolTrace run_cbs(const Scenario& scene, const ProtocolConfig& cfg, const WaveformConfig& wf) {
    cfg.validate(scene);
    const auto paths = merge_unresolvable(path_params_from_scene(scene), scene, cfg.angle_rule);
    Rng rng(cfg.rng_seed);

    ProtocolTrace trace;
    trace.kind = ProtocolKind::CBS;

    int n_active = cfg.initial_active;
    std::vector<double> dirs = codebook_directions(cfg.initial_beams);
    while (true) {
        IterationRecord rec;
        rec.n_active = n_active;
        rec.beams.iteration = static_cast<int>(trace.iterations.size()) + 1;
        rec.powers.resize(static_cast<Eigen::Index>(dirs.size()));
        for (std::size_t m = 0; m < dirs.size(); ++m) {
            rec.beams.beams.push_back(make_beam(dirs[m], n_active, scene, CodebookKind::discrete4phase));
            rec.powers(static_cast<Eigen::Index>(m)) =
                measure_rsps(rec.beams.beams.back(), paths, scene, wf, cfg, rng);
        }
        const int winner = argmax_power(rec.powers);
        const double winner_dir = *rec.beams.beams[static_cast<std::size_t>(winner)].pointing;
        trace.transactions_approx += static_cast<int>(dirs.size());
        trace.transactions_exact += static_cast<int>(dirs.size()) + 2;
        trace.iterations.push_back(std::move(rec));

        if (n_active == scene.n_tx) {
            trace.selected_beam = trace.iterations.back().beams.beams[static_cast<std::size_t>(winner)];
            break;
        }
        n_active *= 2;
        dirs = child_directions(winner_dir, n_active, 3);
    }
    trace.transactions_exact += 1;
    trace.final_snr_db = snr_db(trace.selected_beam, paths, scene, wf, cfg.snr_gain_exponent);
    return trace;
}

std::optional<LocationState> estimator_surrogate(const FisherMatrix& J_prime,
                                                 const Eigen::Vector2d& true_pos,
                                                 double true_orientation, Rng& rng,
                                                 double cond_cap) {
    const Eigen::Vector3d z(rng.gaussian(), rng.gaussian(), rng.gaussian());
    return estimator_surrogate(J_prime, true_pos, true_orientation, z, cond_cap);
}

std::optional<LocationState> estimator_surrogate(const FisherMatrix& J_prime,
                                                 const Eigen::Vector2d& true_pos,
                                                 double true_orientation, const Eigen::Vector3d& z,
                                                 double cond_cap) {
    if (J_prime.param != Parameterization::eta_prime)
        throw std::invalid_argument("estimator_surrogate: expected eta_prime FIM");
    const auto inv = invert_information(J_prime.entries, cond_cap);
    if (!inv)
        return std::nullopt;

    Eigen::Matrix3d sigma = inv->topLeftCorner<3, 3>();
    sigma = 0.5 * (sigma + sigma.transpose()).eval();

    // Cholesky keeps the factor a continuous function of sigma, so a fixed z
    // maps to an estimate path that tightens smoothly as information grows.
    Eigen::Vector3d draw;
    Eigen::LLT<Eigen::Matrix3d> llt(sigma);
    if (llt.info() == Eigen::Success) {
        draw = llt.matrixL() * z;
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(sigma);
        const Eigen::Vector3d lam = es.eigenvalues().cwiseMax(0.0);
        draw = es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * z;
    }

    LocationState state;
    state.position = true_pos + draw.head<2>();
    state.orientation = wrap_angle_2pi(true_orientation + draw(2));
    state.covariance = sigma;
    return state;
}

AodStats aod_stats(const LocationState& state, const Scenario& scene) {
    const Eigen::Vector2d u = state.position - scene.tx_pos;
    const double r2 = u.squaredNorm();
    if (r2 < 1e-18)
        throw std::invalid_argument("aod_stats: estimate coincides with the transmitter");
    AodStats out;
    out.theta_hat = std::atan2(u.y(), u.x());
    const Eigen::Vector2d g(-u.y() / r2, u.x() / r2);
    const double var = g.dot(state.covariance.topLeftCorner<2, 2>() * g);
    out.sigma = std::sqrt(std::max(var, 0.0));
    return out;
}

AntennaSelection select_active_antennas(double theta_hat, double sigma, int n_prev,
                                        const Scenario& scene, CodebookKind kind,
                                        double multiplier) {
    const int doubled = std::min(2 * n_prev, scene.n_tx);
    if (sigma >= multiplier * protocol_hpbw(doubled, theta_hat, scene, kind))
        return {doubled, true};

    int best = doubled;
    for (int n = doubled; n <= scene.n_tx; n *= 2) {
        if (multiplier * protocol_hpbw(n, theta_hat, scene, kind) >= sigma)
            best = n;
    }
    // The run ends at the full aperture, so the terminal beam set gets no
    // power-guided recovery: allow it only when the three beams can tile the
    // whole plausible AOD span contiguously. Otherwise hold the aperture at
    // N_t/2 and keep integrating; intermediate misses self-correct on later
    // iterations.
    if (best == scene.n_tx &&
        multiplier * protocol_hpbw(scene.n_tx, theta_hat, scene, kind) <
            2.0 * terminal_span_sigmas * sigma) {
        best = scene.n_tx / 2;
        return {std::max(best, n_prev), false};
    }
    return {std::max(best, doubled), false};
}

std::array<double, 3> optimize_beam_directions(double theta_hat, double sigma,
                                               const FisherMatrix& J_prev_eta_prime,
                                               const std::vector<PathParams>& est_paths,
                                               const Scenario& est_scene, int n_active,
                                               const ProtocolConfig& cfg,
                                               const WaveformConfig& wf) {
    const CodebookKind kind =
        cfg.kind == ProtocolKind::C_JPBS ? CodebookKind::continuous : CodebookKind::discrete4phase;
    const double th = clamp_visible(theta_hat);
    PlanningContext ctx =
        make_planning_context(sigma, J_prev_eta_prime, est_paths, est_scene, n_active, kind, cfg,
                              wf);

    if (kind == CodebookKind::continuous) {
        const std::vector<double>& grid =
            cfg.epsilon_grid.empty() ? ProtocolConfig::default_epsilon_grid() : cfg.epsilon_grid;
        std::array<double, 3> best{th, th, th};
        double best_obj = std::numeric_limits<double>::infinity();
        for (double eps : grid) {
            const std::array<double, 3> cand{th, clamp_visible(th + eps), clamp_visible(th - eps)};
            const double obj = planning_objective(ctx, cand);
            if (obj < best_obj) {
                best_obj = obj;
                best = cand;
            }
        }
        return best;
    }

    // Discrete codebook: the center beam sits on the codebook direction
    // nearest theta_hat and the flankers straddle it, reaching out far enough
    // in cells to make the quadrature span coverable. Straddling keeps both
    // sides of the AOD region represented; the objective ranks the reaches.
    const std::vector<double> cb = codebook_directions(n_active);
    std::size_t i0 = 0;
    const double s0 = std::sin(th);
    for (std::size_t i = 1; i < cb.size(); ++i)
        if (std::abs(std::sin(cb[i]) - s0) < std::abs(std::sin(cb[i0]) - s0))
            i0 = i;
    const double th0 = cb[i0];

    const double cell = 2.0 / n_active;
    const int reach = std::clamp(
        static_cast<int>(std::ceil(aod_span_sigmas * sigma * std::cos(th) / cell)), 1, 6);
    std::array<double, 3> best{th0, th0, th0};
    double best_obj = std::numeric_limits<double>::infinity();
    auto consider = [&](std::size_t lo, std::size_t hi) {
        const std::array<double, 3> cand{th0, cb[lo], cb[hi]};
        const double obj = planning_objective(ctx, cand);
        if (obj < best_obj) {
            best_obj = obj;
            best = cand;
        }
    };
    for (int k = 1; k <= reach; ++k)
        for (int m = 1; m <= reach; ++m) {
            const std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(i0) - k;
            const std::size_t hi = i0 + static_cast<std::size_t>(m);
            if (lo >= 0 && hi < cb.size())
                consider(static_cast<std::size_t>(lo), hi);
        }
    // codebook edge: straddling may be impossible, fan out on the open side
    if (!std::isfinite(best_obj)) {
        for (int k = 1; k <= reach; ++k)
            for (int m = k + 1; m <= reach + 1; ++m) {
                const std::ptrdiff_t a = static_cast<std::ptrdiff_t>(i0) + (i0 == 0 ? k : -k);
                const std::ptrdiff_t b = static_cast<std::ptrdiff_t>(i0) + (i0 == 0 ? m : -m);
                if (a >= 0 && b >= 0 && a < static_cast<std::ptrdiff_t>(cb.size()) &&
                    b < static_cast<std::ptrdiff_t>(cb.size()))
                    consider(static_cast<std::size_t>(std::min(a, b)),
                             static_cast<std::size_t>(std::max(a, b)));
            }
    }
    return best;
}

ProtocolTrace run_jpbs(const Scenario& scene, const ProtocolConfig& cfg, const WaveformConfig& wf) {
    cfg.validate(scene);
    if (cfg.kind == ProtocolKind::CBS)
        throw std::invalid_argument("run_jpbs: config kind must be D_JPBS or C_JPBS");

    const CodebookKind kind =
        cfg.kind == ProtocolKind::C_JPBS ? CodebookKind::continuous : CodebookKind::discrete4phase;
    const auto paths = merge_unresolvable(path_params_from_scene(scene), scene, cfg.angle_rule);
    Rng rng(cfg.rng_seed);
    // one estimator error vector per run; see estimator_surrogate
    const Eigen::Vector3d est_noise(rng.gaussian(), rng.gaussian(), rng.gaussian());

    ProtocolTrace trace;
    trace.kind = cfg.kind;

    FisherMatrix J_acc;
    J_acc.param = Parameterization::eta;
    J_acc.path_count = static_cast<int>(paths.size());
    J_acc.entries = Eigen::MatrixXd::Zero(5 * static_cast<Eigen::Index>(paths.size()),
                                          5 * static_cast<Eigen::Index>(paths.size()));
    const Eigen::MatrixXd T = jacobian_T(paths, scene);

    int n_active = cfg.initial_active;
    bool hierarchical = true;
    int dwell = 0; // consecutive iterations at the same aperture
    std::vector<double> dirs = codebook_directions(cfg.initial_beams);

    while (true) {
        IterationRecord rec;
        rec.n_active = n_active;
        rec.hierarchical = hierarchical;
        rec.beams.iteration = static_cast<int>(trace.iterations.size()) + 1;
        rec.powers.resize(static_cast<Eigen::Index>(dirs.size()));
        for (std::size_t m = 0; m < dirs.size(); ++m) {
            rec.beams.beams.push_back(make_beam(dirs[m], n_active, scene, kind));
            rec.powers(static_cast<Eigen::Index>(m)) =
                measure_rsps(rec.beams.beams.back(), paths, scene, wf, cfg, rng);
            J_acc.entries += fim_beam(rec.beams.beams.back(), paths, scene, wf).entries;
        }
        const FisherMatrix J_prime = to_eta_prime(J_acc, T);
        rec.estimate = estimator_surrogate(J_prime, scene.rx_pos, scene.rx_orientation, est_noise,
                                           cfg.cond_cap);
        rec.fim_snapshot = J_acc;
        rec.peb_m = peb(J_prime, cfg.cond_cap);
        rec.reb_rad = reb(J_prime, cfg.cond_cap);

        const int winner = argmax_power(rec.powers);
        const double winner_dir = *rec.beams.beams[static_cast<std::size_t>(winner)].pointing;
        trace.transactions_approx += static_cast<int>(dirs.size());
        trace.transactions_exact += static_cast<int>(dirs.size()) + 2;
        trace.iterations.push_back(std::move(rec));

        if (n_active == scene.n_tx) {
            trace.selected_beam = trace.iterations.back().beams.beams[static_cast<std::size_t>(winner)];
            break;
        }

        const auto& est = trace.iterations.back().estimate;
        int n_next = 2 * n_active;
        hierarchical = true;
        std::optional<double> theta_for_hedge;
        if (est) {
            try {
                AodStats aod = aod_stats(*est, scene);
                aod.sigma = std::max(aod.sigma, robust_aod_sigma(*est, scene, aod.theta_hat));
                theta_for_hedge = clamp_visible(aod.theta_hat);
                const auto sel = select_active_antennas(aod.theta_hat, aod.sigma, n_active, scene,
                                                        kind, cfg.hpbw_multiplier);
                n_next = sel.n_next;
                hierarchical = sel.hierarchical;
                // Entering the full aperture ends the run, so it is gated on
                // the terminal beams being able to tile the AOD span; until
                // then the protocol dwells at the current aperture with
                // planner-chosen beams covering the posterior.
                if (n_next == scene.n_tx && n_active < scene.n_tx &&
                    cfg.hpbw_multiplier * protocol_hpbw(scene.n_tx, aod.theta_hat, scene, kind) <
                        2.0 * terminal_span_sigmas * aod.sigma) {
                    n_next = n_active;
                    hierarchical = false;
                }
                if (!hierarchical) {
                    Scenario est_scene = scene;
                    est_scene.rx_pos = est->position;
                    est_scene.rx_orientation = est->orientation;
                    const auto est_paths = merge_unresolvable(path_params_from_scene(est_scene),
                                                              est_scene, cfg.angle_rule);
                    const auto opt = optimize_beam_directions(aod.theta_hat, aod.sigma, J_prime,
                                                              est_paths, est_scene, n_next, cfg, wf);
                    dirs.assign(opt.begin(), opt.end());
                }
            } catch (const std::invalid_argument&) {
                // degenerate estimate (on top of D1 or a scatterer): fall back
                n_next = 2 * n_active;
                hierarchical = true;
            }
        }
        if (n_next == n_active) {
            if (++dwell >= 5) { // bounded dwell keeps termination unconditional
                n_next = std::min(2 * n_active, scene.n_tx);
                hierarchical = true;
                dwell = 0;
            }
        } else {
            dwell = 0;
        }
        if (hierarchical)
            dirs = hedged_children(winner_dir, theta_for_hedge, n_next);
        n_active = std::min(n_next, scene.n_tx);
    }
    trace.transactions_exact += 1;
    trace.final_snr_db = snr_db(trace.selected_beam, paths, scene, wf, cfg.snr_gain_exponent);
    return trace;
}

void write_trace(const ProtocolTrace& trace, std::ostream& os) {
    os << "iter,protocol,n_active,n_beams,hierarchical,winner_idx,winner_dir_rad,best_power,"
          "has_estimate,est_x_m,est_y_m,est_alpha_rad,peb_m,reb_rad,cum_trans_approx,"
          "cum_trans_exact\n";
    int cum_approx = 0;
    int cum_exact = 0;
    char buf[512];
    for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
        const auto& rec = trace.iterations[i];
        const int m = static_cast<int>(rec.beams.beams.size());
        cum_approx += m;
        cum_exact += m + 2;
        int exact = cum_exact + (i + 1 == trace.iterations.size() ? 1 : 0);
        const int winner = argmax_power(rec.powers);
        std::snprintf(buf, sizeof(buf), "%zu,%s,%d,%d,%d,%d,%.9g,%.9g,", i + 1,
                      protocol_name(trace.kind), rec.n_active, m, rec.hierarchical ? 1 : 0, winner,
                      *rec.beams.beams[static_cast<std::size_t>(winner)].pointing,
                      rec.powers(winner));
        os << buf;
        if (rec.estimate) {
            std::snprintf(buf, sizeof(buf), "1,%.9g,%.9g,%.9g,", rec.estimate->position.x(),
                          rec.estimate->position.y(), rec.estimate->orientation);
        } else {
            std::snprintf(buf, sizeof(buf), "0,,,,");
        }
        os << buf;
        if (rec.peb_m)
            os << *rec.peb_m;
        os << ',';
        if (rec.reb_rad)
            os << *rec.reb_rad;
        os << ',' << cum_approx << ',' << exact << '\n';
    }
}

} // namespace beamsim
