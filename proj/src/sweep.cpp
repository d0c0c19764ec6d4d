// SPDX-License-Identifier: Apache-2.0
//
// beamsim: mm-wave MIMO beam selection with in-band positioning

#include "beamsim/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace beamsim {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos)
        return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

[[noreturn]] void parse_fail(const std::string& name, int line, const std::string& what) {
    throw std::invalid_argument(name + ":" + std::to_string(line) + ": " + what);
}

double to_double(const std::string& v, const std::string& name, int line) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (trim(v.substr(pos)) != "")
            parse_fail(name, line, "trailing characters in number '" + v + "'");
        return x;
    } catch (const std::invalid_argument&) {
        parse_fail(name, line, "expected a number, got '" + v + "'");
    } catch (const std::out_of_range&) {
        parse_fail(name, line, "number out of range: '" + v + "'");
    }
}

long long to_int(const std::string& v, const std::string& name, int line) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (trim(v.substr(pos)) != "")
            parse_fail(name, line, "trailing characters in integer '" + v + "'");
        return x;
    } catch (const std::invalid_argument&) {
        parse_fail(name, line, "expected an integer, got '" + v + "'");
    } catch (const std::out_of_range&) {
        parse_fail(name, line, "integer out of range: '" + v + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep))
        out.push_back(trim(item));
    if (!out.empty() && out.back().empty())
        out.pop_back();
    return out;
}

ProtocolKind protocol_from_name(const std::string& s, const std::string& name, int line) {
    if (s == "cbs")
        return ProtocolKind::CBS;
    if (s == "djpbs")
        return ProtocolKind::D_JPBS;
    if (s == "cjpbs")
        return ProtocolKind::C_JPBS;
    parse_fail(name, line, "unknown protocol '" + s + "' (expected cbs|djpbs|cjpbs|all)");
}

std::string fmt(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

double noise_psd_w_per_hz(double dbm_per_ghz) {
    return std::pow(10.0, dbm_per_ghz / 10.0 - 12.0);
}

struct RunAggregate {
    std::vector<double> snr_db;
    std::vector<double> n_trans;
    std::vector<std::optional<double>> peb;
    std::vector<std::optional<double>> reb;
    bool failed = false;
};

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

} // namespace

void SweepConfig::validate() const {
    if (grid_step_m <= 0.0)
        throw std::invalid_argument("config: grid_step_m must be positive");
    if (realizations < 1)
        throw std::invalid_argument("config: realizations must be >= 1");
    if (carrier_freq_hz < 1e9)
        throw std::invalid_argument("config: carrier_freq_hz below 1 GHz fails unit sanity");
    if (bandwidth_hz <= 0.0)
        throw std::invalid_argument("config: bandwidth_hz must be positive");
    if (n_tx < 2 || n_rx < 2 || n_symbols < 1)
        throw std::invalid_argument("config: array/symbol counts out of range");
    if (area_x_max < area_x_min || area_y_max < area_y_min)
        throw std::invalid_argument("config: empty sweep area");
    if (protocols.empty())
        throw std::invalid_argument("config: no protocols selected");
    if (exclusion_radius_m < 0.0)
        throw std::invalid_argument("config: exclusion_radius_m must be >= 0");
    if (snr_gain_exponent != 1 && snr_gain_exponent != 2)
        throw std::invalid_argument("config: snr_gain_exponent must be 1 or 2");
    if (cond_cap <= 1.0)
        throw std::invalid_argument("config: cond_cap must exceed 1");
}

Scenario SweepConfig::scenario_template() const {
    Scenario scene;
    scene.tx_pos = Eigen::Vector2d(tx_pos_x, tx_pos_y);
    scene.rx_orientation = rx_orientation_rad;
    scene.scatterers.clear();
    for (const auto& [sx, sy] : scatterers)
        scene.scatterers.emplace_back(sx, sy);
    scene.carrier_freq = carrier_freq_hz;
    scene.bandwidth = bandwidth_hz;
    scene.noise_psd = noise_psd_w_per_hz(noise_psd_dbm_per_ghz);
    scene.n_tx = n_tx;
    scene.n_rx = n_rx;
    scene.element_spacing = element_spacing_m;
    scene.n_symbols = n_symbols;
    scene.symbol_energy = symbol_energy_j;
    if (symbol_energy_j <= 0.0)
        scene.symbol_energy = calibrate_symbol_energy(scene, snr_gain_exponent);
    return scene;
}

ProtocolConfig SweepConfig::protocol_config(ProtocolKind kind, std::uint64_t run_seed) const {
    ProtocolConfig pc;
    pc.kind = kind;
    pc.initial_active = initial_active;
    pc.initial_beams = initial_beams;
    pc.hpbw_multiplier = hpbw_multiplier;
    pc.epsilon_grid = epsilon_grid_rad;
    pc.rng_seed = run_seed;
    pc.snr_gain_exponent = snr_gain_exponent;
    pc.cond_cap = cond_cap;
    pc.rsps_noise = rsps_noise;
    pc.angle_rule = angle_resolution_rule;
    return pc;
}

SweepConfig parse_config(std::istream& is, const std::string& name) {
    SweepConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string text = trim(line.substr(0, line.find('#')));
        if (text.empty())
            continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            parse_fail(name, lineno, "expected key = value");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty())
            parse_fail(name, lineno, "empty key");

        if (key == "tx_pos_x") cfg.tx_pos_x = to_double(value, name, lineno);
        else if (key == "tx_pos_y") cfg.tx_pos_y = to_double(value, name, lineno);
        else if (key == "rx_orientation_rad") cfg.rx_orientation_rad = to_double(value, name, lineno);
        else if (key == "scatterers") {
            cfg.scatterers.clear();
            for (const auto& pair_text : split(value, ';')) {
                if (pair_text.empty())
                    continue;
                const auto xy = split(pair_text, ',');
                if (xy.size() != 2)
                    parse_fail(name, lineno, "scatterer entry must be 'x,y'");
                cfg.scatterers.emplace_back(to_double(xy[0], name, lineno),
                                            to_double(xy[1], name, lineno));
            }
        }
        else if (key == "carrier_freq_hz") cfg.carrier_freq_hz = to_double(value, name, lineno);
        else if (key == "bandwidth_hz") cfg.bandwidth_hz = to_double(value, name, lineno);
        else if (key == "noise_psd_dbm_per_ghz") cfg.noise_psd_dbm_per_ghz = to_double(value, name, lineno);
        else if (key == "n_tx") cfg.n_tx = static_cast<int>(to_int(value, name, lineno));
        else if (key == "n_rx") cfg.n_rx = static_cast<int>(to_int(value, name, lineno));
        else if (key == "element_spacing_m") cfg.element_spacing_m = to_double(value, name, lineno);
        else if (key == "n_symbols") cfg.n_symbols = static_cast<int>(to_int(value, name, lineno));
        else if (key == "symbol_energy_j") cfg.symbol_energy_j = to_double(value, name, lineno);
        else if (key == "area_x_min") cfg.area_x_min = to_double(value, name, lineno);
        else if (key == "area_x_max") cfg.area_x_max = to_double(value, name, lineno);
        else if (key == "area_y_min") cfg.area_y_min = to_double(value, name, lineno);
        else if (key == "area_y_max") cfg.area_y_max = to_double(value, name, lineno);
        else if (key == "grid_step_m") cfg.grid_step_m = to_double(value, name, lineno);
        else if (key == "exclusion_radius_m") cfg.exclusion_radius_m = to_double(value, name, lineno);
        else if (key == "realizations") cfg.realizations = static_cast<int>(to_int(value, name, lineno));
        else if (key == "protocols") {
            cfg.protocols.clear();
            if (value == "all") {
                cfg.protocols = {ProtocolKind::CBS, ProtocolKind::D_JPBS, ProtocolKind::C_JPBS};
            } else {
                for (const auto& p : split(value, ','))
                    cfg.protocols.push_back(protocol_from_name(p, name, lineno));
            }
        }
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_int(value, name, lineno));
        else if (key == "out_dir") cfg.out_dir = value;
        else if (key == "initial_active") cfg.initial_active = static_cast<int>(to_int(value, name, lineno));
        else if (key == "initial_beams") cfg.initial_beams = static_cast<int>(to_int(value, name, lineno));
        else if (key == "hpbw_multiplier") cfg.hpbw_multiplier = to_double(value, name, lineno);
        else if (key == "epsilon_grid_rad") {
            cfg.epsilon_grid_rad.clear();
            for (const auto& e : split(value, ','))
                cfg.epsilon_grid_rad.push_back(to_double(e, name, lineno));
        }
        else if (key == "snr_gain_exponent") cfg.snr_gain_exponent = static_cast<int>(to_int(value, name, lineno));
        else if (key == "angle_resolution_rule") {
            if (value == "rayleigh") cfg.angle_resolution_rule = AngleResolutionRule::rayleigh;
            else if (value == "literal") cfg.angle_resolution_rule = AngleResolutionRule::literal;
            else parse_fail(name, lineno, "angle_resolution_rule must be rayleigh or literal");
        }
        else if (key == "rsps_noise") cfg.rsps_noise = to_int(value, name, lineno) != 0;
        else if (key == "cond_cap") cfg.cond_cap = to_double(value, name, lineno);
        else parse_fail(name, lineno, "unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

SweepConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw std::invalid_argument("config: cannot open '" + path + "'");
    return parse_config(is, path);
}

void save_config(const SweepConfig& cfg, std::ostream& os) {
    os << "tx_pos_x = " << fmt(cfg.tx_pos_x) << "\n";
    os << "tx_pos_y = " << fmt(cfg.tx_pos_y) << "\n";
    os << "rx_orientation_rad = " << fmt(cfg.rx_orientation_rad) << "\n";
    os << "scatterers = ";
    for (std::size_t i = 0; i < cfg.scatterers.size(); ++i) {
        if (i)
            os << " ; ";
        os << fmt(cfg.scatterers[i].first) << "," << fmt(cfg.scatterers[i].second);
    }
    os << "\n";
    os << "carrier_freq_hz = " << fmt(cfg.carrier_freq_hz) << "\n";
    os << "bandwidth_hz = " << fmt(cfg.bandwidth_hz) << "\n";
    os << "noise_psd_dbm_per_ghz = " << fmt(cfg.noise_psd_dbm_per_ghz) << "\n";
    os << "n_tx = " << cfg.n_tx << "\n";
    os << "n_rx = " << cfg.n_rx << "\n";
    os << "element_spacing_m = " << fmt(cfg.element_spacing_m) << "\n";
    os << "n_symbols = " << cfg.n_symbols << "\n";
    os << "symbol_energy_j = " << fmt(cfg.symbol_energy_j) << "\n";
    os << "area_x_min = " << fmt(cfg.area_x_min) << "\n";
    os << "area_x_max = " << fmt(cfg.area_x_max) << "\n";
    os << "area_y_min = " << fmt(cfg.area_y_min) << "\n";
    os << "area_y_max = " << fmt(cfg.area_y_max) << "\n";
    os << "grid_step_m = " << fmt(cfg.grid_step_m) << "\n";
    os << "exclusion_radius_m = " << fmt(cfg.exclusion_radius_m) << "\n";
    os << "realizations = " << cfg.realizations << "\n";
    os << "protocols = ";
    for (std::size_t i = 0; i < cfg.protocols.size(); ++i)
        os << (i ? "," : "") << protocol_name(cfg.protocols[i]);
    os << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "out_dir = " << cfg.out_dir << "\n";
    os << "initial_active = " << cfg.initial_active << "\n";
    os << "initial_beams = " << cfg.initial_beams << "\n";
    os << "hpbw_multiplier = " << fmt(cfg.hpbw_multiplier) << "\n";
    os << "epsilon_grid_rad = ";
    for (std::size_t i = 0; i < cfg.epsilon_grid_rad.size(); ++i)
        os << (i ? "," : "") << fmt(cfg.epsilon_grid_rad[i]);
    os << "\n";
    os << "snr_gain_exponent = " << cfg.snr_gain_exponent << "\n";
    os << "angle_resolution_rule = "
       << (cfg.angle_resolution_rule == AngleResolutionRule::rayleigh ? "rayleigh" : "literal")
       << "\n";
    os << "rsps_noise = " << (cfg.rsps_noise ? 1 : 0) << "\n";
    os << "cond_cap = " << fmt(cfg.cond_cap) << "\n";
}

GridResult run_sweep(const SweepConfig& cfg, int n_threads) {
    cfg.validate();
    const Scenario base = cfg.scenario_template();
    const WaveformConfig wf = WaveformConfig::from_scene(base);

    // Admissible grid points: cell centers of the area rectangle (a
    // degenerate rectangle contributes its midpoint). Cell-centered sampling
    // keeps the grid off the transmitter, the array axis and the scatterer
    // ray, which are measure-zero singular lines of the geometry.
    auto centers = [&](double lo, double hi) {
        std::vector<double> c;
        const int n = static_cast<int>(std::floor((hi - lo) / cfg.grid_step_m + 1e-9));
        if (n < 1) {
            c.push_back(0.5 * (lo + hi));
            return c;
        }
        for (int i = 0; i < n; ++i)
            c.push_back(lo + (i + 0.5) * cfg.grid_step_m);
        return c;
    };
    std::vector<Eigen::Vector2d> points;
    for (double x : centers(cfg.area_x_min, cfg.area_x_max))
        for (double y : centers(cfg.area_y_min, cfg.area_y_max)) {
            const Eigen::Vector2d p(x, y);
            bool excluded = (p - base.tx_pos).norm() < cfg.exclusion_radius_m;
            for (const auto& s : base.scatterers)
                excluded = excluded || (p - s).norm() < cfg.exclusion_radius_m;
            if (!excluded)
                points.push_back(p);
        }

    // position-independent CBS reference count
    int cbs_count = 0;
    {
        Scenario probe = base;
        probe.rx_pos = points.empty() ? Eigen::Vector2d(10.0, 0.0) : points.front();
        const auto t = run_cbs(probe, cfg.protocol_config(ProtocolKind::CBS, cfg.seed), wf);
        cbs_count = t.transactions_approx;
    }

    const std::size_t n_protocols = cfg.protocols.size();
    std::vector<RunAggregate> agg(points.size() * n_protocols);

    auto run_point = [&](std::size_t pi) {
        Scenario scene = base;
        scene.rx_pos = points[pi];
        for (std::size_t ci = 0; ci < n_protocols; ++ci) {
            const ProtocolKind kind = cfg.protocols[ci];
            RunAggregate& a = agg[pi * n_protocols + ci];
            // deterministic RSPS makes CBS realizations identical; run it once
            const int runs = (kind == ProtocolKind::CBS && !cfg.rsps_noise) ? 1 : cfg.realizations;
            for (int r = 0; r < runs; ++r) {
                const std::uint64_t run_seed =
                    derive_seed(cfg.seed, pi, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(kind));
                try {
                    const ProtocolConfig pc = cfg.protocol_config(kind, run_seed);
                    const ProtocolTrace t =
                        kind == ProtocolKind::CBS ? run_cbs(scene, pc, wf) : run_jpbs(scene, pc, wf);
                    a.snr_db.push_back(t.final_snr_db);
                    a.n_trans.push_back(static_cast<double>(t.transactions_approx));
                    if (kind != ProtocolKind::CBS) {
                        a.peb.push_back(t.iterations.back().peb_m);
                        a.reb.push_back(t.iterations.back().reb_rad);
                    }
                } catch (const std::exception&) {
                    a.failed = true;
                }
            }
        }
    };

    if (n_threads <= 1) {
        for (std::size_t pi = 0; pi < points.size(); ++pi)
            run_point(pi);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (int t = 0; t < n_threads; ++t)
            workers.emplace_back([&] {
                for (std::size_t pi = next.fetch_add(1); pi < points.size(); pi = next.fetch_add(1))
                    run_point(pi);
            });
        for (auto& w : workers)
            w.join();
    }

    GridResult result;
    result.cbs_transactions = cbs_count;
    result.cells.reserve(agg.size());
    for (std::size_t pi = 0; pi < points.size(); ++pi)
        for (std::size_t ci = 0; ci < n_protocols; ++ci) {
            const RunAggregate& a = agg[pi * n_protocols + ci];
            GridCell cell;
            cell.x = points[pi].x();
            cell.y = points[pi].y();
            cell.protocol = cfg.protocols[ci];
            if (a.failed || a.snr_db.empty()) {
                cell.failed = true;
                result.cells.push_back(cell);
                continue;
            }
            cell.snr_db = mean(a.snr_db);
            cell.n_trans = mean(a.n_trans);
            cell.n_trans_norm = cell.n_trans / cbs_count;
            if (cell.protocol != ProtocolKind::CBS) {
                bool all_observable = true;
                double peb_sum = 0.0, reb_sum = 0.0;
                for (std::size_t r = 0; r < a.peb.size(); ++r) {
                    if (!a.peb[r] || !a.reb[r]) {
                        all_observable = false;
                        break;
                    }
                    peb_sum += *a.peb[r];
                    reb_sum += *a.reb[r];
                }
                cell.observable = all_observable && !a.peb.empty();
                if (cell.observable) {
                    cell.peb_db = error_bound_db(peb_sum / static_cast<double>(a.peb.size()));
                    cell.reb_db = error_bound_db(reb_sum / static_cast<double>(a.reb.size()));
                }
            }
            result.cells.push_back(cell);
        }

    // radial averages over concentric distance bins centered on the transmitter
    struct RadialAcc {
        std::vector<double> snr, trans, norm, peb_lin, reb_lin;
        int observable = 0;
        int total = 0;
    };
    std::map<std::pair<long, int>, RadialAcc> bins;
    for (const auto& cell : result.cells) {
        if (cell.failed)
            continue;
        const double dist = std::hypot(cell.x - cfg.tx_pos_x, cell.y - cfg.tx_pos_y);
        const long bin = static_cast<long>(std::floor(dist / cfg.grid_step_m));
        auto& acc = bins[{bin, static_cast<int>(cell.protocol)}];
        acc.snr.push_back(cell.snr_db);
        acc.trans.push_back(cell.n_trans);
        acc.norm.push_back(cell.n_trans_norm);
        acc.total += 1;
        if (cell.observable) {
            acc.observable += 1;
            acc.peb_lin.push_back(std::pow(10.0, *cell.peb_db / 20.0));
            acc.reb_lin.push_back(std::pow(10.0, *cell.reb_db / 20.0));
        }
    }
    for (const auto& [key, acc] : bins) {
        RadialCell rc;
        rc.dist = (static_cast<double>(key.first) + 0.5) * cfg.grid_step_m;
        rc.protocol = static_cast<ProtocolKind>(key.second);
        rc.snr_db = mean(acc.snr);
        rc.n_trans = mean(acc.trans);
        rc.n_trans_norm = mean(acc.norm);
        if (!acc.peb_lin.empty()) {
            rc.peb_db = error_bound_db(mean(acc.peb_lin));
            rc.reb_db = error_bound_db(mean(acc.reb_lin));
        }
        rc.observable = static_cast<double>(acc.observable) / acc.total;
        result.radial.push_back(rc);
    }
    return result;
}

void write_grid_csv(const GridResult& result, std::ostream& os) {
    os << "x_m,y_m,protocol,snr_db,n_trans,n_trans_norm,peb_db,reb_db,observable\n";
    char buf[256];
    for (const auto& c : result.cells) {
        std::snprintf(buf, sizeof(buf), "%.3f,%.3f,%s,", c.x, c.y, protocol_name(c.protocol));
        os << buf;
        if (c.failed) {
            os << ",,,,,0\n";
            continue;
        }
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,", c.snr_db, c.n_trans, c.n_trans_norm);
        os << buf;
        if (c.peb_db)
            os << fmt(*c.peb_db, "%.6f");
        os << ',';
        if (c.reb_db)
            os << fmt(*c.reb_db, "%.6f");
        os << ',' << (c.observable ? 1 : 0) << '\n';
    }
}

void write_radial_csv(const GridResult& result, std::ostream& os) {
    os << "dist_m,protocol,snr_db,n_trans,n_trans_norm,peb_db,reb_db,observable\n";
    char buf[256];
    for (const auto& c : result.radial) {
        std::snprintf(buf, sizeof(buf), "%.3f,%s,%.6f,%.6f,%.6f,", c.dist, protocol_name(c.protocol),
                      c.snr_db, c.n_trans, c.n_trans_norm);
        os << buf;
        if (c.peb_db)
            os << fmt(*c.peb_db, "%.6f");
        os << ',';
        if (c.reb_db)
            os << fmt(*c.reb_db, "%.6f");
        os << ',' << fmt(c.observable, "%.4f") << '\n';
    }
}

void write_results(const GridResult& result, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const auto grid_path = std::filesystem::path(dir) / "results.csv";
    const auto radial_path = std::filesystem::path(dir) / "radial_results.csv";
    std::ofstream grid(grid_path);
    if (!grid)
        throw std::runtime_error("write_results: cannot open " + grid_path.string());
    write_grid_csv(result, grid);
    if (!grid)
        throw std::runtime_error("write_results: write failed on " + grid_path.string());
    std::ofstream radial(radial_path);
    if (!radial)
        throw std::runtime_error("write_results: cannot open " + radial_path.string());
    write_radial_csv(result, radial);
    if (!radial)
        throw std::runtime_error("write_results: write failed on " + radial_path.string());
}

std::vector<GridCell> read_grid_csv(std::istream& is) {
    std::vector<GridCell> cells;
    std::string line;
    if (!std::getline(is, line))
        throw std::invalid_argument("grid csv: missing header");
    if (trim(line) != "x_m,y_m,protocol,snr_db,n_trans,n_trans_norm,peb_db,reb_db,observable")
        throw std::invalid_argument("grid csv: unexpected header");
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        std::vector<std::string> f;
        std::string item;
        std::istringstream ls(line);
        while (std::getline(ls, item, ','))
            f.push_back(item);
        while (f.size() < 9)
            f.push_back("");
        GridCell c;
        c.x = to_double(f[0], "grid csv", lineno);
        c.y = to_double(f[1], "grid csv", lineno);
        c.protocol = protocol_from_name(f[2], "grid csv", lineno);
        if (f[3].empty()) {
            c.failed = true;
        } else {
            c.snr_db = to_double(f[3], "grid csv", lineno);
            c.n_trans = to_double(f[4], "grid csv", lineno);
            c.n_trans_norm = to_double(f[5], "grid csv", lineno);
            if (!f[6].empty())
                c.peb_db = to_double(f[6], "grid csv", lineno);
            if (!f[7].empty())
                c.reb_db = to_double(f[7], "grid csv", lineno);
            c.observable = to_int(f[8], "grid csv", lineno) != 0;
        }
        cells.push_back(c);
    }
    return cells;
}

} // namespace beamsim
