// SPDX-License-Identifier: Apache-2.0
//
// beamsim: mm-wave MIMO beam selection with in-band positioning

#ifndef BEAMSIM_SWEEP_H
#define BEAMSIM_SWEEP_H

#include <optional>
#include <string>
#include <vector>

#include "beamsim/protocol.hpp"

namespace beamsim {

// Monte Carlo sweep over receiver positions on a rectangular grid. All
// unspecified fields default to the nominal simulation setup: 60 GHz carrier,
// 100 MHz bandwidth, -84 dBm/GHz noise PSD, 64x64 antennas at lambda/2, one
// scatterer at [5, 5], transmitter at the origin, 40 m x 40 m area.
struct SweepConfig {
    // scenario template (receiver position comes from the grid)
    double tx_pos_x = 0.0;
    double tx_pos_y = 0.0;
    double rx_orientation_rad = 0.0;
    std::vector<std::pair<double, double>> scatterers{{5.0, 5.0}};
    double carrier_freq_hz = 60e9;
    double bandwidth_hz = 100e6;
    double noise_psd_dbm_per_ghz = -84.0;
    int n_tx = 64;
    int n_rx = 64;
    double element_spacing_m = 0.0;   // 0: lambda/2
    int n_symbols = 64;
    double symbol_energy_j = 0.0;     // 0: calibrate to 0 dB at [10, 0]

    // sweep geometry
    double area_x_min = 0.0;
    double area_x_max = 40.0;
    double area_y_min = -20.0;
    double area_y_max = 20.0;
    double grid_step_m = 2.0;
    double exclusion_radius_m = 0.5;

    // execution
    int realizations = 10;
    std::vector<ProtocolKind> protocols{ProtocolKind::CBS, ProtocolKind::D_JPBS,
                                        ProtocolKind::C_JPBS};
    std::uint64_t seed = 1;
    std::string out_dir = "results";

    // protocol tuning
    int initial_active = 2;
    int initial_beams = 2;
    double hpbw_multiplier = 3.0;
    std::vector<double> epsilon_grid_rad;
    int snr_gain_exponent = 2;
    AngleResolutionRule angle_resolution_rule = AngleResolutionRule::rayleigh;
    bool rsps_noise = false;
    double cond_cap = 1e12;

    void validate() const;
    Scenario scenario_template() const;    // calibrates symbol energy when requested
    ProtocolConfig protocol_config(ProtocolKind kind, std::uint64_t run_seed) const;

    bool operator==(const SweepConfig&) const = default;
};

// Flat key=value configuration file. Unknown keys, bad values and unit-sanity
// violations are reported with the line number. An empty file yields defaults.
SweepConfig load_config(const std::string& path);
SweepConfig parse_config(std::istream& is, const std::string& name);
void save_config(const SweepConfig& cfg, std::ostream& os);

// Aggregated metrics for one grid point and protocol.
struct GridCell {
    double x = 0.0;
    double y = 0.0;
    ProtocolKind protocol = ProtocolKind::CBS;
    bool failed = false;
    double snr_db = 0.0;
    double n_trans = 0.0;        // mean transactions_approx over realizations
    double n_trans_norm = 0.0;   // normalized by the CBS count
    std::optional<double> peb_db;
    std::optional<double> reb_db;
    bool observable = false;     // every realization produced an observable final FIM
};

struct RadialCell {
    double dist = 0.0;           // bin center, m
    ProtocolKind protocol = ProtocolKind::CBS;
    double snr_db = 0.0;
    double n_trans = 0.0;
    double n_trans_norm = 0.0;
    std::optional<double> peb_db;
    std::optional<double> reb_db;
    double observable = 0.0;     // fraction of observable grid points in the bin
};

struct GridResult {
    std::vector<GridCell> cells;
    std::vector<RadialCell> radial;
    int cbs_transactions = 0;
};

// Run every configured protocol on every admissible grid point. Grid points
// within exclusion_radius_m of the transmitter or a scatterer are skipped.
// Per-point failures are flagged, never fatal. n_threads > 1 parallelizes
// over grid points without changing any output byte.
GridResult run_sweep(const SweepConfig& cfg, int n_threads = 1);

// CSV emission: <dir>/results.csv with header
//   x_m,y_m,protocol,snr_db,n_trans,n_trans_norm,peb_db,reb_db,observable
// plus the radial companion <dir>/radial_results.csv keyed by distance bin.
void write_results(const GridResult& result, const std::string& dir);
void write_grid_csv(const GridResult& result, std::ostream& os);
void write_radial_csv(const GridResult& result, std::ostream& os);

// Parse a grid CSV back into cells (schema round-trip).
std::vector<GridCell> read_grid_csv(std::istream& is);

} // namespace beamsim

#endif
