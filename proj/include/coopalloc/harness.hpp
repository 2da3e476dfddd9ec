#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "coopalloc/types.hpp"

namespace coopalloc {

// Physical-layer scenario: BSs on a circle of radius cell_radius_m around the
// origin, UEs uniform in the central disk of radius cell_radius_m -
// inner_radius_m, log-distance path loss with exponential (Rayleigh power)
// fading, demands scaled from the equal-spectrum/equal-power reference rates.
struct Scenario {
    std::size_t num_bs = 2;
    std::size_t num_ue = 20;
    double cell_radius_m = 1000.0;
    double inner_radius_m = 600.0;
    double pathloss_a_db = 128.1;
    double pathloss_b = 37.6;
    double noise_dbm_hz = -174.0;
    double p0_watts = 1.0;
    double b0_hz = 1e7;
    double epsilon = 1.0;
    std::size_t snapshots = 1000;
    std::uint64_t seed = 1;

    void validate() const;
};

struct Snapshot {
    std::vector<std::array<double, 2>> positions;  // UE coordinates [m]
    Matrix gains;                                  // |H_ij|^2
    Instance instance;                             // normalized, rates = demand_base
    std::vector<double> demand_base;               // reference rates R'0, bit/s/Hz
};

double pathloss_db(const Scenario& sc, double distance_m);
std::array<double, 2> bs_position(const Scenario& sc, std::size_t i);

// Deterministic per-index substream; identical (seed, index) pairs reproduce
// the snapshot bit for bit regardless of execution order.
Snapshot generate_snapshot(const Scenario& sc, std::size_t snapshot_index);

// Reference rates under equal spectrum and equal power: (1/N) log2(1 + sum_i
// gamma_ij).
std::vector<double> esp_reference(const Snapshot& snap);

// The snapshot's instance with demands scaled to eps * demand_base.
Instance instance_with_demand(const Snapshot& snap, double eps);

// Equal-bandwidth baseline: y fixed to 1/N, power assignment optimized over
// the same candidate associations. feasible = false when no candidate fits
// the budgets.
Allocation jmpc_baseline(const Instance& inst);

struct McRow {
    double epsilon = 0.0;
    std::string algo;  // "jspa", "jmpc" or "esp"
    double mean_z = 0.0;
    double ci95 = 0.0;
    double loss_rate = 0.0;
    std::size_t n_snapshots = 0;
    std::size_t n_feasible = 0;
};

struct McSummary {
    std::vector<McRow> rows;  // epsilon-major, algorithm order jspa, jmpc, esp
};

McSummary run_monte_carlo(const Scenario& sc, const std::vector<double>& eps_list,
                          unsigned threads = 0);

enum class EmitFormat { csv, json };
std::string to_csv(const McSummary& summary);
std::string to_json(const McSummary& summary);
void emit(const McSummary& summary, const std::string& path, EmitFormat format);

}  // namespace coopalloc
