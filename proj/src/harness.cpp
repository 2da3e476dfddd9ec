#include "coopalloc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include <json.hpp>

#include "coopalloc/association.hpp"
#include "coopalloc/jspa.hpp"
#include "coopalloc/model.hpp"
#include "coopalloc/solver.hpp"
#include "coopalloc/util.hpp"

namespace coopalloc {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string serving_signature(const std::vector<std::vector<std::size_t>>& serving) {
    std::string s;
    s.reserve(serving.size() * 2);
    for (const auto& lst : serving) {
        for (std::size_t i : lst) s += static_cast<char>('a' + i);
        s += '|';
    }
    return s;
}

}  // namespace

void Scenario::validate() const {
    if (num_bs < 1 || num_ue < 1) throw std::invalid_argument("scenario: need BSs and UEs");
    if (!(inner_radius_m > 0.0) || !(cell_radius_m > inner_radius_m))
        throw std::invalid_argument("scenario: need 0 < inner radius < cell radius");
    if (p0_watts <= 0.0 || b0_hz <= 0.0) throw std::invalid_argument("scenario: p0, b0 positive");
    if (epsilon <= 0.0) throw std::invalid_argument("scenario: epsilon positive");
    if (snapshots < 1) throw std::invalid_argument("scenario: need at least one snapshot");
}

double pathloss_db(const Scenario& sc, double distance_m) {
    const double d_km = std::max(distance_m, 1.0) / 1000.0;
    return sc.pathloss_a_db + sc.pathloss_b * std::log10(d_km);
}

std::array<double, 2> bs_position(const Scenario& sc, std::size_t i) {
    const double ang = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(sc.num_bs);
    return {sc.cell_radius_m * std::cos(ang), sc.cell_radius_m * std::sin(ang)};
}

Snapshot generate_snapshot(const Scenario& sc, std::size_t snapshot_index) {
    sc.validate();
    Snapshot snap;
    SplitMix64 rng(sc.seed, snapshot_index);

    const double zone_radius = sc.cell_radius_m - sc.inner_radius_m;
    snap.positions.resize(sc.num_ue);
    for (std::size_t j = 0; j < sc.num_ue; ++j) {
        const double r = zone_radius * std::sqrt(rng.uniform());
        const double th = 2.0 * kPi * rng.uniform();
        snap.positions[j] = {r * std::cos(th), r * std::sin(th)};
    }

    snap.gains = Matrix(sc.num_bs, sc.num_ue);
    for (std::size_t i = 0; i < sc.num_bs; ++i) {
        const auto bs = bs_position(sc, i);
        for (std::size_t j = 0; j < sc.num_ue; ++j) {
            const double dx = snap.positions[j][0] - bs[0];
            const double dy = snap.positions[j][1] - bs[1];
            const double d = std::sqrt(dx * dx + dy * dy);
            const double fading = rng.exponential();
            snap.gains(i, j) = std::pow(10.0, -pathloss_db(sc, d) / 10.0) * fading;
        }
    }

    PhysicalProblem p;
    p.num_bs = sc.num_bs;
    p.num_ue = sc.num_ue;
    p.p0 = sc.p0_watts;
    p.b0 = sc.b0_hz;
    p.n0 = std::pow(10.0, (sc.noise_dbm_hz - 30.0) / 10.0);
    p.channel_gain = snap.gains;
    p.rate_demand.assign(sc.num_ue, 1.0);  // placeholder; replaced below
    snap.instance = normalize(p);
    snap.demand_base = esp_reference(snap);
    snap.instance.rate = snap.demand_base;
    return snap;
}

std::vector<double> esp_reference(const Snapshot& snap) {
    const std::size_t m = snap.instance.num_bs(), n = snap.instance.num_ue();
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += snap.instance.gamma(i, j);
        out[j] = std::log2(1.0 + s) / static_cast<double>(n);
    }
    return out;
}

Instance instance_with_demand(const Snapshot& snap, double eps) {
    Instance inst = snap.instance;
    for (std::size_t j = 0; j < inst.rate.size(); ++j) inst.rate[j] = eps * snap.demand_base[j];
    return inst;
}

Allocation jmpc_baseline(const Instance& inst) {
    inst.validate();
    const Tolerances tol;
    const std::size_t m = inst.num_bs(), n = inst.num_ue();
    const double yfix = 1.0 / static_cast<double>(n);
    std::vector<double> need(n);
    for (std::size_t j = 0; j < n; ++j) need[j] = received_power_needed(inst.rate[j], yfix);

    Allocation best;
    best.x = Matrix(m, n, 0.0);
    best.y.assign(n, yfix);
    best.feasible = false;
    double best_z = std::numeric_limits<double>::infinity();

    PairOrders orders(inst);
    BoundaryEnumerator en(inst, orders);
    std::set<std::string> seen;
    en.for_each([&](const BoundaryVector&, const Association& assoc, std::uint64_t) {
        const std::string sig = serving_signature(assoc.serving);
        if (!seen.insert(sig).second) return true;

        // cheapest-link lower bound culls dominated associations early
        double lb = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double bestg = 0.0;
            for (std::size_t i : assoc.serving[j]) bestg = std::max(bestg, inst.gamma(i, j));
            lb += need[j] / bestg;
        }
        if (lb >= best_z) return true;

        Matrix x(m, n, 0.0);
        std::vector<double> base(m, 0.0);
        std::vector<std::size_t> multi;
        for (std::size_t j = 0; j < n; ++j) {
            if (assoc.serving[j].size() == 1) {
                const std::size_t i = assoc.serving[j][0];
                x(i, j) = need[j] / inst.gamma(i, j);
                base[i] += x(i, j);
            } else {
                multi.push_back(j);
            }
        }
        bool ok = true;
        for (std::size_t i = 0; i < m; ++i)
            if (base[i] > 1.0 + tol.eq) ok = false;
        if (!ok) return true;

        if (!multi.empty()) {
            MiniLp lp;
            std::vector<std::pair<std::size_t, std::size_t>> vars;
            for (std::size_t j : multi)
                for (std::size_t i : assoc.serving[j])
                    if (inst.gamma(i, j) > 0.0) vars.emplace_back(j, i);
            lp.c.assign(vars.size(), 1.0);
            for (std::size_t j : multi) {
                std::vector<double> row(vars.size(), 0.0);
                for (std::size_t v = 0; v < vars.size(); ++v)
                    if (vars[v].first == j) row[v] = inst.gamma(vars[v].second, j);
                lp.a_eq.push_back(std::move(row));
                lp.b_eq.push_back(need[j]);
            }
            for (std::size_t i = 0; i < m; ++i) {
                std::vector<double> row(vars.size(), 0.0);
                bool touches = false;
                for (std::size_t v = 0; v < vars.size(); ++v)
                    if (vars[v].second == i) {
                        row[v] = 1.0;
                        touches = true;
                    }
                if (!touches) continue;
                lp.a_ub.push_back(std::move(row));
                lp.b_ub.push_back(1.0 - base[i]);
            }
            MiniLp::Result res = lp.solve(1e-11);
            if (!res.feasible) return true;
            for (std::size_t v = 0; v < vars.size(); ++v)
                x(vars[v].second, vars[v].first) = res.x[v];
        }
        double z = 0.0;
        for (double v : x.data()) z += v;
        if (z < best_z) {
            best_z = z;
            best.x = x;
            best.recompute_z();
            best.feasible = true;
        }
        return true;
    });
    if (best.feasible) best.feasible = allocation_feasible(inst, best, tol);
    return best;
}

McSummary run_monte_carlo(const Scenario& sc, const std::vector<double>& eps_list,
                          unsigned threads) {
    sc.validate();
    if (eps_list.empty()) throw std::invalid_argument("run_monte_carlo: empty epsilon list");
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

    const std::size_t ne = eps_list.size(), ns = sc.snapshots;
    struct Cell {
        double z = 0.0;
        bool feasible = false;
    };
    // indexed [eps][snapshot]
    std::vector<std::vector<Cell>> jspa_cells(ne, std::vector<Cell>(ns));
    std::vector<std::vector<Cell>> jmpc_cells(ne, std::vector<Cell>(ns));

    parallel_for(ns, threads, [&](std::size_t s) {
        Snapshot snap = generate_snapshot(sc, s);
        for (std::size_t e = 0; e < ne; ++e) {
            Instance inst = instance_with_demand(snap, eps_list[e]);
            Allocation a = optimize(inst);
            jspa_cells[e][s] = {a.z, a.feasible};
            Allocation b = jmpc_baseline(inst);
            jmpc_cells[e][s] = {b.z, b.feasible};
        }
    });

    McSummary out;
    const double m_d = static_cast<double>(sc.num_bs);
    for (std::size_t e = 0; e < ne; ++e) {
        auto aggregate = [&](const std::vector<Cell>& cells, const std::string& algo) {
            McRow row;
            row.epsilon = eps_list[e];
            row.algo = algo;
            row.n_snapshots = ns;
            double sum = 0.0, sum2 = 0.0;
            std::size_t nf = 0;
            for (const Cell& c : cells) {
                if (!c.feasible) continue;
                ++nf;
                sum += c.z;
                sum2 += c.z * c.z;
            }
            row.n_feasible = nf;
            row.loss_rate = static_cast<double>(ns - nf) / static_cast<double>(ns);
            if (nf > 0) row.mean_z = sum / static_cast<double>(nf);
            if (nf > 1) {
                const double var =
                    std::max(0.0, (sum2 - sum * sum / static_cast<double>(nf)) /
                                      static_cast<double>(nf - 1));
                row.ci95 = 1.96 * std::sqrt(var / static_cast<double>(nf));
            }
            out.rows.push_back(row);
        };
        aggregate(jspa_cells[e], "jspa");
        aggregate(jmpc_cells[e], "jmpc");
        // equal spectrum and power reference: x = y = 1/N meets the demand
        // exactly when eps <= 1 and consumes M regardless
        McRow esp;
        esp.epsilon = eps_list[e];
        esp.algo = "esp";
        esp.n_snapshots = ns;
        if (eps_list[e] <= 1.0) {
            esp.n_feasible = ns;
            esp.mean_z = m_d;
            esp.loss_rate = 0.0;
        } else {
            esp.n_feasible = 0;
            esp.mean_z = 0.0;
            esp.loss_rate = 1.0;
        }
        out.rows.push_back(esp);
    }
    return out;
}

std::string to_csv(const McSummary& summary) {
    std::string s = "epsilon,algo,mean_z,ci95,loss_rate,n_snapshots,n_feasible\n";
    for (const McRow& r : summary.rows) {
        s += format_g9(r.epsilon);
        s += ',';
        s += r.algo;
        s += ',';
        s += format_g9(r.mean_z);
        s += ',';
        s += format_g9(r.ci95);
        s += ',';
        s += format_g9(r.loss_rate);
        s += ',';
        s += std::to_string(r.n_snapshots);
        s += ',';
        s += std::to_string(r.n_feasible);
        s += '\n';
    }
    return s;
}

std::string to_json(const McSummary& summary) {
    nlohmann::ordered_json root;
    root["results"] = nlohmann::ordered_json::array();
    for (const McRow& r : summary.rows) {
        nlohmann::ordered_json row;
        row["epsilon"] = nlohmann::ordered_json::parse(format_g9(r.epsilon));
        row["algo"] = r.algo;
        row["mean_z"] = nlohmann::ordered_json::parse(format_g9(r.mean_z));
        row["ci95"] = nlohmann::ordered_json::parse(format_g9(r.ci95));
        row["loss_rate"] = nlohmann::ordered_json::parse(format_g9(r.loss_rate));
        row["n_snapshots"] = r.n_snapshots;
        row["n_feasible"] = r.n_feasible;
        root["results"].push_back(row);
    }
    return root.dump(2) + "\n";
}

void emit(const McSummary& summary, const std::string& path, EmitFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit: cannot open " + path);
    out << (format == EmitFormat::csv ? to_csv(summary) : to_json(summary));
    if (!out) throw std::runtime_error("emit: write failed for " + path);
}

}  // namespace coopalloc
