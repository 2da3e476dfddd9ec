#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coopalloc/harness.hpp"
#include "coopalloc/jspa.hpp"
#include "coopalloc/model.hpp"
#include "coopalloc/oracle.hpp"

namespace {

using nlohmann::json;

coopalloc::Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file " + path);
    json root = json::parse(in);
    coopalloc::Instance inst;
    inst.gamma = coopalloc::Matrix::from_rows(root.at("gamma").get<std::vector<std::vector<double>>>());
    inst.rate = root.at("rate").get<std::vector<double>>();
    if (root.contains("num_bs") && root["num_bs"].get<std::size_t>() != inst.num_bs())
        throw std::runtime_error("instance file: num_bs does not match gamma");
    if (root.contains("num_ue") && root["num_ue"].get<std::size_t>() != inst.num_ue())
        throw std::runtime_error("instance file: num_ue does not match gamma");
    inst.validate();
    return inst;
}

coopalloc::Allocation load_allocation(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open allocation file " + path);
    json root = json::parse(in);
    coopalloc::Allocation alloc;
    alloc.x = coopalloc::Matrix::from_rows(root.at("x").get<std::vector<std::vector<double>>>());
    alloc.y = root.at("y").get<std::vector<double>>();
    alloc.recompute_z();
    if (root.contains("z")) alloc.z = root["z"].get<double>();
    if (root.contains("feasible")) alloc.feasible = root["feasible"].get<bool>();
    return alloc;
}

json allocation_to_json(const coopalloc::Allocation& alloc) {
    json x = json::array();
    for (std::size_t i = 0; i < alloc.x.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < alloc.x.cols(); ++j) row.push_back(alloc.x(i, j));
        x.push_back(row);
    }
    return json{{"x", x}, {"y", alloc.y}, {"z", alloc.z}, {"feasible", alloc.feasible}};
}

std::vector<double> parse_eps_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    if (out.empty()) throw std::runtime_error("empty epsilon list");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cooperative downlink spectrum and power allocation"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("sim", "Monte-Carlo comparison of jspa/jmpc/esp");
    std::size_t bs = 2, ue = 20, snapshots = 1000;
    std::uint64_t seed = 1;
    double b0 = 1e7, p0 = 1.0, cell_r = 1000.0, inner_r = 600.0;
    std::string eps_text = "0.2,0.4,0.6,0.8,1.0,1.2,1.4";
    std::string out_path = "results.csv", format = "csv";
    unsigned threads = 0;
    sim->add_option("--bs", bs, "number of base stations");
    sim->add_option("--ue", ue, "number of users");
    sim->add_option("--epsilon", eps_text, "comma-separated demand scales");
    sim->add_option("--snapshots", snapshots, "Monte-Carlo snapshots");
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_option("--b0-hz", b0, "system bandwidth [Hz]");
    sim->add_option("--p0-w", p0, "per-BS power budget [W]");
    sim->add_option("--cell-radius-m", cell_r, "BS circle radius [m]");
    sim->add_option("--inner-radius-m", inner_r, "inner radius [m]");
    sim->add_option("--out", out_path, "output file");
    sim->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sim->add_option("--threads", threads, "worker threads (0 = hardware)");

    auto* solve = app.add_subcommand("solve", "solve a single instance file");
    std::string inst_path, solve_out;
    solve->add_option("--instance", inst_path, "instance JSON file")->required();
    solve->add_option("--out", solve_out, "write the allocation JSON here");

    auto* certify_cmd = app.add_subcommand("certify", "structural checks of an allocation");
    std::string cert_inst, cert_alloc;
    certify_cmd->add_option("--instance", cert_inst, "instance JSON file")->required();
    certify_cmd->add_option("--allocation", cert_alloc, "allocation JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) {
            coopalloc::Scenario sc;
            sc.num_bs = bs;
            sc.num_ue = ue;
            sc.snapshots = snapshots;
            sc.seed = seed;
            sc.b0_hz = b0;
            sc.p0_watts = p0;
            sc.cell_radius_m = cell_r;
            sc.inner_radius_m = inner_r;
            const auto eps = parse_eps_list(eps_text);
            coopalloc::McSummary summary = coopalloc::run_monte_carlo(sc, eps, threads);
            coopalloc::emit(summary, out_path,
                            format == "csv" ? coopalloc::EmitFormat::csv
                                            : coopalloc::EmitFormat::json);
            std::cout << "wrote " << out_path << " (" << summary.rows.size() << " rows)\n";
            return 0;
        }
        if (solve->parsed()) {
            coopalloc::Instance inst = load_instance(inst_path);
            coopalloc::Allocation alloc = coopalloc::optimize(inst);
            const std::string text = allocation_to_json(alloc).dump(2) + "\n";
            if (!solve_out.empty()) {
                std::ofstream out(solve_out, std::ios::binary);
                if (!out) throw std::runtime_error("cannot open " + solve_out);
                out << text;
            } else {
                std::cout << text;
            }
            return alloc.feasible ? 0 : 1;
        }
        if (certify_cmd->parsed()) {
            coopalloc::Instance inst = load_instance(cert_inst);
            coopalloc::Allocation alloc = load_allocation(cert_alloc);
            coopalloc::CertifyReport rep = coopalloc::certify(inst, alloc);
            json out{{"feasible", rep.feasible},
                     {"sparsity_ok", rep.sparsity_ok},
                     {"cluster_order_ok", rep.cluster_order_ok},
                     {"no_improving_shift", rep.no_improving_shift},
                     {"kkt_ok", rep.kkt_ok}};
            std::cout << out.dump(2) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
