// vmsns: run a benchmark case and write errors.csv, energy.csv and sampled fields.

#include "vmsns/bench/exact.hpp"
#include "vmsns/bench/errors.hpp"
#include "vmsns/bench/run_case.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::json;

double parse_re(const std::string& s)
{
    if (s == "inf" || s == "infinity") {
        return 0.0;
    }
    const double re = std::stod(s);
    if (!(re > 0.0)) {
        throw std::invalid_argument("Reynolds number must be positive or 'inf'");
    }
    return 1.0 / re;
}

double parse_dt(const std::string& s) { return s == "auto" ? 0.0 : std::stod(s); }

std::vector<int> parse_meshes(const std::string& s)
{
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        out.push_back(std::stoi(tok));
    }
    return out;
}

std::string as_string(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

/// Config-file keys mirror the long flag names.
void apply_json(const json& j, vmsns::bench::CaseSpec& spec)
{
    if (j.contains("case")) spec.name = j["case"].get<std::string>();
    if (j.contains("nelems")) {
        if (j["nelems"].is_array()) {
            spec.meshes = j["nelems"].get<std::vector<int>>();
        }
        else {
            spec.meshes = parse_meshes(as_string(j["nelems"]));
        }
    }
    if (j.contains("degree")) spec.k = j["degree"].get<int>();
    if (j.contains("fine-degree")) spec.kprime = j["fine-degree"].get<int>();
    if (j.contains("re")) spec.re_inv = parse_re(as_string(j["re"]));
    if (j.contains("dt")) spec.dt = parse_dt(as_string(j["dt"]));
    if (j.contains("tmax")) spec.t_final = j["tmax"].get<double>();
    if (j.contains("stab")) spec.stab = vmsns::stab_mode_from_string(j["stab"].get<std::string>());
    if (j.contains("picard-tol")) spec.picard_tol = j["picard-tol"].get<double>();
    if (j.contains("picard-max")) spec.picard_max = j["picard-max"].get<int>();
    if (j.contains("out")) spec.out_dir = j["out"].get<std::string>();
    if (j.contains("sample")) spec.sample = j["sample"].get<int>();
    if (j.contains("output-times")) spec.output_times = j["output-times"].get<std::vector<double>>();
}

}   // namespace

int main(int argc, char** argv)
{
    CLI::App app{"B-spline VMS Navier-Stokes benchmarks"};
    app.require_subcommand(1);
    CLI::App* run = app.add_subcommand("run", "run one benchmark case");

    std::string config;
    std::string case_name;
    std::string nelems;
    int degree = 0;
    int fine_degree = 0;
    std::string re;
    std::string dt;
    double tmax = 0.0;
    std::string stab;
    double picard_tol = 0.0;
    int picard_max = 0;
    std::string out;
    int sample = 0;
    std::vector<double> output_times;

    run->add_option("--config", config, "JSON file with the same keys as the flags")->check(CLI::ExistingFile);
    run->add_option("--case", case_name, "cavity-manufactured-steady | taylor-green | shear-layer | lid-driven-cavity");
    run->add_option("--nelems", nelems, "elements per direction, comma separated");
    run->add_option("--degree", degree, "coarse degree k");
    run->add_option("--fine-degree", fine_degree, "bubble degree k'");
    run->add_option("--re", re, "Reynolds number or 'inf'");
    run->add_option("--dt", dt, "time step or 'auto'");
    run->add_option("--tmax", tmax, "final time");
    run->add_option("--stab", stab, "none | full-cn | semi-cn");
    run->add_option("--picard-tol", picard_tol, "relative Picard update tolerance");
    run->add_option("--picard-max", picard_max, "maximum Picard iterations");
    run->add_option("--out", out, "output directory");
    run->add_option("--sample", sample, "sampling grid points per direction");
    run->add_option("--output-times", output_times, "times at which fields are written")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    vmsns::bench::CaseSpec spec;
    spec.out_dir = "out";
    try {
        if (!config.empty()) {
            std::ifstream in(config);
            apply_json(json::parse(in), spec);
        }
        if (run->count("--case")) spec.name = case_name;
        if (run->count("--nelems")) spec.meshes = parse_meshes(nelems);
        if (run->count("--degree")) spec.k = degree;
        if (run->count("--fine-degree")) spec.kprime = fine_degree;
        if (run->count("--re")) spec.re_inv = parse_re(re);
        if (run->count("--dt")) spec.dt = parse_dt(dt);
        if (run->count("--tmax")) spec.t_final = tmax;
        if (run->count("--stab")) spec.stab = vmsns::stab_mode_from_string(stab);
        if (run->count("--picard-tol")) spec.picard_tol = picard_tol;
        if (run->count("--picard-max")) spec.picard_max = picard_max;
        if (run->count("--out")) spec.out_dir = out;
        if (run->count("--sample")) spec.sample = sample;
        if (run->count("--output-times")) spec.output_times = output_times;
        if (spec.name.empty()) {
            throw std::invalid_argument("no case given (use --case or a config file)");
        }
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        const auto result = vmsns::bench::run_case(spec);
        vmsns::bench::write_errors_csv(std::cout, result.errors);
        if (result.errors.size() >= 2 && std::isfinite(result.errors.front().err_u)) {
            std::vector<double> h, eu, ew, ep;
            for (const auto& r : result.errors) {
                h.push_back(1.0 / r.nx);
                eu.push_back(r.err_u);
                ew.push_back(r.err_w);
                ep.push_back(r.err_p);
            }
            std::cout << "rates (least squares): u " << vmsns::bench::convergence_table(h, eu).slope << ", omega "
                      << vmsns::bench::convergence_table(h, ew).slope << ", p "
                      << vmsns::bench::convergence_table(h, ep).slope << '\n';
        }
        if (spec.name == "shear-layer") {
            std::cout << "initial kinetic energy (quadrature of the initial condition): "
                      << vmsns::bench::shear_layer_energy() << '\n';
        }
        std::cout << "Picard iterations: " << result.picard_iterations << '\n';
    }
    catch (const vmsns::bench::CaseError& e) {
        std::cerr << "case " << e.case_name() << " failed: " << e.what() << '\n';
        return 1;
    }
    catch (const std::exception& e) {
        std::cerr << "case " << spec.name << " failed: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
