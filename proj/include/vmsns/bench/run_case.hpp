#pragma once

#include "vmsns/bench/output.hpp"
#include "vmsns/solver.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace vmsns::bench {

struct CaseSpec {
    std::string name;                 // cavity-manufactured-steady, taylor-green, shear-layer, lid-driven-cavity
    std::vector<int> meshes{8};
    int k = 2;
    int kprime = 3;
    double re_inv = 1e-3;             // 0 for Re = inf
    double dt = 0.0;                  // 0: auto
    double t_final = 1.0;
    StabMode stab = StabMode::full_cn;
    double picard_tol = 1e-10;
    int picard_max = 50;
    std::string out_dir;              // empty: nothing written
    int sample = 64;                  // field grid per direction
    std::vector<double> output_times; // transient cases; the final time is always written
    double steady_tol = 1e-9;         // lid-driven pseudo-time stopping rule
    int max_steps = 4000;
};

struct CaseResult {
    std::vector<ErrorRow> errors;
    std::vector<EnergyRow> energy;   // finest mesh
    State final_state;
    int picard_iterations = 0;
};

class CaseError : public std::runtime_error {
public:
    CaseError(const std::string& case_name, const std::string& what)
        : std::runtime_error(case_name + ": " + what), case_name_(case_name)
    {
    }
    const std::string& case_name() const { return case_name_; }

private:
    std::string case_name_;
};

/// Throws std::invalid_argument for an unknown case or incomplete parameters.
void validate(const CaseSpec& spec);

/// Run every mesh of a case. Solver failures are rethrown as CaseError.
CaseResult run_case(const CaseSpec& spec);

}   // namespace vmsns::bench
