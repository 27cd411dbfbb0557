#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rieszlab/errors.hpp"

namespace rieszapp {

class ConfigError : public riesz::ValidationError {
public:
    using riesz::ValidationError::ValidationError;
};

struct ModelSection {
    int d = 1;
    double s = 0.0;
    std::string potential = "quadratic:1";
    std::string mode = "confined";  // confined | periodic
    double box = 0.0;               // periodic side; 0 means N (unit density)
};

struct GridSection {
    double lo = -2.0;
    double hi = 2.0;
    std::size_t cells = 512;
    double tol = 1e-11;
};

struct GasSection {
    std::size_t N = 64;
    double beta = 2.0;
};

struct SamplerSection {
    std::size_t samples = 500;
    std::uint64_t burn_in_sweeps = 2000;
    std::uint64_t thinning_sweeps = 20;
    int chains = 1;
    double initial_scale = 0.05;
    double target_acceptance = 0.3;
    std::string ensemble;  // input for locallaw / clt; empty means sample afresh
};

struct LocalLawSection {
    std::vector<double> scales{0.125, 0.25, 0.5};
    double window_lo = -0.5;
    double window_hi = 0.5;
    double fit_fraction = 0.5;
    double grading = 1.5;
    double y_min_rel = 1e-4;
};

struct CltSection {
    double center = 0.0;
    double ell = 0.25;
    std::string mode = "mesoscopic";  // mesoscopic | macroscopic
    double min_ess = 100.0;
    std::vector<double> taus{-0.2, -0.1, 0.1, 0.2};
};

struct TransportSection {
    double lo = -4.0;
    double hi = 4.0;
    std::size_t cells = 2048;
    double center = 0.0;
    double ell = 0.2;
};

struct RunSection {
    std::uint64_t seed = 1;
    std::string out = "runs/default";
    int threads = 1;
    bool deterministic = false;
};

struct RunConfig {
    ModelSection model;
    GridSection grid;
    GasSection gas;
    SamplerSection sampler;
    LocalLawSection locallaw;
    CltSection clt;
    TransportSection transport;
    RunSection run;
    // keys present in the file but not recognised
    std::vector<std::string> unknown_keys;
};

// Flat key = value text with [section] headers. Throws ConfigError when the
// file cannot be read or a value does not parse.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

// Static admissibility checks; empty iff the configuration can be dispatched.
std::vector<std::string> validate_config(const RunConfig& c);

nlohmann::json to_json(const RunConfig& c);

}  // namespace rieszapp
