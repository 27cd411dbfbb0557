#include "rieszapp/config.hpp"

#include "rieszlab/potential.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace rieszapp {

namespace pt = boost::property_tree;

namespace {

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': bad list entry '" + tok + "'");
        }
    }
    return out;
}

std::string join(const std::vector<double>& v) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
    return os.str();
}

class Reader {
public:
    explicit Reader(const pt::ptree& t) : tree_(t) {}

    template <class T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        const auto node = tree_.get_optional<std::string>(key);
        if (!node) return;
        if constexpr (std::is_same_v<T, std::string>) {
            out = *node;
        } else if constexpr (std::is_same_v<T, bool>) {
            if (*node == "true" || *node == "1" || *node == "yes") out = true;
            else if (*node == "false" || *node == "0" || *node == "no") out = false;
            else throw ConfigError("config key '" + key + "': expected a boolean, got '" + *node + "'");
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            out = parse_list(key, *node);
        } else {
            const auto v = tree_.get_optional<T>(key);
            if (!v) throw ConfigError("config key '" + key + "': cannot parse '" + *node + "'");
            if constexpr (std::is_unsigned_v<T>) {
                if (!node->empty() && node->front() == '-')
                    throw ConfigError("config key '" + key + "': expected a non-negative integer");
            }
            out = *v;
        }
    }

    std::vector<std::string> unknown() const {
        std::vector<std::string> out;
        for (const auto& [section, body] : tree_) {
            if (body.empty()) {
                out.push_back(section);
                continue;
            }
            for (const auto& [key, value] : body) {
                const std::string full = section + "." + key;
                if (!seen_.count(full)) out.push_back(full);
            }
        }
        return out;
    }

private:
    const pt::ptree& tree_;
    std::set<std::string> seen_;
};

RunConfig from_tree(const pt::ptree& t) {
    RunConfig c;
    Reader r(t);
    r.get("model.d", c.model.d);
    r.get("model.s", c.model.s);
    r.get("model.potential", c.model.potential);
    r.get("model.mode", c.model.mode);
    r.get("model.box", c.model.box);
    r.get("grid.lo", c.grid.lo);
    r.get("grid.hi", c.grid.hi);
    r.get("grid.cells", c.grid.cells);
    r.get("grid.tol", c.grid.tol);
    r.get("gas.N", c.gas.N);
    r.get("gas.beta", c.gas.beta);
    r.get("sampler.samples", c.sampler.samples);
    r.get("sampler.burn_in_sweeps", c.sampler.burn_in_sweeps);
    r.get("sampler.thinning_sweeps", c.sampler.thinning_sweeps);
    r.get("sampler.chains", c.sampler.chains);
    r.get("sampler.initial_scale", c.sampler.initial_scale);
    r.get("sampler.target_acceptance", c.sampler.target_acceptance);
    r.get("sampler.ensemble", c.sampler.ensemble);
    r.get("locallaw.scales", c.locallaw.scales);
    r.get("locallaw.window_lo", c.locallaw.window_lo);
    r.get("locallaw.window_hi", c.locallaw.window_hi);
    r.get("locallaw.fit_fraction", c.locallaw.fit_fraction);
    r.get("locallaw.grading", c.locallaw.grading);
    r.get("locallaw.y_min_rel", c.locallaw.y_min_rel);
    r.get("clt.center", c.clt.center);
    r.get("clt.ell", c.clt.ell);
    r.get("clt.mode", c.clt.mode);
    r.get("clt.min_ess", c.clt.min_ess);
    r.get("clt.taus", c.clt.taus);
    r.get("transport.lo", c.transport.lo);
    r.get("transport.hi", c.transport.hi);
    r.get("transport.cells", c.transport.cells);
    r.get("transport.center", c.transport.center);
    r.get("transport.ell", c.transport.ell);
    r.get("run.seed", c.run.seed);
    r.get("run.out", c.run.out);
    r.get("run.threads", c.run.threads);
    r.get("run.deterministic", c.run.deterministic);
    c.unknown_keys = r.unknown();
    return c;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    pt::ptree t;
    std::istringstream in(text);
    try {
        pt::read_ini(in, t);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config does not parse: ") + e.what());
    }
    return from_tree(t);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::vector<std::string> validate_config(const RunConfig& c) {
    std::vector<std::string> v;
    auto num = [](double x) {
        std::ostringstream os;
        os << x;
        return os.str();
    };
    for (const auto& k : c.unknown_keys) v.push_back("unknown config key '" + k + "'");
    const int d = c.model.d;
    if (d != 1 && d != 2) {
        v.push_back("model.d = " + std::to_string(d) + " is not supported (expected 1 or 2)");
        return v;
    }
    // s = 0 is the log kernel, admissible in d = 1 only
    const bool s_ok = c.model.s < d && c.model.s > d - 2 && c.model.s >= 0.0;
    if (!s_ok)
        v.push_back("model.s = " + num(c.model.s) + " lies outside the super-Coulombic range (d-2, d) = (" +
                    std::to_string(d - 2) + ", " + std::to_string(d) + ")" +
                    (c.model.s < 0.0 && c.model.s > d - 2 ? "; negative s is not supported" : ""));
    if (c.model.mode != "confined" && c.model.mode != "periodic")
        v.push_back("model.mode must be 'confined' or 'periodic', got '" + c.model.mode + "'");
    if (c.model.box < 0.0) v.push_back("model.box must be non-negative");
    try {
        (void)riesz::Potential::parse(c.model.potential);
    } catch (const std::exception& e) {
        v.push_back(std::string("model.potential: ") + e.what());
    }
    if (!(c.grid.hi > c.grid.lo)) v.push_back("grid.hi must exceed grid.lo");
    if (c.grid.cells < 16) v.push_back("grid.cells must be at least 16");
    if (!(c.grid.tol > 0.0)) v.push_back("grid.tol must be positive");
    if (c.gas.N < 1) v.push_back("gas.N must be at least 1");
    if (!(c.gas.beta > 0.0)) v.push_back("gas.beta = " + num(c.gas.beta) + " must be positive");
    if (c.sampler.samples < 1) v.push_back("sampler.samples must be at least 1");
    if (c.sampler.thinning_sweeps < 1) v.push_back("sampler.thinning_sweeps must be at least 1");
    if (c.sampler.chains < 1) v.push_back("sampler.chains must be at least 1");
    if (!(c.sampler.initial_scale > 0.0)) v.push_back("sampler.initial_scale must be positive");
    if (!(c.sampler.target_acceptance > 0.0 && c.sampler.target_acceptance < 1.0))
        v.push_back("sampler.target_acceptance must lie in (0, 1)");
    if (c.gas.N >= 1) {
        // below a few interparticle distances the statistics are dominated by the
        // microscopic scale
        const double floor = 4.0 * std::pow(static_cast<double>(c.gas.N), -1.0 / d);
        if (c.clt.ell < floor)
            v.push_back("clt.ell = " + num(c.clt.ell) + " is below the microscopic floor 4 N^{-1/d} = " +
                        num(floor));
        for (double l : c.locallaw.scales)
            if (l < floor) {
                v.push_back("locallaw.scales contains " + num(l) + ", below the microscopic floor 4 N^{-1/d} = " +
                            num(floor));
                break;
            }
    }
    if (c.locallaw.scales.empty()) v.push_back("locallaw.scales is empty");
    if (!(c.locallaw.window_hi > c.locallaw.window_lo)) v.push_back("locallaw.window_hi must exceed window_lo");
    if (!(c.locallaw.fit_fraction > 0.0 && c.locallaw.fit_fraction < 1.0))
        v.push_back("locallaw.fit_fraction must lie in (0, 1)");
    if (c.clt.mode != "mesoscopic" && c.clt.mode != "macroscopic")
        v.push_back("clt.mode must be 'mesoscopic' or 'macroscopic', got '" + c.clt.mode + "'");
    if (!(c.clt.ell > 0.0)) v.push_back("clt.ell must be positive");
    if (!(c.transport.hi > c.transport.lo)) v.push_back("transport.hi must exceed transport.lo");
    if (c.transport.cells < 64) v.push_back("transport.cells must be at least 64");
    if (!(c.transport.ell > 0.0)) v.push_back("transport.ell must be positive");
    if (c.run.threads < 1) v.push_back("run.threads must be at least 1");
    return v;
}

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["model"] = {{"d", c.model.d},
                  {"s", c.model.s},
                  {"potential", c.model.potential},
                  {"mode", c.model.mode},
                  {"box", c.model.box}};
    j["grid"] = {{"lo", c.grid.lo}, {"hi", c.grid.hi}, {"cells", c.grid.cells}, {"tol", c.grid.tol}};
    j["gas"] = {{"N", c.gas.N}, {"beta", c.gas.beta}};
    j["sampler"] = {{"samples", c.sampler.samples},
                    {"burn_in_sweeps", c.sampler.burn_in_sweeps},
                    {"thinning_sweeps", c.sampler.thinning_sweeps},
                    {"chains", c.sampler.chains},
                    {"initial_scale", c.sampler.initial_scale},
                    {"target_acceptance", c.sampler.target_acceptance},
                    {"ensemble", c.sampler.ensemble}};
    j["locallaw"] = {{"scales", join(c.locallaw.scales)},
                     {"window_lo", c.locallaw.window_lo},
                     {"window_hi", c.locallaw.window_hi},
                     {"fit_fraction", c.locallaw.fit_fraction},
                     {"grading", c.locallaw.grading},
                     {"y_min_rel", c.locallaw.y_min_rel}};
    j["clt"] = {{"center", c.clt.center},
                {"ell", c.clt.ell},
                {"mode", c.clt.mode},
                {"min_ess", c.clt.min_ess},
                {"taus", join(c.clt.taus)}};
    j["transport"] = {{"lo", c.transport.lo},
                      {"hi", c.transport.hi},
                      {"cells", c.transport.cells},
                      {"center", c.transport.center},
                      {"ell", c.transport.ell}};
    j["run"] = {{"seed", c.run.seed},
                {"out", c.run.out},
                {"threads", c.run.threads},
                {"deterministic", c.run.deterministic}};
    return j;
}

}  // namespace rieszapp
