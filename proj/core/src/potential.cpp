#include "rieszlab/potential.hpp"

#include "rieszlab/errors.hpp"

#include <cmath>
#include <sstream>

namespace riesz {

Potential Potential::polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) throw ValidationError("polynomial potential needs at least one coefficient");
    Potential v;
    v.kind_ = Kind::polynomial;
    v.coeffs_ = std::move(coeffs);
    return v;
}

Potential Potential::tabulated(SampledFunction table) {
    if (table.grid.d != 1) throw Unsupported("tabulated potentials are 1-D");
    Potential v;
    v.kind_ = Kind::tabulated;
    v.table_ = std::move(table);
    return v;
}

Potential Potential::parse(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    std::vector<double> nums;
    std::stringstream ss(rest);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            nums.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ValidationError("potential spec '" + spec + "': bad number '" + tok + "'");
        }
    }
    if (kind == "quadratic") return quadratic(nums.empty() ? 1.0 : nums[0]);
    if (kind == "poly") return polynomial(nums);
    throw ValidationError("unknown potential kind '" + kind + "' (expected poly or quadratic)");
}

double Potential::value(std::array<double, 2> x, int d) const {
    if (kind_ == Kind::tabulated) {
        const Grid& g = table_.grid;
        if (x[0] < g.x(0) || x[0] > g.x(g.n[0] - 1)) throw DomainError("point outside the tabulated potential");
        return table_.eval(x[0]);
    }
    const double t = d == 1 ? x[0] : std::hypot(x[0], x[1]);
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + *it;
    return acc;
}

std::array<double, 2> Potential::gradient(std::array<double, 2> x, int d) const {
    if (kind_ == Kind::tabulated) {
        const Grid& g = table_.grid;
        const double t = (x[0] - g.x(0)) / g.h;
        if (t < 0.0 || t > static_cast<double>(g.n[0] - 1)) throw DomainError("point outside the tabulated potential");
        const std::size_t i = std::min(static_cast<std::size_t>(t), g.n[0] - 2);
        return {(table_.values[i + 1] - table_.values[i]) / g.h, 0.0};
    }
    const double t = d == 1 ? x[0] : std::hypot(x[0], x[1]);
    double dv = 0.0;
    for (std::size_t k = coeffs_.size(); k-- > 1;) dv = dv * t + static_cast<double>(k) * coeffs_[k];
    if (d == 1) return {dv, 0.0};
    if (t == 0.0) return {0.0, 0.0};
    return {dv * x[0] / t, dv * x[1] / t};
}

bool Potential::even() const {
    if (kind_ == Kind::tabulated) {
        const auto& v = table_.values;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] != v[v.size() - 1 - i]) return false;
        return std::abs(table_.grid.lo[0] + table_.grid.hi(0)) < 1e-12;
    }
    for (std::size_t k = 1; k < coeffs_.size(); k += 2)
        if (coeffs_[k] != 0.0) return false;
    return true;
}

std::string Potential::describe() const {
    std::ostringstream os;
    if (kind_ == Kind::tabulated) {
        os << "tabulated[" << table_.values.size() << "]";
        return os.str();
    }
    os << "poly:";
    for (std::size_t k = 0; k < coeffs_.size(); ++k) os << (k ? "," : "") << coeffs_[k];
    return os.str();
}

}  // namespace riesz
