#include "rieszlab/io.hpp"

#include "rieszlab/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace riesz {

static_assert(std::endian::native == std::endian::little, "ensemble files assume a little-endian host");

namespace {

constexpr char magic[8] = {'R', 'Z', 'E', 'N', 'S', 'M', 'B', 'L'};

template <class T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ValidationError("ensemble file is truncated");
    return v;
}

}  // namespace

void write_ensemble(std::ostream& out, const Ensemble& e) {
    out.write(magic, sizeof magic);
    put<std::uint32_t>(out, ensemble_format_version);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.d));
    put<std::uint64_t>(out, e.N);
    put<std::uint64_t>(out, e.samples.size());
    put<double>(out, e.beta);
    put<std::uint64_t>(out, e.seed);
    put<std::uint64_t>(out, e.burn_in);
    put<std::uint64_t>(out, e.thinning);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.chains));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.model.size()));
    out.write(e.model.data(), static_cast<std::streamsize>(e.model.size()));
    const std::size_t width = e.N * static_cast<std::size_t>(e.d);
    for (std::size_t k = 0; k < e.samples.size(); ++k) {
        if (e.samples[k].coords.size() != width) throw ValidationError("ensemble sample has the wrong size");
        put<std::int32_t>(out, k < e.chain.size() ? e.chain[k] : 0);
        put<double>(out, k < e.energies.size() ? e.energies[k] : 0.0);
        out.write(reinterpret_cast<const char*>(e.samples[k].coords.data()),
                  static_cast<std::streamsize>(width * sizeof(double)));
    }
    if (!out) throw Error("failed writing ensemble");
}

void write_ensemble(const std::string& path, const Ensemble& e) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_ensemble(out, e);
}

Ensemble read_ensemble(std::istream& in) {
    char m[8];
    if (!in.read(m, sizeof m) || std::memcmp(m, magic, sizeof m) != 0)
        throw ValidationError("not an ensemble file (bad magic)");
    const auto version = get<std::uint32_t>(in);
    if (version != ensemble_format_version)
        throw ValidationError("unsupported ensemble format version " + std::to_string(version));
    Ensemble e;
    e.d = static_cast<int>(get<std::uint32_t>(in));
    if (e.d != 1 && e.d != 2) throw ValidationError("ensemble file has dimension " + std::to_string(e.d));
    e.N = get<std::uint64_t>(in);
    const auto count = get<std::uint64_t>(in);
    e.beta = get<double>(in);
    e.seed = get<std::uint64_t>(in);
    e.burn_in = get<std::uint64_t>(in);
    e.thinning = get<std::uint64_t>(in);
    e.chains = static_cast<int>(get<std::uint32_t>(in));
    const auto len = get<std::uint32_t>(in);
    if (len > 4096) throw ValidationError("ensemble model description is implausibly long");
    e.model.resize(len);
    if (len && !in.read(e.model.data(), len)) throw ValidationError("ensemble file is truncated");
    const std::size_t width = e.N * static_cast<std::size_t>(e.d);
    e.samples.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        e.chain.push_back(get<std::int32_t>(in));
        e.energies.push_back(get<double>(in));
        std::vector<double> c(width);
        if (!in.read(reinterpret_cast<char*>(c.data()), static_cast<std::streamsize>(width * sizeof(double))))
            throw ValidationError("ensemble file is truncated");
        e.samples.emplace_back(e.d, std::move(c));
    }
    return e;
}

Ensemble read_ensemble(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open ensemble file '" + path + "'");
    return read_ensemble(in);
}

}  // namespace riesz
