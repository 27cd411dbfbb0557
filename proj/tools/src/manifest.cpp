#include "rieszapp/manifest.hpp"

#include "rieszlab/errors.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>

namespace rieszapp {

namespace {

struct Digest {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};
    Digest() {
        if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
            throw riesz::InternalError("sha256 initialisation failed");
    }
    void update(const char* p, std::size_t n) { EVP_DigestUpdate(ctx.get(), p, n); }
    std::string hex() {
        unsigned char out[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx.get(), out, &len);
        static const char* digits = "0123456789abcdef";
        std::string s;
        for (unsigned int k = 0; k < len; ++k) {
            s += digits[out[k] >> 4];
            s += digits[out[k] & 15];
        }
        return s;
    }
};

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    Digest d;
    d.update(bytes.data(), bytes.size());
    return d.hex();
}

std::string sha256_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw riesz::Error("cannot read '" + p.string() + "' for hashing");
    Digest d;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        d.update(buf, static_cast<std::size_t>(in.gcount()));
    }
    return d.hex();
}

RunDirectory::RunDirectory(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_))
        throw riesz::ValidationError("output directory '" + dir_.string() + "' cannot be created");
    const auto probe = dir_ / ".write_probe";
    {
        std::ofstream out(probe);
        if (!out) throw riesz::ValidationError("output directory '" + dir_.string() + "' is not writable");
    }
    std::filesystem::remove(probe, ec);
}

void RunDirectory::write_text(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw riesz::Error("cannot write '" + (dir_ / name).string() + "'");
    out << content;
    out.close();
    files_.emplace_back(name, sha256_hex(content));
    sizes_.push_back(content.size());
}

void RunDirectory::record(const std::string& name) {
    files_.emplace_back(name, sha256_file(dir_ / name));
    sizes_.push_back(std::filesystem::file_size(dir_ / name));
}

void RunDirectory::write_manifest(const std::string& subcommand, const nlohmann::json& config,
                                  const nlohmann::json& results, bool deterministic, double elapsed_seconds) const {
    nlohmann::json m;
    m["tool"] = "rieszlab";
    m["format"] = 1;
    m["subcommand"] = subcommand;
    m["config"] = config;
    m["results"] = results;
    std::string all;
    nlohmann::json files = nlohmann::json::array();
    for (std::size_t k = 0; k < files_.size(); ++k) {
        files.push_back({{"name", files_[k].first}, {"sha256", files_[k].second}, {"bytes", sizes_[k]}});
        all += files_[k].first + ":" + files_[k].second + "\n";
    }
    m["files"] = files;
    m["content_hash"] = sha256_hex(all);
    if (!deterministic) {
        m["timestamp"] = utc_now();
        m["elapsed_seconds"] = elapsed_seconds;
    }
    std::ofstream out(dir_ / "manifest.json");
    if (!out) throw riesz::Error("cannot write manifest.json");
    out << m.dump(2) << "\n";
}

}  // namespace rieszapp
