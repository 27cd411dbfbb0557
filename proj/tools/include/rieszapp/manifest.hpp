#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace rieszapp {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& p);

// Collects artifacts of one run and writes manifest.json next to them.
class RunDirectory {
public:
    explicit RunDirectory(std::filesystem::path dir);

    const std::filesystem::path& path() const { return dir_; }
    // Writes the file and records its hash.
    void write_text(const std::string& name, const std::string& content);
    // Records a file written by someone else.
    void record(const std::string& name);

    // The content hash covers the artifact names and hashes, so it is stable
    // across runs with identical payloads.
    void write_manifest(const std::string& subcommand, const nlohmann::json& config, const nlohmann::json& results,
                        bool deterministic, double elapsed_seconds) const;

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;  // name, sha256
    std::vector<std::uintmax_t> sizes_;
};

}  // namespace rieszapp
