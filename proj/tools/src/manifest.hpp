// Run manifests: what ran, with which configuration, and what it wrote

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tlsdyn::cli {

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// UTC wall-clock time in ISO 8601 with a trailing Z.
std::string utc_timestamp();

class RunManifest {
public:
    RunManifest(std::string command, std::filesystem::path out_dir);

    /// Records an output file (relative to the output directory) for digesting at write time.
    void add_output(const std::string& relative_path);
    void add_input(const std::filesystem::path& path);

    /// Writes manifest.json into the output directory and returns its path.
    std::filesystem::path write(const nlohmann::json& resolved_config, std::uint64_t seed);

    const std::filesystem::path& out_dir() const { return out_dir_; }

private:
    std::string command_;
    std::filesystem::path out_dir_;
    std::string started_;
    std::vector<std::string> outputs_;
    std::vector<std::filesystem::path> inputs_;
};

}  // namespace tlsdyn::cli
