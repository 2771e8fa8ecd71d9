// Flat key/value run configuration with line-numbered diagnostics
//
// A config file is a YAML mapping of scalar or list values, e.g.
//
//   seed: 7
//   tf_density: 1.0e4
//   densities: [1.0e2, 1.0e3, 1.0e4]
//
// A run manifest (manifest.json) is accepted in place of a config file; its "config"
// block is used and its "command" must match the command being run.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

namespace tlsdyn::cli {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class Config {
public:
    Config() = default;

    /// Throws ConfigError naming the file and line on parse errors.
    static Config load(const std::filesystem::path& path);
    static Config parse(const std::string& text, const std::string& source = "<string>");

    /// Command recorded in a manifest, empty for ordinary config files.
    const std::optional<std::string>& manifest_command() const { return manifest_command_; }

    bool has(const std::string& key) const;
    /// A command-line value that replaces any value from the file.
    void override_value(const std::string& key, const YAML::Node& value);

    double number(const std::string& key, double fallback);
    std::optional<double> maybe_number(const std::string& key);
    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback);
    bool flag(const std::string& key, bool fallback);
    std::string text(const std::string& key, const std::string& fallback);
    std::optional<std::string> maybe_text(const std::string& key);
    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
    std::vector<bool> flags(const std::string& key, const std::vector<bool>& fallback);

    /// ConfigError listing every key that no getter asked for.
    void reject_unknown_keys() const;

    /// Every value a getter returned, defaults included.
    const nlohmann::json& resolved() const { return resolved_; }

    /// "file:line: key 'k': message"
    [[noreturn]] void fail(const std::string& key, const std::string& message) const;

private:
    struct Entry {
        YAML::Node value;
        int line = 0;  // 1-based; 0 for command-line overrides
        mutable bool used = false;
    };

    const Entry* find(const std::string& key) const;
    template <typename T>
    T scalar(const std::string& key, const Entry& e, const char* type_name) const;

    std::string source_;
    std::map<std::string, Entry> entries_;
    std::optional<std::string> manifest_command_;
    nlohmann::json resolved_ = nlohmann::json::object();
};

}  // namespace tlsdyn::cli
