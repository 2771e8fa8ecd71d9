#include "config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace tlsdyn::cli {

namespace {

bool is_manifest(const YAML::Node& root) {
    return root["command"] && root["config"] && root["config"].IsMap();
}

}  // namespace

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

Config Config::parse(const std::string& text, const std::string& source) {
    Config cfg;
    cfg.source_ = source;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (root.IsNull()) return cfg;
    if (!root.IsMap()) {
        throw ConfigError(source + ":" + std::to_string(root.Mark().line + 1) + ": expected a mapping of keys");
    }

    YAML::Node body = root;
    if (is_manifest(root)) {
        cfg.manifest_command_ = root["command"].as<std::string>();
        body = root["config"];
    }
    for (const auto& kv : body) {
        const auto key = kv.first.as<std::string>();
        const int line = kv.first.Mark().line + 1;
        if (cfg.entries_.count(key) != 0) {
            throw ConfigError(source + ":" + std::to_string(line) + ": duplicate key '" + key + "'");
        }
        const YAML::Node& v = kv.second;
        if (v.IsMap()) {
            throw ConfigError(source + ":" + std::to_string(line) + ": key '" + key +
                              "': nested mappings are not supported; use flat keys");
        }
        if (v.IsSequence()) {
            for (const auto& item : v) {
                if (!item.IsScalar()) {
                    throw ConfigError(source + ":" + std::to_string(item.Mark().line + 1) + ": key '" + key +
                                      "': list items must be scalars");
                }
            }
        }
        cfg.entries_[key] = Entry{v, line};
    }
    return cfg;
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

void Config::override_value(const std::string& key, const YAML::Node& value) {
    entries_[key] = Entry{value, 0};
}

const Config::Entry* Config::find(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.used = true;
    if (it->second.value.IsNull()) return nullptr;
    return &it->second;
}

void Config::fail(const std::string& key, const std::string& message) const {
    auto it = entries_.find(key);
    std::string where = source_;
    if (it != entries_.end()) {
        where = it->second.line == 0 ? std::string("command line") : source_ + ":" + std::to_string(it->second.line);
    }
    throw ConfigError(where + ": key '" + key + "': " + message);
}

template <typename T>
T Config::scalar(const std::string& key, const Entry& e, const char* type_name) const {
    if (!e.value.IsScalar()) fail(key, std::string("expected a single ") + type_name);
    try {
        return e.value.as<T>();
    } catch (const YAML::Exception&) {
        fail(key, std::string("expected ") + type_name + ", found '" + e.value.Scalar() + "'");
    }
}

double Config::number(const std::string& key, double fallback) {
    const double v = maybe_number(key).value_or(fallback);
    resolved_[key] = v;
    return v;
}

std::optional<double> Config::maybe_number(const std::string& key) {
    const Entry* e = find(key);
    if (e == nullptr) {
        if (!resolved_.contains(key)) resolved_[key] = nullptr;
        return std::nullopt;
    }
    const auto v = scalar<double>(key, *e, "number");
    if (!std::isfinite(v)) fail(key, "must be finite");
    resolved_[key] = v;
    return v;
}

std::uint64_t Config::unsigned_integer(const std::string& key, std::uint64_t fallback) {
    std::uint64_t v = fallback;
    if (const Entry* e = find(key)) {
        if (e->value.IsScalar() && !e->value.Scalar().empty() && e->value.Scalar().front() == '-') {
            fail(key, "must be a nonnegative integer");
        }
        v = scalar<std::uint64_t>(key, *e, "nonnegative integer");
    }
    resolved_[key] = v;
    return v;
}

bool Config::flag(const std::string& key, bool fallback) {
    bool v = fallback;
    if (const Entry* e = find(key)) v = scalar<bool>(key, *e, "boolean");
    resolved_[key] = v;
    return v;
}

std::string Config::text(const std::string& key, const std::string& fallback) {
    const std::string v = maybe_text(key).value_or(fallback);
    resolved_[key] = v;
    return v;
}

std::optional<std::string> Config::maybe_text(const std::string& key) {
    const Entry* e = find(key);
    if (e == nullptr) {
        if (!resolved_.contains(key)) resolved_[key] = nullptr;
        return std::nullopt;
    }
    auto v = scalar<std::string>(key, *e, "string");
    resolved_[key] = v;
    return v;
}

std::vector<double> Config::numbers(const std::string& key, const std::vector<double>& fallback) {
    std::vector<double> v = fallback;
    if (const Entry* e = find(key)) {
        v.clear();
        if (e->value.IsScalar()) {
            v.push_back(scalar<double>(key, *e, "number"));
        } else {
            for (const auto& item : e->value) {
                try {
                    v.push_back(item.as<double>());
                } catch (const YAML::Exception&) {
                    fail(key, "expected a list of numbers, found '" + item.Scalar() + "'");
                }
            }
        }
        for (double x : v) {
            if (!std::isfinite(x)) fail(key, "values must be finite");
        }
    }
    resolved_[key] = v;
    return v;
}

std::vector<bool> Config::flags(const std::string& key, const std::vector<bool>& fallback) {
    std::vector<bool> v = fallback;
    if (const Entry* e = find(key)) {
        v.clear();
        if (e->value.IsScalar()) {
            v.push_back(scalar<bool>(key, *e, "boolean"));
        } else {
            for (const auto& item : e->value) {
                try {
                    v.push_back(item.as<bool>());
                } catch (const YAML::Exception&) {
                    fail(key, "expected a list of booleans, found '" + item.Scalar() + "'");
                }
            }
        }
    }
    resolved_[key] = v;
    return v;
}

void Config::reject_unknown_keys() const {
    std::string unknown;
    for (const auto& [key, entry] : entries_) {
        if (entry.used) continue;
        if (!unknown.empty()) unknown += "; ";
        unknown += (entry.line == 0 ? std::string("command line") : source_ + ":" + std::to_string(entry.line)) +
                   ": unknown key '" + key + "'";
    }
    if (!unknown.empty()) throw ConfigError(unknown);
}

}  // namespace tlsdyn::cli
