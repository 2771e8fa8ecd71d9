#include "manifest.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <openssl/evp.h>

#include "tlsdyn/version.hpp"

namespace tlsdyn::cli {

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string() + " for hashing");

    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 initialization failed");
    }
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);

    std::string hex;
    char byte[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(byte, sizeof byte, "%02x", md[i]);
        hex += byte;
    }
    return hex;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

RunManifest::RunManifest(std::string command, std::filesystem::path out_dir)
    : command_(std::move(command)), out_dir_(std::move(out_dir)), started_(utc_timestamp()) {}

void RunManifest::add_output(const std::string& relative_path) { outputs_.push_back(relative_path); }

void RunManifest::add_input(const std::filesystem::path& path) { inputs_.push_back(path); }

std::filesystem::path RunManifest::write(const nlohmann::json& resolved_config, std::uint64_t seed) {
    nlohmann::json m;
    m["command"] = command_;
    m["version"] = kVersion;
    m["seed"] = seed;
    m["config"] = resolved_config;
    m["started"] = started_;
    m["finished"] = utc_timestamp();
    m["inputs"] = nlohmann::json::array();
    for (const auto& p : inputs_) {
        m["inputs"].push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    }
    m["outputs"] = nlohmann::json::array();
    for (const auto& rel : outputs_) {
        m["outputs"].push_back({{"path", rel}, {"sha256", sha256_file(out_dir_ / rel)}});
    }
    const auto path = out_dir_ / "manifest.json";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << m.dump(2) << '\n';
    return path;
}

}  // namespace tlsdyn::cli
