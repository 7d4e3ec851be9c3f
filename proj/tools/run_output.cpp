#include "run_output.hpp"

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include <openssl/evp.h>

#include "gjsim/error.hpp"

namespace gjsim::cli {

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::filesystem::path resolve_out_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("GJSIM_OUT_DIR"); env && *env) return env;
    return ".";
}

RunOutput::RunOutput(std::filesystem::path dir, std::string command)
    : dir_(std::move(dir)), command_(std::move(command)), manifest_name_(command_ + ".manifest.json") {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_))
        throw ConfigError("out", dir_.string() + ": cannot create output directory");
}

std::string RunOutput::add_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, path + ": cannot open input file");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    inputs_[path] = sha256_hex(bytes);
    return bytes;
}

void RunOutput::write(const std::string& name, const std::string& bytes) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
    out.close();
    if (!out) throw ConfigError("out", path.string() + ": write failed");
    outputs_[name] = sha256_hex(bytes);
}

void RunOutput::write_json(const std::string& name, Json doc) {
    Json wrapped;
    wrapped["manifest"] = manifest_name_;
    for (auto& [k, v] : doc.items()) wrapped[k] = std::move(v);
    write(name, wrapped.dump(2) + "\n");
}

void RunOutput::finish(const Config& config, const Json& extra, double seconds) {
    const std::string timing_name = command_ + ".timing.json";
    Json m;
    m["tool"] = "gjsim";
    m["version"] = GJSIM_VERSION;
    m["command"] = command_;
    m["config"] = to_ini(config);
    for (const auto& [k, v] : extra.items()) m[k] = v;
    m["inputs"] = Json::object();
    for (const auto& [k, v] : inputs_) m["inputs"][k] = v;
    m["outputs"] = Json::object();
    for (const auto& [k, v] : outputs_) m["outputs"][k] = v;
    m["timing"] = timing_name;
    write(manifest_name_, m.dump(2) + "\n");

    Json t;
    t["manifest"] = manifest_name_;
    t["command"] = command_;
    t["wall_seconds"] = seconds;
    std::ofstream(dir_ / timing_name) << t.dump(2) << "\n";
}

}  // namespace gjsim::cli
