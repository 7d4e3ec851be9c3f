#pragma once

// Output directory handling and the per-command manifest.
//
// Every file a command writes is recorded with its SHA-256 in
// <command>.manifest.json, together with the resolved configuration and the
// digests of the input files. Wall-clock timing varies between runs, so it
// goes to <command>.timing.json instead and the manifest stays byte-stable.

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "gjsim/config.hpp"

namespace gjsim::cli {

using Json = nlohmann::ordered_json;

std::string sha256_hex(const std::string& bytes);

/// --out, then $GJSIM_OUT_DIR, then the working directory.
std::filesystem::path resolve_out_dir(const std::string& flag);

class RunOutput {
public:
    RunOutput(std::filesystem::path dir, std::string command);

    const std::string& manifest_name() const { return manifest_name_; }

    /// Reads a file, records its digest and returns the contents.
    std::string add_input(const std::string& path);

    /// First line of every delimited table.
    std::string csv_preamble() const { return "# manifest: " + manifest_name_ + "\n"; }
    void write(const std::string& name, const std::string& bytes);
    void write_json(const std::string& name, Json doc);

    void finish(const Config& config, const Json& extra, double seconds);

private:
    std::filesystem::path dir_;
    std::string command_;
    std::string manifest_name_;
    std::map<std::string, std::string> inputs_;
    std::map<std::string, std::string> outputs_;
};

}  // namespace gjsim::cli
