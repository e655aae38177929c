#pragma once

#include "levyflow/blob.hpp"
#include "levyflow/resolvent.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace levyflow::cli {

inline constexpr int kSchemaVersion = 1;

const std::vector<std::string>& experiments();

// Default configuration of one experiment, every key present.
nlohmann::json default_config(const std::string& experiment);
// Fills defaults and checks keys and types against the experiment's schema; throws DomainError
// naming the offending key. normalize_config(normalize_config(c)) == normalize_config(c).
nlohmann::json normalize_config(const nlohmann::json& raw);
nlohmann::json load_json(const std::string& path);

ResolventOptions resolvent_options_from_json(const nlohmann::json& j, ResolventOptions base = {});
nlohmann::json resolvent_options_to_json(const ResolventOptions& o);

std::string sha256_hex(const std::string& bytes);

struct OutputFile {
    std::string path;  // relative to the output directory
    std::string sha256;
    std::size_t bytes = 0;
};

struct Gate {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunManifest {
    std::string experiment;
    nlohmann::json config;
    std::uint64_t root_seed = 0;
    std::vector<OutputFile> outputs;
    std::vector<Gate> gates;

    bool passed() const;
    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

// Writes output files into a directory and records their hashes.
class Emitter {
public:
    explicit Emitter(std::string out_dir);
    void text(const std::string& name, const std::string& content);
    void json(const std::string& name, const nlohmann::json& content);
    void blob(const std::string& name, const Blob& content);
    const std::vector<OutputFile>& outputs() const { return outputs_; }

private:
    std::string dir_;
    std::vector<OutputFile> outputs_;
};

// Runs the experiment named in the config, writes its outputs and manifest.json into out_dir.
RunManifest run(const nlohmann::json& config, const std::string& out_dir);

struct ReplayResult {
    RunManifest original;
    RunManifest rerun;
    std::vector<std::string> mismatches;
    bool identical() const { return mismatches.empty(); }
};

// Re-executes a manifest's config into out_dir and compares every output hash.
ReplayResult replay(const std::string& manifest_path, const std::string& out_dir);

// Command line entry point: 0 iff every gate passed, 1 on a failed gate, 2 on an error.
int main(int argc, char** argv);

}  // namespace levyflow::cli
