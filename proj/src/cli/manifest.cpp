#include "levyflow/cli.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace levyflow::cli {

using nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 computation failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return os.str();
}

bool RunManifest::passed() const {
    for (const auto& g : gates)
        if (!g.pass) return false;
    return true;
}

json RunManifest::to_json() const {
    json outs = json::array();
    for (const auto& o : outputs) outs.push_back({{"path", o.path}, {"sha256", o.sha256}, {"bytes", o.bytes}});
    json gs = json::array();
    for (const auto& g : gates) gs.push_back({{"name", g.name}, {"pass", g.pass}, {"detail", g.detail}});
    return {{"experiment", experiment}, {"config", config}, {"root_seed", root_seed},
            {"outputs", outs},          {"gates", gs},       {"passed", passed()}};
}

RunManifest RunManifest::from_json(const json& j) {
    RunManifest m;
    m.experiment = j.at("experiment").get<std::string>();
    m.config = j.at("config");
    m.root_seed = j.at("root_seed").get<std::uint64_t>();
    for (const auto& o : j.at("outputs"))
        m.outputs.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>(), o.at("bytes").get<std::size_t>()});
    for (const auto& g : j.value("gates", json::array()))
        m.gates.push_back({g.at("name").get<std::string>(), g.at("pass").get<bool>(), g.value("detail", "")});
    return m;
}

Emitter::Emitter(std::string out_dir) : dir_(std::move(out_dir)) { std::filesystem::create_directories(dir_); }

void Emitter::text(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::path(dir_) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed: " + path.string());
    outputs_.push_back({name, sha256_hex(content), content.size()});
}

void Emitter::json(const std::string& name, const nlohmann::json& content) { text(name, content.dump(2) + "\n"); }

void Emitter::blob(const std::string& name, const Blob& content) { text(name, encode_blob(content)); }

ReplayResult replay(const std::string& manifest_path, const std::string& out_dir) {
    ReplayResult r;
    r.original = RunManifest::from_json(load_json(manifest_path));
    r.rerun = run(r.original.config, out_dir);
    for (const auto& o : r.original.outputs) {
        const OutputFile* match = nullptr;
        for (const auto& n : r.rerun.outputs)
            if (n.path == o.path) match = &n;
        if (!match) r.mismatches.push_back(o.path + ": not produced");
        else if (match->sha256 != o.sha256) r.mismatches.push_back(o.path + ": hash differs");
    }
    for (const auto& n : r.rerun.outputs) {
        bool known = false;
        for (const auto& o : r.original.outputs) known = known || o.path == n.path;
        if (!known) r.mismatches.push_back(n.path + ": not in the original manifest");
    }
    return r;
}

}  // namespace levyflow::cli
