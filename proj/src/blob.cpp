#include "levyflow/blob.hpp"

#include "levyflow/core.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace levyflow {

static_assert(std::endian::native == std::endian::little, "blob encoding assumes a little-endian host");

void Blob::add(std::string name, std::vector<double> values) {
    columns.emplace_back(std::move(name), std::move(values));
}

const std::vector<double>& Blob::column(const std::string& name) const {
    for (const auto& c : columns)
        if (c.first == name) return c.second;
    throw DomainError("blob has no column '" + name + "'");
}

bool Blob::has(const std::string& name) const {
    for (const auto& c : columns)
        if (c.first == name) return true;
    return false;
}

std::string encode_blob(const Blob& blob) {
    nlohmann::json header;
    header["meta"] = blob.meta;
    header["columns"] = nlohmann::json::array();
    for (const auto& c : blob.columns)
        header["columns"].push_back({{"name", c.first}, {"count", c.second.size()}});
    const std::string text = header.dump();
    std::string out = "LVFB";
    const std::uint32_t version = Blob::kVersion;
    const std::uint64_t len = text.size();
    out.append(reinterpret_cast<const char*>(&version), sizeof version);
    out.append(reinterpret_cast<const char*>(&len), sizeof len);
    out += text;
    for (const auto& c : blob.columns)
        out.append(reinterpret_cast<const char*>(c.second.data()), c.second.size() * sizeof(double));
    return out;
}

Blob decode_blob(const std::string& bytes) {
    if (bytes.size() < 16 || bytes.compare(0, 4, "LVFB") != 0) throw DomainError("not a LVFB blob");
    std::uint32_t version = 0;
    std::uint64_t len = 0;
    std::memcpy(&version, bytes.data() + 4, sizeof version);
    std::memcpy(&len, bytes.data() + 8, sizeof len);
    if (version != Blob::kVersion) throw DomainError("unsupported blob version");
    if (16 + len > bytes.size()) throw DomainError("truncated blob header");
    const auto header = nlohmann::json::parse(bytes.substr(16, len));
    Blob blob;
    blob.meta = header.at("meta");
    std::size_t pos = 16 + len;
    for (const auto& c : header.at("columns")) {
        const std::size_t n = c.at("count").get<std::size_t>();
        if (pos + n * sizeof(double) > bytes.size()) throw DomainError("truncated blob column");
        std::vector<double> values(n);
        if (n > 0) std::memcpy(values.data(), bytes.data() + pos, n * sizeof(double));
        pos += n * sizeof(double);
        blob.add(c.at("name").get<std::string>(), std::move(values));
    }
    return blob;
}

void write_blob(const Blob& blob, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path + " for writing");
    const std::string bytes = encode_blob(blob);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Blob read_blob(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return decode_blob(ss.str());
}

}  // namespace levyflow
