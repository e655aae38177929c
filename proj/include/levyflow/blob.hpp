#pragma once

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace levyflow {

// Columnar binary container:
//   bytes 0-3   "LVFB"
//   bytes 4-7   u32 format version (little endian)
//   bytes 8-15  u64 header length H
//   next H      UTF-8 JSON header {"meta": {...}, "columns": [{"name", "count"}, ...]}
//   then each column in header order as count little-endian f64 values.
struct Blob {
    static constexpr unsigned kVersion = 1;

    nlohmann::json meta = nlohmann::json::object();
    std::vector<std::pair<std::string, std::vector<double>>> columns;

    void add(std::string name, std::vector<double> values);
    const std::vector<double>& column(const std::string& name) const;
    bool has(const std::string& name) const;
};

std::string encode_blob(const Blob& blob);
Blob decode_blob(const std::string& bytes);
void write_blob(const Blob& blob, const std::string& path);
Blob read_blob(const std::string& path);

}  // namespace levyflow
