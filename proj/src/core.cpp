#include "levyflow/core.hpp"

namespace levyflow {

std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec from_std(const std::vector<double>& v) {
    if (v.empty() || v.size() > static_cast<std::size_t>(kMaxDim))
        throw DomainError("vector dimension must be in 1..3");
    Vec out(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
    return out;
}

}  // namespace levyflow
