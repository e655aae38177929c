#include "levyflow/grid_function.hpp"

#include "levyflow/rng.hpp"

#include <algorithm>
#include <cmath>

namespace levyflow {

namespace {

constexpr std::uint64_t kPairSeed = 0x5E311A0B1DULL;
constexpr int kRandomPairs = 20000;

double matrix_norm(const double* v, int rows, int cols) {
    if (rows == 1 || cols == 1) {
        double s = 0.0;
        for (int i = 0; i < rows * cols; ++i) s += v[i] * v[i];
        return std::sqrt(s);
    }
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = v[r * cols + c];
    return Eigen::JacobiSVD<Mat>(m).singularValues()[0];
}

}  // namespace

Lattice::Lattice(int d, double R, int n) : dim(d), half_width(R), nodes(n) {
    if (d < 1 || d > kMaxDim) throw DomainError("lattice dimension must be in 1..3");
    if (!(R > 0.0)) throw DomainError("lattice half width must be positive");
    if (n < 2) throw DomainError("lattice needs at least two nodes per axis");
}

std::size_t Lattice::size() const {
    std::size_t s = 1;
    for (int k = 0; k < dim; ++k) s *= static_cast<std::size_t>(nodes);
    return s;
}

std::array<int, 3> Lattice::index(std::size_t flat) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int k = 0; k < dim; ++k) {
        idx[static_cast<std::size_t>(k)] = static_cast<int>(flat % static_cast<std::size_t>(nodes));
        flat /= static_cast<std::size_t>(nodes);
    }
    return idx;
}

std::size_t Lattice::flat(const std::array<int, 3>& idx) const {
    std::size_t f = 0;
    for (int k = dim - 1; k >= 0; --k) f = f * static_cast<std::size_t>(nodes) + static_cast<std::size_t>(idx[static_cast<std::size_t>(k)]);
    return f;
}

Vec Lattice::node(std::size_t f) const {
    const auto idx = index(f);
    Vec x(dim);
    for (int k = 0; k < dim; ++k) x[k] = coordinate(idx[static_cast<std::size_t>(k)]);
    return x;
}

bool Lattice::inside(const Vec& x) const {
    for (int k = 0; k < dim; ++k)
        if (std::abs(x[k]) > half_width) return false;
    return true;
}

bool Lattice::interior(std::size_t f, int margin) const {
    const auto idx = index(f);
    for (int k = 0; k < dim; ++k) {
        const int i = idx[static_cast<std::size_t>(k)];
        if (i < margin || i > nodes - 1 - margin) return false;
    }
    return true;
}

nlohmann::json Lattice::to_json() const { return {{"dimension", dim}, {"half_width", half_width}, {"nodes", nodes}}; }

Lattice Lattice::from_json(const nlohmann::json& j) {
    return Lattice(j.at("dimension").get<int>(), j.at("half_width").get<double>(), j.at("nodes").get<int>());
}

nlohmann::json Provenance::to_json() const {
    return {{"producer", producer},
            {"n_mc", n_mc},
            {"seed", seed},
            {"max_standard_error", max_standard_error},
            {"out_of_box_fraction", out_of_box_fraction},
            {"noise_warning", noise_warning},
            {"extra", extra}};
}

Provenance Provenance::from_json(const nlohmann::json& j) {
    Provenance p;
    p.producer = j.value("producer", "");
    p.n_mc = j.value("n_mc", std::size_t{0});
    p.seed = j.value("seed", std::uint64_t{0});
    p.max_standard_error = j.value("max_standard_error", 0.0);
    p.out_of_box_fraction = j.value("out_of_box_fraction", 0.0);
    p.noise_warning = j.value("noise_warning", false);
    p.extra = j.value("extra", nlohmann::json::object());
    return p;
}

GridFunction::GridFunction(const Lattice& lattice, int rows, int cols)
    : lattice_(lattice), rows_(rows), cols_(cols), values_(lattice.size() * static_cast<std::size_t>(rows * cols), 0.0) {
    if (rows < 1 || cols < 1) throw DomainError("grid function shape must be positive");
}

GridFunction GridFunction::sample(const Lattice& lattice, const std::function<double(const Vec&)>& f) {
    GridFunction g(lattice, 1, 1);
    for (std::size_t i = 0; i < lattice.size(); ++i) g.values_[i] = f(lattice.node(i));
    g.provenance_.producer = "sample";
    return g;
}

GridFunction GridFunction::sample_vector(const Lattice& lattice, int rows, const std::function<Vec(const Vec&)>& f) {
    GridFunction g(lattice, rows, 1);
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        const Vec v = f(lattice.node(i));
        if (v.size() != rows) throw DomainError("sampled vector has the wrong size");
        for (int r = 0; r < rows; ++r) g.at(i, r) = v[r];
    }
    g.provenance_.producer = "sample";
    return g;
}

bool GridFunction::interpolate(const Vec& x, double* out) const {
    const int d = lattice_.dim;
    const int nc = components();
    const double h = lattice_.spacing();
    const int n = lattice_.nodes;
    bool clamped = false;
    std::array<int, 3> base{0, 0, 0};
    std::array<double, 3> frac{0.0, 0.0, 0.0};
    for (int k = 0; k < d; ++k) {
        double p = (x[k] + lattice_.half_width) / h;
        if (!(p >= 0.0)) {
            p = 0.0;
            clamped = true;
        } else if (p > n - 1) {
            p = n - 1;
            clamped = true;
        }
        const double r = std::round(p);
        if (std::abs(p - r) < 1e-9) p = r;
        int i = static_cast<int>(std::floor(p));
        if (i > n - 2) i = n - 2;
        base[static_cast<std::size_t>(k)] = i;
        frac[static_cast<std::size_t>(k)] = p - i;
    }
    for (int c = 0; c < nc; ++c) out[c] = 0.0;
    const int corners = 1 << d;
    for (int m = 0; m < corners; ++m) {
        double w = 1.0;
        std::array<int, 3> idx = base;
        for (int k = 0; k < d; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            if (m & (1 << k)) {
                w *= frac[kk];
                idx[kk] += 1;
            } else {
                w *= 1.0 - frac[kk];
            }
        }
        if (w == 0.0) continue;
        const std::size_t f = lattice_.flat(idx);
        const double* v = &values_[f * static_cast<std::size_t>(nc)];
        for (int c = 0; c < nc; ++c) out[c] += w * v[c];
    }
    return clamped;
}

double GridFunction::interpolate(const Vec& x, int comp) const {
    double buf[kMaxDim * kMaxDim];
    interpolate(x, buf);
    return buf[comp];
}

Vec GridFunction::interpolate_vec(const Vec& x) const {
    double buf[kMaxDim * kMaxDim];
    interpolate(x, buf);
    Vec v(components());
    for (int c = 0; c < components(); ++c) v[c] = buf[c];
    return v;
}

Mat GridFunction::interpolate_mat(const Vec& x) const {
    double buf[kMaxDim * kMaxDim];
    interpolate(x, buf);
    Mat m(rows_, cols_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) m(r, c) = buf[r * cols_ + c];
    return m;
}

double GridFunction::value_norm(std::size_t node) const {
    return matrix_norm(&values_[node * static_cast<std::size_t>(components())], rows_, cols_);
}

double GridFunction::sup_norm() const { return sup_norm_interior(0); }

double GridFunction::sup_norm_interior(int margin) const {
    double s = 0.0;
    for (std::size_t i = 0; i < lattice_.size(); ++i)
        if (margin == 0 || lattice_.interior(i, margin)) s = std::max(s, value_norm(i));
    return s;
}

double GridFunction::max_standard_error() const {
    double s = 0.0;
    for (double v : se_) s = std::max(s, v);
    return s;
}

Blob GridFunction::to_blob() const {
    Blob b;
    b.meta = {{"type", "GridFunction"},
              {"lattice", lattice_.to_json()},
              {"rows", rows_},
              {"cols", cols_},
              {"provenance", provenance_.to_json()}};
    b.add("values", values_);
    b.add("standard_error", se_);
    return b;
}

GridFunction GridFunction::from_blob(const Blob& b) {
    if (b.meta.value("type", "") != "GridFunction") throw DomainError("blob does not hold a GridFunction");
    GridFunction g(Lattice::from_json(b.meta.at("lattice")), b.meta.at("rows").get<int>(), b.meta.at("cols").get<int>());
    g.values_ = b.column("values");
    if (g.values_.size() != g.lattice_.size() * static_cast<std::size_t>(g.components()))
        throw DomainError("GridFunction blob has the wrong number of values");
    g.se_ = b.column("standard_error");
    g.provenance_ = Provenance::from_json(b.meta.at("provenance"));
    return g;
}

double estimate_holder_seminorm(const GridFunction& g, double theta, int margin) {
    if (!(theta > 0.0 && theta <= 1.0)) throw DomainError("theta must lie in (0,1]");
    const Lattice& lat = g.lattice();
    if (lat.nodes < 2) throw DomainError("need at least two nodes per axis");
    const int nc = g.components();
    const double h = lat.spacing();
    const double min_sep = 2.0 * h * (1.0 - 1e-12);
    std::vector<double> diff(static_cast<std::size_t>(nc));
    double best = 0.0;
    auto consider = [&](std::size_t a, std::size_t b) {
        const Vec xa = lat.node(a), xb = lat.node(b);
        const double dist = (xa - xb).norm();
        if (dist < min_sep) return;
        for (int c = 0; c < nc; ++c) diff[static_cast<std::size_t>(c)] = g.at(a, c) - g.at(b, c);
        const double num = matrix_norm(diff.data(), g.rows(), g.cols());
        best = std::max(best, num / std::pow(dist, theta));
    };
    std::vector<int> offsets;
    for (double o = 2.0; o <= lat.nodes - 1; o *= 1.5) {
        const int oi = static_cast<int>(std::round(o));
        if (offsets.empty() || offsets.back() != oi) offsets.push_back(oi);
    }
    const int lo = margin, hi = lat.nodes - 1 - margin;
    for (std::size_t a = 0; a < lat.size(); ++a) {
        if (!lat.interior(a, margin)) continue;
        const auto idx = lat.index(a);
        for (int k = 0; k < lat.dim; ++k) {
            for (int o : offsets) {
                auto jdx = idx;
                jdx[static_cast<std::size_t>(k)] += o;
                if (jdx[static_cast<std::size_t>(k)] > hi) break;
                consider(a, lat.flat(jdx));
            }
        }
    }
    RandomStream rng(kPairSeed);
    const int span = hi - lo + 1;
    if (span >= 1) {
        for (int p = 0; p < kRandomPairs; ++p) {
            std::array<int, 3> ia{0, 0, 0}, ib{0, 0, 0};
            for (int k = 0; k < lat.dim; ++k) {
                ia[static_cast<std::size_t>(k)] = lo + static_cast<int>(rng.uniform() * span);
                ib[static_cast<std::size_t>(k)] = lo + static_cast<int>(rng.uniform() * span);
            }
            consider(lat.flat(ia), lat.flat(ib));
        }
    }
    return best;
}

GridFunction lattice_gradient(const GridFunction& g) {
    if (g.cols() != 1) throw DomainError("lattice_gradient expects a scalar or vector field");
    const Lattice& lat = g.lattice();
    const int d = lat.dim;
    const int m = g.rows();
    GridFunction out(lat, m, d);
    const double h = lat.spacing();
    for (std::size_t f = 0; f < lat.size(); ++f) {
        const auto idx = lat.index(f);
        for (int k = 0; k < d; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            auto ip = idx, im = idx;
            double width = 2.0 * h;
            if (idx[kk] == 0) {
                ip[kk] += 1;
                width = h;
            } else if (idx[kk] == lat.nodes - 1) {
                im[kk] -= 1;
                width = h;
            } else {
                ip[kk] += 1;
                im[kk] -= 1;
            }
            const std::size_t fp = lat.flat(ip), fm = lat.flat(im);
            for (int r = 0; r < m; ++r) out.at(f, r * d + k) = (g.at(fp, r) - g.at(fm, r)) / width;
        }
    }
    out.provenance().producer = "lattice_gradient";
    return out;
}

}  // namespace levyflow
