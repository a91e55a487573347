#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mpsh/cones.hpp"
#include "mpsh/fm_operator.hpp"
#include "mpsh/hermitian.hpp"

namespace mpsh {

enum class DomainKind : std::uint32_t { Ball = 0, Torus = 1 };

enum class NodeTag : std::uint8_t { Interior = 0, Boundary = 1, Exterior = 2 };

/// Uniform grid over the coordinate ball |z| < r in C^n ≅ R^{2n} (nodes span
/// the cube [−r, r]^{2n}) or over the flat torus (R/Z)^{2n}. Real coordinates
/// are ordered x_1, y_1, ..., x_n, y_n.
///
/// Ball tagging: a node is Interior when |z|² < r²(1 − 1e-12) (ties go to the
/// boundary), Boundary when it is not interior but belongs to the axis or
/// cross stencil of an interior node, Exterior otherwise. Every interior node
/// has its full stencil inside the grid.
class GridDomain {
public:
    GridDomain() = default;

    static GridDomain ball(int n, int points_per_axis, double radius = 1.0) {
        require(n >= 1 && n <= 4, "GridDomain: complex dimension must be in [1, 4]");
        require(points_per_axis >= 5 && points_per_axis % 2 == 1, "GridDomain: points_per_axis must be odd and >= 5");
        require(radius > 0.0, "GridDomain: radius must be positive");
        GridDomain d;
        d.n_ = n;
        d.kind_ = DomainKind::Ball;
        d.points_ = points_per_axis;
        d.radius_ = radius;
        d.h_ = 2.0 * radius / static_cast<double>(points_per_axis - 1);
        d.init();
        return d;
    }

    static GridDomain torus(int n, int points_per_axis) {
        require(n >= 1 && n <= 4, "GridDomain: complex dimension must be in [1, 4]");
        require(points_per_axis >= 5 && points_per_axis % 2 == 1, "GridDomain: points_per_axis must be odd and >= 5");
        GridDomain d;
        d.n_ = n;
        d.kind_ = DomainKind::Torus;
        d.points_ = points_per_axis;
        d.radius_ = 0.0;
        d.h_ = 1.0 / static_cast<double>(points_per_axis);
        d.init();
        return d;
    }

    int n() const { return n_; }
    int real_dim() const { return 2 * n_; }
    DomainKind kind() const { return kind_; }
    bool is_torus() const { return kind_ == DomainKind::Torus; }
    int points_per_axis() const { return points_; }
    double spacing() const { return h_; }
    double radius() const { return radius_; }
    std::size_t size() const { return size_; }
    NodeTag tag(std::size_t node) const { return tables_->tags[node]; }
    const std::vector<std::size_t>& interior_nodes() const { return tables_->interior; }
    const std::vector<std::size_t>& boundary_nodes() const { return tables_->boundary; }

    std::vector<int> multi_index(std::size_t node) const {
        std::vector<int> idx(static_cast<std::size_t>(real_dim()));
        for (int a = 0; a < real_dim(); ++a) {
            idx[static_cast<std::size_t>(a)] = static_cast<int>(node % static_cast<std::size_t>(points_));
            node /= static_cast<std::size_t>(points_);
        }
        return idx;
    }

    std::size_t node_of(const std::vector<int>& idx) const {
        std::size_t node = 0;
        for (int a = real_dim() - 1; a >= 0; --a) node = node * static_cast<std::size_t>(points_) + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
        return node;
    }

    double coordinate(int axis_index) const {
        return is_torus() ? axis_index * h_ : -radius_ + axis_index * h_;
    }

    /// Real coordinates (x_1, y_1, ..., x_n, y_n) of a node.
    std::vector<double> coordinates(std::size_t node) const {
        std::vector<double> x(static_cast<std::size_t>(real_dim()));
        for (int a = 0; a < real_dim(); ++a) {
            x[static_cast<std::size_t>(a)] = coordinate(static_cast<int>(node % static_cast<std::size_t>(points_)));
            node /= static_cast<std::size_t>(points_);
        }
        return x;
    }

    double norm2(std::size_t node) const {
        double s = 0.0;
        for (double v : coordinates(node)) s += v * v;
        return s;
    }

    /// Neighbour at integer offset along real axes, wrapping on the torus;
    /// nullopt when it leaves a ball grid.
    std::optional<std::size_t> shift(std::size_t node, int axis, int delta) const {
        const std::size_t stride = tables_->strides[static_cast<std::size_t>(axis)];
        const int i = static_cast<int>((node / stride) % static_cast<std::size_t>(points_));
        int j = i + delta;
        if (is_torus()) {
            j = ((j % points_) + points_) % points_;
        } else if (j < 0 || j >= points_) {
            return std::nullopt;
        }
        return node + static_cast<std::size_t>(j) * stride - static_cast<std::size_t>(i) * stride;
    }

    bool operator==(const GridDomain& o) const {
        return n_ == o.n_ && kind_ == o.kind_ && points_ == o.points_ && h_ == o.h_ && radius_ == o.radius_;
    }
    bool operator!=(const GridDomain& o) const { return !(*this == o); }

private:
    void init() {
        auto t = std::make_shared<Tables>();
        size_ = 1;
        t->strides.assign(static_cast<std::size_t>(real_dim()), 0);
        for (int a = 0; a < real_dim(); ++a) {
            t->strides[static_cast<std::size_t>(a)] = size_;
            size_ *= static_cast<std::size_t>(points_);
        }
        tables_ = t;
        if (is_torus()) {
            t->tags.assign(size_, NodeTag::Interior);
            t->interior.resize(size_);
            for (std::size_t i = 0; i < size_; ++i) t->interior[i] = i;
            return;
        }
        t->tags.assign(size_, NodeTag::Exterior);
        const double r2 = radius_ * radius_ * (1.0 - 1e-12);
        for (std::size_t i = 0; i < size_; ++i)
            if (norm2(i) < r2) t->tags[i] = NodeTag::Interior;
        for (std::size_t i = 0; i < size_; ++i) {
            if (t->tags[i] != NodeTag::Interior) continue;
            t->interior.push_back(i);
            for_each_stencil_neighbor(i, [&](std::size_t j) {
                if (t->tags[j] == NodeTag::Exterior) t->tags[j] = NodeTag::Boundary;
            });
        }
        for (std::size_t i = 0; i < size_; ++i)
            if (t->tags[i] == NodeTag::Boundary) t->boundary.push_back(i);
    }

    template <class Fn>
    void for_each_stencil_neighbor(std::size_t node, Fn&& fn) const {
        const int d = real_dim();
        for (int a = 0; a < d; ++a)
            for (int s : {-1, 1}) {
                auto j = shift(node, a, s);
                if (!j) continue;
                fn(*j);
                for (int b = a + 1; b < d; ++b)
                    for (int t : {-1, 1})
                        if (auto k = shift(*j, b, t)) fn(*k);
            }
    }

    int n_ = 1;
    DomainKind kind_ = DomainKind::Ball;
    int points_ = 5;
    double h_ = 0.5;
    double radius_ = 1.0;
    std::size_t size_ = 0;

    // Shared between copies; grids are immutable after construction.
    struct Tables {
        std::vector<std::size_t> strides;
        std::vector<NodeTag> tags;
        std::vector<std::size_t> interior;
        std::vector<std::size_t> boundary;
    };
    std::shared_ptr<const Tables> tables_;
};

/// Real scalar field sampled at every node of a grid (exterior ball nodes
/// carry values too but are never read by stencils).
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(GridDomain domain, double fill = 0.0) : domain_(std::move(domain)), values_(domain_.size(), fill) {}
    GridFunction(GridDomain domain, std::vector<double> values) : domain_(std::move(domain)), values_(std::move(values)) {
        require(values_.size() == domain_.size(), "GridFunction: value count does not match the grid");
    }

    /// Samples f(x) with x = (x_1, y_1, ..., x_n, y_n).
    static GridFunction sample(const GridDomain& domain, const std::function<double(const std::vector<double>&)>& f) {
        GridFunction g(domain);
        for (std::size_t i = 0; i < domain.size(); ++i) g.values_[i] = f(domain.coordinates(i));
        return g;
    }

    const GridDomain& domain() const { return domain_; }
    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    /// True when every interior and boundary value is finite.
    bool finite_on_domain() const {
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (domain_.tag(i) != NodeTag::Exterior && !std::isfinite(values_[i])) return false;
        return true;
    }

private:
    GridDomain domain_;
    std::vector<double> values_;
};

/// Hermitian metric sampled on a grid: either one shared matrix or one per node.
class MetricField {
public:
    MetricField() = default;
    MetricField(GridDomain domain, MetricMatrix constant)
        : domain_(std::move(domain)), constant_(std::move(constant)) {
        require(constant_->dim() == domain_.n(), "MetricField: metric dimension does not match the grid");
    }
    MetricField(GridDomain domain, std::vector<MetricMatrix> per_node)
        : domain_(std::move(domain)), per_node_(std::move(per_node)) {
        require(per_node_.size() == domain_.size(), "MetricField: need one metric per node");
        for (const auto& g : per_node_) require(g.dim() == domain_.n(), "MetricField: metric dimension mismatch");
    }

    static MetricField flat(const GridDomain& domain) { return MetricField(domain, MetricMatrix::identity(domain.n())); }

    const GridDomain& domain() const { return domain_; }
    bool is_constant() const { return constant_.has_value(); }
    const MetricMatrix& at(std::size_t node) const { return constant_ ? *constant_ : per_node_[node]; }

private:
    GridDomain domain_;
    std::optional<MetricMatrix> constant_;
    std::vector<MetricMatrix> per_node_;
};

/// Second-order central-difference real Hessian at a node: axis second
/// differences and the four-point cross stencil for mixed derivatives.
inline RMatrix fd_real_hessian(const GridFunction& u, std::size_t node) {
    const GridDomain& d = u.domain();
    if (!d.is_torus() && d.tag(node) != NodeTag::Interior)
        fail(ErrorKind::InvalidArgument, "fd_complex_hessian: node is not interior, stencil leaves the domain");
    const int dim = d.real_dim();
    const double h2 = d.spacing() * d.spacing();
    const double c = u[node];
    RMatrix hess(dim, dim);
    for (int a = 0; a < dim; ++a) {
        const std::size_t ap = *d.shift(node, a, 1);
        const std::size_t am = *d.shift(node, a, -1);
        hess(a, a) = (u[ap] - 2.0 * c + u[am]) / h2;
        for (int b = a + 1; b < dim; ++b) {
            const double pp = u[*d.shift(ap, b, 1)];
            const double pm = u[*d.shift(ap, b, -1)];
            const double mp = u[*d.shift(am, b, 1)];
            const double mm = u[*d.shift(am, b, -1)];
            hess(a, b) = hess(b, a) = (pp - pm - mp + mm) / (4.0 * h2);
        }
    }
    return hess;
}

inline HermitianMatrix fd_complex_hessian(const GridFunction& u, std::size_t node) {
    return complex_hessian_point(fd_real_hessian(u, node));
}

/// Per-node F_m of the discrete form (χ +) i∂∂̄u against g. Nodes where the
/// form leaves the closed cone carry their signed margin in `value` and are
/// flagged with in_cone = 0. Non-interior ball nodes are not evaluated.
struct FmField {
    GridFunction value;
    std::vector<double> margin;
    std::vector<char> in_cone;
    std::vector<char> evaluated;
};

struct ConeField {
    std::vector<ConeVerdict> verdicts;   // empty verdict at unevaluated nodes
    std::vector<char> evaluated;
    double min_margin = std::numeric_limits<double>::infinity();
    bool all_members = true;
};

inline FmField fm_field(const GridFunction& u, const MetricField& g, int m,
                        const std::optional<HermitianMatrix>& chi = std::nullopt) {
    const GridDomain& d = u.domain();
    require(g.domain() == d, "fm_field: metric field lives on a different grid");
    require(m >= 1 && m <= d.n(), "fm_field: need 1 <= m <= n");
    FmField out{GridFunction(d, 0.0), std::vector<double>(d.size(), 0.0), std::vector<char>(d.size(), 0),
                std::vector<char>(d.size(), 0)};
    for (std::size_t node : d.interior_nodes()) {
        HermitianMatrix form = fd_complex_hessian(u, node);
        if (chi) form = *chi + form;
        const auto lambdas = relative_eigenvalues_only(form, g.at(node));
        const double margin = smallest_m_sum(lambdas, m);
        out.evaluated[node] = 1;
        out.margin[node] = margin;
        if (margin >= -kConeTolerance) {
            out.in_cone[node] = 1;
            out.value[node] = fm_value_from_spectrum(lambdas, m).value;
        } else {
            out.value[node] = margin;
        }
    }
    return out;
}

inline ConeField cone_field(const GridFunction& u, const MetricField& g, int m,
                            const std::optional<HermitianMatrix>& chi = std::nullopt,
                            double tolerance = kConeTolerance) {
    const GridDomain& d = u.domain();
    require(g.domain() == d, "cone_field: metric field lives on a different grid");
    require(m >= 1 && m <= d.n(), "cone_field: need 1 <= m <= n");
    ConeField out;
    out.verdicts.resize(d.size());
    out.evaluated.assign(d.size(), 0);
    for (std::size_t node : d.interior_nodes()) {
        HermitianMatrix form = fd_complex_hessian(u, node);
        if (chi) form = *chi + form;
        out.verdicts[node] = is_m_semipositive(form, g.at(node), m, tolerance);
        out.evaluated[node] = 1;
        out.min_margin = std::min(out.min_margin, out.verdicts[node].margin);
        out.all_members = out.all_members && out.verdicts[node].member;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

/// CSV: one row per non-exterior node, columns x1,y1,...,xn,yn,tag,value.
inline void write_csv(std::ostream& os, const GridFunction& u) {
    const GridDomain& d = u.domain();
    for (int j = 1; j <= d.n(); ++j) os << "x" << j << ",y" << j << ",";
    os << "tag,value\n";
    char buf[64];
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.tag(i) == NodeTag::Exterior) continue;
        for (double x : d.coordinates(i)) {
            std::snprintf(buf, sizeof buf, "%.17g,", x);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, "%d,%.17g\n", static_cast<int>(d.tag(i)), u[i]);
        os << buf;
    }
}

inline constexpr std::array<char, 4> kGridMagic{'M', 'P', 'S', 'G'};
inline constexpr std::uint32_t kGridFormatVersion = 1;

namespace detail {
template <class T>
void put_le(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}
template <class T>
T get_le(std::istream& is) {
    unsigned char bytes[sizeof(T)];
    is.read(reinterpret_cast<char*>(bytes), sizeof(T));
    if (!is) fail(ErrorKind::Parse, "grid dump: truncated input");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
}
} // namespace detail

/// Binary dump: magic "MPSG", u32 version, u32 n, u32 kind, u32 points,
/// f64 spacing, f64 radius, u64 count, then `count` little-endian doubles in
/// node order (first real axis fastest).
inline void write_binary(std::ostream& os, const GridFunction& u) {
    const GridDomain& d = u.domain();
    os.write(kGridMagic.data(), 4);
    detail::put_le<std::uint32_t>(os, kGridFormatVersion);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(d.n()));
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(d.kind()));
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(d.points_per_axis()));
    detail::put_le<double>(os, d.spacing());
    detail::put_le<double>(os, d.radius());
    detail::put_le<std::uint64_t>(os, static_cast<std::uint64_t>(u.size()));
    for (double v : u.values()) detail::put_le<double>(os, v);
}

inline GridFunction read_binary(std::istream& is) {
    std::array<char, 4> magic{};
    is.read(magic.data(), 4);
    if (!is || magic != kGridMagic) fail(ErrorKind::Parse, "grid dump: bad magic");
    const auto version = detail::get_le<std::uint32_t>(is);
    if (version != kGridFormatVersion) fail(ErrorKind::Parse, "grid dump: unsupported version " + std::to_string(version));
    const auto n = static_cast<int>(detail::get_le<std::uint32_t>(is));
    const auto kind = static_cast<DomainKind>(detail::get_le<std::uint32_t>(is));
    const auto points = static_cast<int>(detail::get_le<std::uint32_t>(is));
    detail::get_le<double>(is);  // spacing is implied by points and radius
    const double radius = detail::get_le<double>(is);
    const auto count = detail::get_le<std::uint64_t>(is);
    GridDomain d = kind == DomainKind::Torus ? GridDomain::torus(n, points) : GridDomain::ball(n, points, radius);
    if (count != d.size()) fail(ErrorKind::Parse, "grid dump: node count does not match the header");
    std::vector<double> values(count);
    for (auto& v : values) v = detail::get_le<double>(is);
    return GridFunction(d, std::move(values));
}

} // namespace mpsh
