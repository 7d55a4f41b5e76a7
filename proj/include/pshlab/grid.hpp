#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pshlab/extended_real.hpp"

namespace pshlab {

enum class DomainKind { Disc1D, PuncturedDisc1D, Ball2C, Bidisc2C, ToricLog2D };

enum class NodeClass : std::uint8_t { Interior, Boundary, Excluded };

inline const char* to_string(DomainKind k) {
    switch (k) {
        case DomainKind::Disc1D: return "Disc1D";
        case DomainKind::PuncturedDisc1D: return "PuncturedDisc1D";
        case DomainKind::Ball2C: return "Ball2C";
        case DomainKind::Bidisc2C: return "Bidisc2C";
        case DomainKind::ToricLog2D: return "ToricLog2D";
    }
    return "?";
}

inline DomainKind domain_kind_from_string(const std::string& s) {
    if (s == "Disc1D") return DomainKind::Disc1D;
    if (s == "PuncturedDisc1D") return DomainKind::PuncturedDisc1D;
    if (s == "Ball2C") return DomainKind::Ball2C;
    if (s == "Bidisc2C") return DomainKind::Bidisc2C;
    if (s == "ToricLog2D") return DomainKind::ToricLog2D;
    throw std::invalid_argument("unknown domain kind: " + s);
}

// Node-mask descriptor. Masks stand in for the small exceptional sets the
// formulas blow up on (a point, a coordinate slice, a boundary circle).
struct MaskSpec {
    enum class Kind { None, Origin, SliceZ, SliceW, BoundaryCircleZ0, NearPoint };
    Kind kind = Kind::None;
    std::array<double, 4> point{0, 0, 0, 0};  // for NearPoint
    int dilate_cells = 0;                     // extra cells marked around the core set

    static MaskSpec none() { return {}; }
    static MaskSpec origin() { return {Kind::Origin, {0, 0, 0, 0}, 0}; }
    static MaskSpec slice_z() { return {Kind::SliceZ, {0, 0, 0, 0}, 0}; }
    static MaskSpec slice_w() { return {Kind::SliceW, {0, 0, 0, 0}, 0}; }
    static MaskSpec boundary_circle_z0() { return {Kind::BoundaryCircleZ0, {0, 0, 0, 0}, 0}; }
    static MaskSpec near_point(std::array<double, 4> p, int dilate) {
        return {Kind::NearPoint, p, dilate};
    }
};

struct GridDomain {
    DomainKind kind = DomainKind::Disc1D;
    int resolution = 0;   // nodes per axis
    int dim = 2;          // real dimensions (2 for one complex variable, 4 for two)
    double spacing = 0.0;
    double lo = -1.0;     // lattice lower corner, identical per axis
    double truncation_depth = 0.0;  // ToricLog2D only
    int stencil_reach = 2;          // max stencil extent in cells (inf-norm)

    std::array<int, 4> shape{1, 1, 1, 1};
    std::array<std::ptrdiff_t, 4> stride{0, 0, 0, 0};
    std::size_t lattice_size = 0;

    std::vector<NodeClass> node_class;  // per lattice node
    std::vector<std::uint8_t> masked;   // per lattice node, 1 if in singular mask
    std::vector<std::uint32_t> mask_nodes;
    std::vector<std::uint32_t> interior_nodes;
    std::vector<std::uint32_t> boundary_nodes;

    std::size_t flat(const std::array<int, 4>& idx) const {
        std::size_t f = 0;
        for (int d = 0; d < dim; ++d) f += static_cast<std::size_t>(idx[d]) * stride[d];
        return f;
    }
    std::array<int, 4> multi(std::size_t f) const {
        std::array<int, 4> idx{0, 0, 0, 0};
        for (int d = dim - 1; d >= 0; --d) {
            idx[d] = static_cast<int>(f / stride[d]);
            f -= static_cast<std::size_t>(idx[d]) * stride[d];
        }
        return idx;
    }
    std::array<double, 4> coords(std::size_t f) const {
        auto idx = multi(f);
        std::array<double, 4> x{0, 0, 0, 0};
        for (int d = 0; d < dim; ++d) x[d] = lo + spacing * idx[d];
        return x;
    }
    bool in_lattice(const std::array<int, 4>& idx) const {
        for (int d = 0; d < dim; ++d)
            if (idx[d] < 0 || idx[d] >= shape[d]) return false;
        return true;
    }
    bool is_in_domain(std::size_t f) const { return node_class[f] != NodeClass::Excluded; }
    bool is_interior(std::size_t f) const { return node_class[f] == NodeClass::Interior; }
    bool is_masked(std::size_t f) const { return masked[f] != 0; }

    std::size_t in_domain_count() const { return interior_nodes.size() + boundary_nodes.size(); }

    // Interior nodes at graph distance > `dilate` cells (inf-norm) from every
    // masked node. This is the region reports and verdicts are measured on.
    std::vector<std::uint32_t> test_region(int dilate = 2) const;

    std::string descriptor() const;  // key = value text form
};

namespace detail {

inline bool point_in_domain(DomainKind kind, const std::array<double, 4>& x) {
    constexpr double eps = 1e-12;
    switch (kind) {
        case DomainKind::Disc1D:
        case DomainKind::PuncturedDisc1D:
            return x[0] * x[0] + x[1] * x[1] <= 1.0 + eps;
        case DomainKind::Ball2C:
            return x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3] <= 1.0 + eps;
        case DomainKind::Bidisc2C:
            return x[0] * x[0] + x[1] * x[1] <= 1.0 + eps &&
                   x[2] * x[2] + x[3] * x[3] <= 1.0 + eps;
        case DomainKind::ToricLog2D:
            return std::exp(2.0 * x[0]) + std::exp(2.0 * x[1]) <= 1.0 + eps;
    }
    return false;
}

}  // namespace detail

inline constexpr double kToricDepthDefault = 8.0;

// Radius-h rings only. Wider rings carry an r^4-times larger quartic sampling
// error, which measurably drags envelopes and majorants of steep data at desk
// resolutions; the radius-1 cone keeps every route consistent and widens the
// classified interior.
inline int default_stencil_reach(DomainKind, int) { return 1; }

inline GridDomain make_domain(DomainKind kind, int resolution,
                              const MaskSpec& mask = MaskSpec::none(),
                              double toric_depth = kToricDepthDefault) {
    if (resolution < 5) throw std::invalid_argument("resolution must be >= 5");
    if (resolution % 2 == 0) throw std::invalid_argument("resolution must be odd");

    GridDomain dom;
    dom.kind = kind;
    dom.resolution = resolution;
    dom.dim = (kind == DomainKind::Ball2C || kind == DomainKind::Bidisc2C) ? 4 : 2;
    if (kind == DomainKind::ToricLog2D) {
        if (toric_depth <= 0.0) throw std::invalid_argument("toric depth must be positive");
        dom.truncation_depth = toric_depth;
        dom.lo = -toric_depth;
        dom.spacing = toric_depth / (resolution - 1);
    } else {
        dom.lo = -1.0;
        dom.spacing = 2.0 / (resolution - 1);
    }
    dom.stencil_reach = default_stencil_reach(kind, resolution);

    dom.lattice_size = 1;
    for (int d = 0; d < dom.dim; ++d) {
        dom.shape[d] = resolution;
        dom.stride[d] = static_cast<std::ptrdiff_t>(dom.lattice_size);
        dom.lattice_size *= resolution;
    }

    std::vector<std::uint8_t> inside(dom.lattice_size, 0);
    for (std::size_t f = 0; f < dom.lattice_size; ++f)
        inside[f] = detail::point_in_domain(kind, dom.coords(f)) ? 1 : 0;

    dom.node_class.assign(dom.lattice_size, NodeClass::Excluded);
    const int reach = dom.stencil_reach;
    for (std::size_t f = 0; f < dom.lattice_size; ++f) {
        if (!inside[f]) continue;
        auto idx = dom.multi(f);
        bool interior = true;
        // box neighborhood covering every interpolation corner of the stencil
        std::array<int, 4> q = idx;
        for (int d0 = -reach; d0 <= reach && interior; ++d0)
            for (int d1 = -reach; d1 <= reach && interior; ++d1) {
                if (dom.dim == 2) {
                    q = {idx[0] + d0, idx[1] + d1, 0, 0};
                    if (!dom.in_lattice(q) || !inside[dom.flat(q)]) interior = false;
                } else {
                    for (int d2 = -reach; d2 <= reach && interior; ++d2)
                        for (int d3 = -reach; d3 <= reach && interior; ++d3) {
                            q = {idx[0] + d0, idx[1] + d1, idx[2] + d2, idx[3] + d3};
                            if (!dom.in_lattice(q) || !inside[dom.flat(q)]) interior = false;
                        }
                }
            }
        dom.node_class[f] = interior ? NodeClass::Interior : NodeClass::Boundary;
    }

    for (std::size_t f = 0; f < dom.lattice_size; ++f) {
        if (dom.node_class[f] == NodeClass::Interior) dom.interior_nodes.push_back(static_cast<std::uint32_t>(f));
        else if (dom.node_class[f] == NodeClass::Boundary) dom.boundary_nodes.push_back(static_cast<std::uint32_t>(f));
    }

    // singular mask
    dom.masked.assign(dom.lattice_size, 0);
    MaskSpec spec = mask;
    if (kind == DomainKind::PuncturedDisc1D && spec.kind == MaskSpec::Kind::None)
        spec = MaskSpec::origin();
    auto mark = [&](std::size_t f) {
        if (dom.node_class[f] == NodeClass::Excluded)
            throw std::invalid_argument("mask node outside the domain lattice");
        if (!dom.masked[f]) {
            dom.masked[f] = 1;
            dom.mask_nodes.push_back(static_cast<std::uint32_t>(f));
        }
    };
    const double h = dom.spacing;
    switch (spec.kind) {
        case MaskSpec::Kind::None: break;
        case MaskSpec::Kind::Origin: {
            std::array<int, 4> c{};
            for (int d = 0; d < dom.dim; ++d) c[d] = (resolution - 1) / 2;
            mark(dom.flat(c));
            break;
        }
        case MaskSpec::Kind::SliceZ:
        case MaskSpec::Kind::SliceW: {
            if (dom.dim != 4) throw std::invalid_argument("slice masks need a two-complex-variable domain");
            for (std::size_t f = 0; f < dom.lattice_size; ++f) {
                if (dom.node_class[f] == NodeClass::Excluded) continue;
                auto x = dom.coords(f);
                double r2 = spec.kind == MaskSpec::Kind::SliceZ ? x[0] * x[0] + x[1] * x[1]
                                                                : x[2] * x[2] + x[3] * x[3];
                if (r2 < 1e-18) mark(f);
            }
            break;
        }
        case MaskSpec::Kind::BoundaryCircleZ0: {
            if (dom.dim != 4) throw std::invalid_argument("circle mask needs Ball2C");
            for (std::size_t f = 0; f < dom.lattice_size; ++f) {
                if (dom.node_class[f] == NodeClass::Excluded) continue;
                auto x = dom.coords(f);
                double rz2 = x[0] * x[0] + x[1] * x[1];
                double rw = std::sqrt(x[2] * x[2] + x[3] * x[3]);
                if (rz2 < 1e-18 && rw >= 1.0 - 1.5 * h) mark(f);
            }
            break;
        }
        case MaskSpec::Kind::NearPoint: {
            for (std::size_t f = 0; f < dom.lattice_size; ++f) {
                if (dom.node_class[f] == NodeClass::Excluded) continue;
                auto x = dom.coords(f);
                double d2 = 0;
                for (int d = 0; d < dom.dim; ++d) d2 += (x[d] - spec.point[d]) * (x[d] - spec.point[d]);
                if (d2 <= (0.5 * h) * (0.5 * h)) mark(f);
            }
            break;
        }
    }
    if (spec.dilate_cells > 0 && !dom.mask_nodes.empty()) {
        std::vector<std::uint32_t> core = dom.mask_nodes;
        int r = spec.dilate_cells;
        for (auto f : core) {
            auto idx = dom.multi(f);
            std::array<int, 4> q = idx;
            for (int d0 = -r; d0 <= r; ++d0)
                for (int d1 = -r; d1 <= r; ++d1) {
                    if (dom.dim == 2) {
                        q = {idx[0] + d0, idx[1] + d1, 0, 0};
                        if (dom.in_lattice(q) && dom.node_class[dom.flat(q)] != NodeClass::Excluded)
                            mark(dom.flat(q));
                    } else {
                        for (int d2 = -r; d2 <= r; ++d2)
                            for (int d3 = -r; d3 <= r; ++d3) {
                                q = {idx[0] + d0, idx[1] + d1, idx[2] + d2, idx[3] + d3};
                                if (dom.in_lattice(q) && dom.node_class[dom.flat(q)] != NodeClass::Excluded)
                                    mark(dom.flat(q));
                            }
                    }
                }
        }
    }
    return dom;
}

inline std::vector<std::uint32_t> GridDomain::test_region(int dilate) const {
    std::vector<std::uint32_t> out;
    out.reserve(interior_nodes.size());
    for (auto f : interior_nodes) {
        bool near_mask = false;
        auto idx = multi(f);
        std::array<int, 4> q = idx;
        for (int d0 = -dilate; d0 <= dilate && !near_mask; ++d0)
            for (int d1 = -dilate; d1 <= dilate && !near_mask; ++d1) {
                if (dim == 2) {
                    q = {idx[0] + d0, idx[1] + d1, 0, 0};
                    if (in_lattice(q) && masked[flat(q)]) near_mask = true;
                } else {
                    for (int d2 = -dilate; d2 <= dilate && !near_mask; ++d2)
                        for (int d3 = -dilate; d3 <= dilate && !near_mask; ++d3) {
                            q = {idx[0] + d0, idx[1] + d1, idx[2] + d2, idx[3] + d3};
                            if (in_lattice(q) && masked[flat(q)]) near_mask = true;
                        }
                }
            }
        if (!near_mask) out.push_back(f);
    }
    return out;
}

inline std::string GridDomain::descriptor() const {
    std::string s;
    s += "kind = " + std::string(to_string(kind)) + "\n";
    s += "resolution = " + std::to_string(resolution) + "\n";
    s += "spacing = " + std::to_string(spacing) + "\n";
    s += "dim = " + std::to_string(dim) + "\n";
    if (kind == DomainKind::ToricLog2D)
        s += "truncation_depth = " + std::to_string(truncation_depth) + "\n";
    s += "mask_count = " + std::to_string(mask_nodes.size()) + "\n";
    return s;
}

}  // namespace pshlab
