#pragma once

#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "pshlab/extended_real.hpp"
#include "pshlab/grid.hpp"

namespace pshlab {

enum class RegularizeMode { LSC, USC };

// Extended-real table over the lattice of a GridDomain. Values on Excluded
// nodes are kept at 0 and never read by any sweep.
struct GridFunction {
    std::shared_ptr<const GridDomain> domain;
    std::vector<double> values;
    double cap = kValueCap;

    GridFunction() = default;
    explicit GridFunction(std::shared_ptr<const GridDomain> dom, double init = 0.0)
        : domain(std::move(dom)), values(domain->lattice_size, init) {}

    double operator[](std::size_t f) const { return values[f]; }
    double& operator[](std::size_t f) { return values[f]; }

    double sup_on(const std::vector<std::uint32_t>& nodes) const {
        double m = neg_inf();
        for (auto f : nodes) m = std::max(m, values[f]);
        return m;
    }
    double inf_on(const std::vector<std::uint32_t>& nodes) const {
        double m = pos_inf();
        for (auto f : nodes) m = std::min(m, values[f]);
        return m;
    }
    bool all_nonnegative_on(const std::vector<std::uint32_t>& nodes) const {
        for (auto f : nodes)
            if (values[f] < 0.0) return false;
        return true;
    }
};

template <typename F>
GridFunction evaluate(const std::shared_ptr<const GridDomain>& dom, F&& fn) {
    GridFunction g(dom);
    for (std::size_t f = 0; f < dom->lattice_size; ++f) {
        if (dom->node_class[f] == NodeClass::Excluded) continue;
        g.values[f] = saturate(fn(dom->coords(f)));
    }
    return g;
}

// Pointwise min/max over the node and its axis neighbors. Discrete surrogate
// for the semicontinuous regularizations; exact only in the resolution limit.
inline GridFunction regularize(const GridFunction& g, RegularizeMode mode) {
    const auto& dom = *g.domain;
    GridFunction out = g;
    for (std::size_t f = 0; f < dom.lattice_size; ++f) {
        if (dom.node_class[f] == NodeClass::Excluded) continue;
        auto idx = dom.multi(f);
        double v = g.values[f];
        for (int d = 0; d < dom.dim; ++d) {
            for (int s = -1; s <= 1; s += 2) {
                auto q = idx;
                q[d] += s;
                if (!dom.in_lattice(q)) continue;
                std::size_t fq = dom.flat(q);
                if (dom.node_class[fq] == NodeClass::Excluded) continue;
                v = mode == RegularizeMode::LSC ? std::min(v, g.values[fq])
                                                : std::max(v, g.values[fq]);
            }
        }
        out.values[f] = v;
    }
    return out;
}

// Multi-linear interpolation at an arbitrary point. Returns +inf when the
// surrounding cell touches a node outside the domain (value unavailable).
inline double interpolate(const GridFunction& g, const std::array<double, 4>& x) {
    const auto& dom = *g.domain;
    std::array<int, 4> base{0, 0, 0, 0};
    std::array<double, 4> frac{0, 0, 0, 0};
    for (int d = 0; d < dom.dim; ++d) {
        double t = (x[d] - dom.lo) / dom.spacing;
        int b = static_cast<int>(std::floor(t));
        if (b < 0 || b >= dom.shape[d] - 1) {
            if (b == dom.shape[d] - 1 && std::abs(t - b) < 1e-9) b -= 1;  // exact top edge
            else if (b < 0 && t > -1e-9) b = 0;
            else if (b >= dom.shape[d] - 1) return pos_inf();
            if (b < 0) return pos_inf();
        }
        base[d] = b;
        frac[d] = t - b;
    }
    double acc = 0.0;
    int corners = 1 << dom.dim;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        auto idx = base;
        for (int d = 0; d < dom.dim; ++d) {
            if (c & (1 << d)) {
                idx[d] += 1;
                w *= frac[d];
            } else {
                w *= 1.0 - frac[d];
            }
        }
        if (w == 0.0) continue;
        std::size_t f = dom.flat(idx);
        if (dom.node_class[f] == NodeClass::Excluded) return pos_inf();
        acc += w * g.values[f];
    }
    return acc;
}

inline void dump_csv(const GridFunction& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    const auto& dom = *g.domain;
    out << "node_index";
    for (int d = 0; d < dom.dim; ++d) out << ",x" << d;
    out << ",value,class\n";
    char buf[64];
    for (std::size_t f = 0; f < dom.lattice_size; ++f) {
        if (dom.node_class[f] == NodeClass::Excluded) continue;
        auto x = dom.coords(f);
        out << f;
        for (int d = 0; d < dom.dim; ++d) {
            std::snprintf(buf, sizeof buf, ",%.17g", x[d]);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, ",%.17g", g.values[f]);
        out << buf << ',' << (dom.node_class[f] == NodeClass::Interior ? "Interior" : "Boundary")
            << '\n';
    }
}

}  // namespace pshlab
