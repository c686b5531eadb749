#include "parodo/bratteli.hpp"

#include <sstream>

#include "parodo/errors.hpp"

namespace parodo {

BigInt BratteliDiagram::cross_multiplicity(int n) const {
    if (n < 1 || n > levels) throw SymbolRangeError("diagram level out of range");
    return bigint_pow(BigInt(q), static_cast<std::uint64_t>(n));
}

BigInt BratteliDiagram::edge_count(int n, int a, int b) const {
    if (n < 1 || n > levels) throw SymbolRangeError("diagram level out of range");
    if (a < 0 || a > 1 || b < 0 || b > 1) throw SymbolRangeError("parity vertex label not in {0,1}");
    if (n == 1) {
        if (a != 0) throw SymbolRangeError("level 1 edges start at the root");
        return b == 0 ? BigInt(1) : BigInt(q);
    }
    return a == b ? BigInt(1) : cross_multiplicity(n);
}

BratteliDiagram build_diagram(std::int64_t q, int levels) {
    if (q < 2) throw ConfigError("build_diagram: q must be >= 2");
    if (levels < 1) throw ConfigError("build_diagram: at least one level");
    return BratteliDiagram{q, levels};
}

PathCheck validate_path(const BratteliDiagram& d, const PathPrefix& f) {
    if (static_cast<int>(f.edges.size()) > d.levels) {
        return PathCheck{false, static_cast<std::size_t>(d.levels) + 1};
    }
    int prev = 0;
    for (std::size_t i = 0; i < f.edges.size(); ++i) {
        const int n = static_cast<int>(i) + 1;
        const PathEdge& e = f.edges[i];
        const PathCheck bad{false, static_cast<std::size_t>(n)};
        if (e.v != 0 && e.v != 1) return bad;
        if (e.x < 0 || BigInt(e.x) > d.cross_multiplicity(n)) return bad;
        const int pi = parity_bit(e.x);
        if (((prev + pi) & 1) != e.v) return bad;
        if (e.v == prev && e.x != 0) return bad;
        if (e.v != prev && e.x == 0) return bad;
        prev = e.v;
    }
    return PathCheck{};
}

Rational transition_probability(std::int64_t q, const EdgeLabel& e) {
    if (q < 2) throw ConfigError("transition_probability: q must be >= 2");
    if (e.n < 1 || e.from < 0 || e.from > 1 || e.to < 0 || e.to > 1)
        throw InvalidPathError("invalid edge label");
    if (e.n == 1 && e.from != 0) throw InvalidPathError("level 1 edges start at the root");
    const BigInt qn = bigint_pow(BigInt(q), static_cast<std::uint64_t>(e.n));
    const bool crossing = e.n == 1 ? e.to == 1 : e.from != e.to;
    if (crossing) {
        if (e.x < 1 || BigInt(e.x) > qn) throw InvalidPathError("crossing edge index out of range");
        return Rational(BigInt(1), 2 * qn);
    }
    if (e.x != 0) throw InvalidPathError("parity-preserving edge must carry index 0");
    return Rational(1, 2);
}

Rational af_cylinder_measure(std::int64_t q, const PathPrefix& f) {
    const BratteliDiagram d = build_diagram(q, std::max<int>(1, static_cast<int>(f.edges.size())));
    if (!validate_path(d, f)) throw InvalidPathError("af_cylinder_measure: invalid path");
    Rational m{1};
    int prev = 0;
    for (std::size_t i = 0; i < f.edges.size(); ++i) {
        const int n = static_cast<int>(i) + 1;
        m *= transition_probability(q, EdgeLabel{n, prev, f.edges[i].v, f.edges[i].x});
        prev = f.edges[i].v;
    }
    return m;
}

Prefix path_to_point(const BratteliDiagram& d, const PathPrefix& f) {
    if (!validate_path(d, f)) throw InvalidPathError("path_to_point: invalid path");
    std::vector<std::int64_t> w;
    w.reserve(f.edges.size());
    for (const PathEdge& e : f.edges) w.push_back(e.x);
    return Prefix(std::move(w));
}

PathPrefix point_to_path(const Prefix& p) {
    PathPrefix f;
    int v = 0;
    for (const std::int64_t x : p.word) {
        if (x < 0) throw SymbolRangeError("point_to_path: negative symbol");
        v = (v + parity_bit(x)) & 1;
        f.edges.push_back(PathEdge{x, v});
    }
    return f;
}

bool tail_equivalent(const PathPrefix& e, const PathPrefix& f, int n) {
    if (e.edges.size() != f.edges.size())
        throw LengthMismatch("tail_equivalent: paths of different length");
    if (n < 0 || static_cast<std::size_t>(n) > e.edges.size())
        throw LengthMismatch("tail_equivalent: depth beyond path length");
    for (std::size_t i = static_cast<std::size_t>(n); i < e.edges.size(); ++i)
        if (e.edges[i].x != f.edges[i].x) return false;
    int diff = 0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
        diff ^= parity_bit(e.edges[i].x) ^ parity_bit(f.edges[i].x);
    return diff == 0;
}

std::pair<Rational, Rational> pushforward_check(std::int64_t q, const PathPrefix& f) {
    const Rational af = af_cylinder_measure(q, f);
    const int depth = std::max<int>(1, static_cast<int>(f.edges.size()));
    const BratteliDiagram d = build_diagram(q, depth);
    const BaseSchedule sched(q, depth);
    const Rational pm = prefix_measure(sched, path_to_point(d, f));
    return {af, pm};
}

std::string to_dot(const BratteliDiagram& d) {
    std::ostringstream os;
    os << "digraph bratteli {\n  rankdir=TB;\n  root [label=\"v(0,0)\"];\n";
    for (int n = 1; n <= d.levels; ++n)
        for (int b = 0; b < 2; ++b)
            os << "  v" << n << "_" << b << " [label=\"v(" << n << "," << b << ")\"];\n";
    os << "  root -> v1_0 [label=\"1\"];\n";
    os << "  root -> v1_1 [label=\"" << d.cross_multiplicity(1).str() << "\"];\n";
    for (int n = 2; n <= d.levels; ++n) {
        const std::string mult = d.cross_multiplicity(n).str();
        for (int a = 0; a < 2; ++a) {
            os << "  v" << n - 1 << "_" << a << " -> v" << n << "_" << a << " [label=\"1\"];\n";
            os << "  v" << n - 1 << "_" << a << " -> v" << n << "_" << (a ^ 1) << " [label=\"" << mult
               << "\"];\n";
        }
    }
    os << "}\n";
    return os.str();
}

} // namespace parodo
