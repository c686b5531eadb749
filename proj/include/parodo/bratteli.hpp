#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "parodo/measure.hpp"
#include "parodo/rational.hpp"

namespace parodo {

/// Two parity vertices per level plus a root. Level 1 has one edge
/// root -> v_{1,0} and q edges root -> v_{1,1}; level n >= 2 has one
/// self-parity edge on each side and q^n crossing edges in each direction.
/// Edges are never materialized; multiplicities are label arithmetic.
struct BratteliDiagram {
    std::int64_t q = 5;
    int levels = 0;

    BigInt cross_multiplicity(int n) const; // q^n
    /// Number of edges between parity a at level n-1 (or the root) and
    /// parity b at level n.
    BigInt edge_count(int n, int a, int b) const;
};

BratteliDiagram build_diagram(std::int64_t q, int levels);

/// Edge e^x_{a,b,n}: from parity a (level n-1) to parity b (level n),
/// x = 0 on parity-preserving edges, x in {1..q^n} on crossing edges.
struct EdgeLabel {
    int n = 1;
    int from = 0;
    int to = 0;
    std::int64_t x = 0;
};

/// Path prefix (e^{x_1}_{0,v_1,1}, ..., e^{x_n}_{v_{n-1},v_n,n}) stored as
/// (x_j, v_j) pairs.
struct PathEdge {
    std::int64_t x = 0;
    int v = 0;
};

struct PathPrefix {
    std::vector<PathEdge> edges;
};

struct PathCheck {
    bool ok = true;
    std::size_t first_bad = 0; // 1-based level of the first violation
    explicit operator bool() const { return ok; }
};

PathCheck validate_path(const BratteliDiagram& d, const PathPrefix& f);

Rational transition_probability(std::int64_t q, const EdgeLabel& e);

/// Product of transition probabilities along the path.
Rational af_cylinder_measure(std::int64_t q, const PathPrefix& f);

/// Drops vertex components: S(f) = (x_1, ..., x_n).
Prefix path_to_point(const BratteliDiagram& d, const PathPrefix& f);

/// Reconstructs the unique vertex sequence from parities.
PathPrefix point_to_path(const Prefix& p);

/// Coordinates agree beyond n and the parity sums up to n differ evenly.
bool tail_equivalent(const PathPrefix& e, const PathPrefix& f, int n);

/// (mu_p(Z_f), mu(S(Z_f))) computed through independent code paths.
std::pair<Rational, Rational> pushforward_check(std::int64_t q, const PathPrefix& f);

std::string to_dot(const BratteliDiagram& d);

} // namespace parodo
