#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "parodo/measure.hpp"

namespace parodo {

/// Working truncation of an infinite word: L materialized coordinates plus a
/// fixed tail policy beyond them (only the all-zero tail is supported).
struct Point {
    std::int64_t q = 5;
    std::vector<std::int64_t> buffer;
    std::string tail_policy = "zeros";

    int length() const { return static_cast<int>(buffer.size()); }
    std::int64_t at(int j) const { return buffer.at(static_cast<std::size_t>(j - 1)); }
};

Point make_point(std::int64_t q, std::vector<std::int64_t> symbols,
                 std::string tail_policy = "zeros");

/// q^j as int64; throws SymbolRangeError when the alphabet does not fit.
std::int64_t checked_pow_i64(std::int64_t q, int j);

/// Generic add-one-with-carry on alphabet sizes (k_1, ..., k_L):
/// coordinates below the first non-full one are zeroed, that one increments.
std::vector<std::int64_t> product_odometer_step(std::vector<std::int64_t> x,
                                                const std::vector<std::int64_t>& level_sizes);

/// Depth of the carry T would perform: 1 when the head just increments,
/// otherwise N(x) = min{i >= 2 : x_i < q^i}.
int t_carry_depth(const Point& x);

/// The parity-constrained odometer: head symbols {1..q-1} increment in place;
/// head symbols {0, q} trigger a carry whose new head is the parity balance
/// a_x, keeping the changed prefix R-related to the input.
Point t_step(const Point& x);

Point t_inverse_step(const Point& x);

/// x_i = y_i for i > n plus even parity-sum difference on the first n levels.
bool related(const Point& x, const Point& y, int n);

/// All depth-n prefixes carrying x's prefix parity (they share x's tail).
/// Lexicographic order.
std::vector<Prefix> class_enumerate(const Point& x, int n,
                                    std::uint64_t budget = 10'000'000ull);

/// log of the prefix-measure ratio mu(Z_{y|n}) / mu(Z_{x|n}); always a pure
/// logq lattice point when x and y are related.
LogValue cocycle(const Point& x, const Point& y, int n);

/// Finite-depth element of the full group: rewrites the block [block_lo,
/// block_hi] from vminus to v inside Z_u, fixing all other coordinates.
struct Transport {
    Prefix u;                          // levels 1..I (may be empty)
    int block_lo = 2;
    int block_hi = 2;
    std::vector<std::int64_t> vminus;  // source block word
    std::vector<std::int64_t> v;       // target block word
};

Transport make_transport(std::int64_t q, Prefix u, int block_lo, int block_hi,
                         std::vector<std::int64_t> vminus, std::vector<std::int64_t> v);

Point transport_apply(const Transport& t, const Point& x);

LogValue transport_cocycle(const Transport& t);

struct OrbitResult {
    std::vector<Prefix> visited; // depth-n prefixes, sorted lexicographically
    bool budget_truncated = false;
    std::uint64_t forward_steps = 0;
    std::uint64_t backward_steps = 0;
};

/// Walks the T-orbit of x in both directions until the buffer overflows,
/// collecting the depth-n prefixes of visited states whose coordinates in
/// (n, L] match x. Overflow at both walk ends is the natural boundary of the
/// depth-L class; only an exhausted step budget marks the result truncated.
OrbitResult induced_return_orbit(const Point& x, int n,
                                 std::uint64_t step_budget = 50'000'000ull);

} // namespace parodo
