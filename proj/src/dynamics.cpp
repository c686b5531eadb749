#include "parodo/dynamics.hpp"

#include <algorithm>
#include <set>

#include "parodo/errors.hpp"

namespace parodo {

std::int64_t checked_pow_i64(std::int64_t q, int j) {
    std::int64_t r = 1;
    for (int k = 0; k < j; ++k) {
        if (r > INT64_MAX / q) throw SymbolRangeError("alphabet q^j exceeds int64");
        r *= q;
    }
    return r;
}

Point make_point(std::int64_t q, std::vector<std::int64_t> symbols, std::string tail_policy) {
    if (q < 2) throw ConfigError("make_point: q must be >= 2");
    if (symbols.size() < 2) throw ConfigError("make_point: buffer length must be >= 2");
    if (tail_policy != "zeros") throw ConfigError("make_point: unsupported tail policy");
    for (int j = 1; j <= static_cast<int>(symbols.size()); ++j) {
        const std::int64_t top = checked_pow_i64(q, j);
        const std::int64_t v = symbols[static_cast<std::size_t>(j - 1)];
        if (v < 0 || v > top)
            throw SymbolRangeError("symbol " + std::to_string(v) + " out of range at level " +
                                   std::to_string(j));
    }
    return Point{q, std::move(symbols), std::move(tail_policy)};
}

std::vector<std::int64_t> product_odometer_step(std::vector<std::int64_t> x,
                                                const std::vector<std::int64_t>& level_sizes) {
    if (x.size() != level_sizes.size())
        throw LengthMismatch("product_odometer_step: word/base length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (level_sizes[i] < 1 || x[i] < 0 || x[i] >= level_sizes[i])
            throw SymbolRangeError("product_odometer_step: coordinate out of range");
        if (x[i] < level_sizes[i] - 1) {
            for (std::size_t k = 0; k < i; ++k) x[k] = 0;
            x[i] += 1;
            return x;
        }
    }
    throw BufferOverflow("product_odometer_step: all coordinates full");
}

int t_carry_depth(const Point& x) {
    const std::int64_t head = x.at(1);
    if (head >= 1 && head <= x.q - 1) return 1;
    for (int i = 2; i <= x.length(); ++i)
        if (x.at(i) < checked_pow_i64(x.q, i)) return i;
    throw BufferOverflow("t_step: carry beyond buffer");
}

Point t_step(const Point& x) {
    Point y = x;
    const std::int64_t head = x.at(1);
    if (head >= 1 && head <= x.q - 1) {
        y.buffer[0] += 1;
        return y;
    }
    const int n = t_carry_depth(x); // >= 2 here
    int psum = 0;
    for (int j = 1; j <= n; ++j) psum += parity_bit(x.at(j));
    const std::int64_t a = (psum + 1) & 1; // (psum - 1) mod 2
    y.buffer[0] = a;
    for (int j = 2; j < n; ++j) y.buffer[static_cast<std::size_t>(j - 1)] = 0;
    y.buffer[static_cast<std::size_t>(n - 1)] += 1;
    return y;
}

Point t_inverse_step(const Point& x) {
    Point y = x;
    const std::int64_t head = x.at(1);
    if (head >= 2 && head <= x.q) {
        y.buffer[0] -= 1;
        return y;
    }
    int n = 0;
    for (int i = 2; i <= x.length(); ++i)
        if (x.at(i) > 0) {
            n = i;
            break;
        }
    if (n == 0) throw BufferOverflow("t_inverse_step: borrow beyond buffer");
    const std::int64_t yn = x.at(n) - 1;
    const int head_parity = static_cast<int>(((head + 1 - (n - 2) - parity_bit(yn)) % 2 + 2) % 2);
    y.buffer[0] = head_parity == 0 ? 0 : x.q;
    for (int j = 2; j < n; ++j) y.buffer[static_cast<std::size_t>(j - 1)] = checked_pow_i64(x.q, j);
    y.buffer[static_cast<std::size_t>(n - 1)] = yn;
    return y;
}

bool related(const Point& x, const Point& y, int n) {
    if (x.q != y.q || x.length() != y.length() || x.tail_policy != y.tail_policy)
        throw LengthMismatch("related: incompatible points");
    if (n < 0 || n > x.length()) throw LengthMismatch("related: depth beyond buffer");
    for (int i = n + 1; i <= x.length(); ++i)
        if (x.at(i) != y.at(i)) return false;
    int diff = 0;
    for (int i = 1; i <= n; ++i) diff ^= parity_bit(x.at(i)) ^ parity_bit(y.at(i));
    return diff == 0;
}

std::vector<Prefix> class_enumerate(const Point& x, int n, std::uint64_t budget) {
    if (n < 1 || n > x.length()) throw LengthMismatch("class_enumerate: depth beyond buffer");
    BigInt count{1};
    for (int j = 1; j <= n; ++j) count *= BigInt(checked_pow_i64(x.q, j)) + 1;
    if (count > BigInt(budget)) throw BudgetExceeded("class_enumerate: state count over budget");
    int target = 0;
    for (int j = 1; j <= n; ++j) target ^= parity_bit(x.at(j));
    std::vector<Prefix> out;
    std::vector<std::int64_t> word(static_cast<std::size_t>(n), 0);
    std::vector<std::int64_t> tops(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) tops[static_cast<std::size_t>(j - 1)] = checked_pow_i64(x.q, j);
    for (;;) {
        int p = 0;
        for (const std::int64_t v : word) p ^= parity_bit(v);
        if (p == target) out.emplace_back(word);
        // lexicographic successor: the last coordinate varies fastest
        int j = n - 1;
        while (j >= 0 && word[static_cast<std::size_t>(j)] == tops[static_cast<std::size_t>(j)]) {
            word[static_cast<std::size_t>(j)] = 0;
            --j;
        }
        if (j < 0) break;
        word[static_cast<std::size_t>(j)] += 1;
    }
    return out;
}

LogValue cocycle(const Point& x, const Point& y, int n) {
    if (!related(x, y, n)) throw NotRelated("cocycle: points not related at this depth");
    std::int64_t b = 0;
    for (int j = 1; j <= n; ++j)
        b += static_cast<std::int64_t>(j) * (parity_bit(x.at(j)) - parity_bit(y.at(j)));
    return LogValue{0, b};
}

Transport make_transport(std::int64_t q, Prefix u, int block_lo, int block_hi,
                         std::vector<std::int64_t> vminus, std::vector<std::int64_t> v) {
    if (q < 2) throw ConfigError("make_transport: q must be >= 2");
    if (block_lo < 1 || block_hi < block_lo) throw ConfigError("make_transport: bad block range");
    if (static_cast<int>(u.size()) > block_lo - 1)
        throw ConfigError("make_transport: prefix overlaps the block");
    const std::size_t width = static_cast<std::size_t>(block_hi - block_lo + 1);
    if (vminus.size() != width || v.size() != width)
        throw LengthMismatch("make_transport: block word length mismatch");
    int pm = 0, pv = 0;
    for (std::size_t i = 0; i < width; ++i) {
        const int j = block_lo + static_cast<int>(i);
        const std::int64_t top = checked_pow_i64(q, j);
        if (vminus[i] < 0 || vminus[i] > top || v[i] < 0 || v[i] > top)
            throw SymbolRangeError("make_transport: block symbol out of range");
        pm ^= parity_bit(vminus[i]);
        pv ^= parity_bit(v[i]);
    }
    if (pm != pv) throw TransportDomainError("make_transport: block parity mismatch");
    return Transport{std::move(u), block_lo, block_hi, std::move(vminus), std::move(v)};
}

Point transport_apply(const Transport& t, const Point& x) {
    if (x.length() < t.block_hi) throw LengthMismatch("transport_apply: buffer shorter than block");
    for (int j = 1; j <= static_cast<int>(t.u.size()); ++j)
        if (x.at(j) != t.u.at(j)) throw TransportDomainError("transport_apply: point outside Z_u");
    for (int j = t.block_lo; j <= t.block_hi; ++j)
        if (x.at(j) != t.vminus[static_cast<std::size_t>(j - t.block_lo)])
            throw TransportDomainError("transport_apply: point outside Z_{v-}");
    Point y = x;
    for (int j = t.block_lo; j <= t.block_hi; ++j)
        y.buffer[static_cast<std::size_t>(j - 1)] = t.v[static_cast<std::size_t>(j - t.block_lo)];
    return y;
}

LogValue transport_cocycle(const Transport& t) {
    std::int64_t b = 0;
    for (int j = t.block_lo; j <= t.block_hi; ++j) {
        const std::size_t i = static_cast<std::size_t>(j - t.block_lo);
        b += static_cast<std::int64_t>(j) * (parity_bit(t.vminus[i]) - parity_bit(t.v[i]));
    }
    return LogValue{0, b};
}

OrbitResult induced_return_orbit(const Point& x, int n, std::uint64_t step_budget) {
    if (n < 1 || n >= x.length())
        throw LengthMismatch("induced_return_orbit: need headroom above depth n");
    OrbitResult res;
    std::set<std::vector<std::int64_t>> seen;
    const auto note = [&](const Point& y) {
        for (int i = n + 1; i <= x.length(); ++i)
            if (y.at(i) != x.at(i)) return;
        seen.insert(std::vector<std::int64_t>(y.buffer.begin(), y.buffer.begin() + n));
    };
    note(x);
    Point cur = x;
    for (;;) {
        if (res.forward_steps >= step_budget) {
            res.budget_truncated = true;
            break;
        }
        try {
            cur = t_step(cur);
        } catch (const BufferOverflow&) {
            break;
        }
        ++res.forward_steps;
        note(cur);
    }
    cur = x;
    for (;;) {
        if (res.backward_steps >= step_budget) {
            res.budget_truncated = true;
            break;
        }
        try {
            cur = t_inverse_step(cur);
        } catch (const BufferOverflow&) {
            break;
        }
        ++res.backward_steps;
        note(cur);
    }
    for (const auto& w : seen) res.visited.emplace_back(w);
    return res;
}

} // namespace parodo
