#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "parodo/dynamics.hpp"
#include "parodo/lattice.hpp"
#include "parodo/measure.hpp"
#include "parodo/table.hpp"

namespace parodo {

// ---------------------------------------------------------------------------
// Scaling data. With mean-centering, the centered statistic over levels
// [1, i] is (m - W/2) * logq where m is the weighted parity sum and W the
// total weight of the range, so every probability below is an exact rational
// from a WeightedParityTable.
// ---------------------------------------------------------------------------

/// c(i) = -i*log2 - (W/2)*logq, the exact negative mean of the sums.
LogAffine centering(std::int64_t q, int i);

struct KriegerScaling {
    int i = 0;
    Rational beta;
    LogAffine c;
    Rational b;          // b(i) in logq units (a half-integer)
    Rational p_interior; // P(|stat| <= b)
    Rational p_upper;    // P(stat >= b)
    Rational p_lower;    // P(stat <= -b)
    bool cond_interior = false; // p_interior >= 1 - 2 beta
    bool cond_upper = false;    // p_upper >= beta
    bool cond_lower = false;    // p_lower >= beta
};

/// b(i) is the upper-beta quantile on the half-integer lattice: the largest
/// t with P(stat >= t*logq) >= beta. Symmetry of the centered law under
/// pattern complement then gives the lower tail, and the interior condition
/// is checked exactly. Throws NoFeasibleScale when no positive lattice value
/// works (e.g. beta > 1/2, or an empty range).
KriegerScaling scaling(std::int64_t q, int i, const Rational& beta);
KriegerScaling scaling_from_table(std::int64_t q, const WeightedParityTable& t,
                                  const Rational& beta);

struct ScaleCandidate {
    int ik = 0;
    Rational b;           // logq units
    Rational rho;         // grid point in [-1, 1], step 1/8
    Rational window_mass; // closed [rho-1/2, rho+1/2] mass of stat/b
    Rational mass_pm1;    // closed [-1, 1] mass of stat/b
};

struct ScaleSequence {
    std::vector<KriegerScaling> scalings; // one per requested depth
    bool strictly_increasing = false;
    std::vector<ScaleCandidate> candidates;
};

/// Evaluates b along ks (finite unboundedness witness: strictly increasing)
/// and for each depth picks the grid rho maximizing the exact window mass
/// (ties: smaller |rho|, then nonnegative). Throws WindowMassTooSmall only
/// when no depth has a grid point reaching xi/3; per-depth shortfalls are
/// visible in the candidate list.
ScaleSequence choose_scale_sequence(std::int64_t q, const Rational& beta,
                                    const std::vector<int>& ks);

// ---------------------------------------------------------------------------
// Statistic predicates: events over a block of levels measurable with
// respect to (weighted parity sum, pattern parity, pinned head levels).
// Windows are closed rational bounds on the total m; boundary atoms count.
// ---------------------------------------------------------------------------

struct StatPredicate {
    int free_lo = 2; // contiguous free levels; the table is built over these
    int free_hi = 1;

    struct Pin {
        int level = 0;
        bool zero = true; // pinned to symbol 0, otherwise to all nonzero symbols
    };
    std::vector<Pin> pins; // levels outside [free_lo, free_hi]

    // Closed rational bounds on the total weighted sum m (pins included).
    std::optional<Rational> wlo, whi;
    // Total pattern parity (pins included).
    std::optional<int> parity;

    std::int64_t pin_m() const;
    int pin_parity() const;
    std::int64_t free_wsum() const;
    /// Closed integer window on the free m, clamped to [0, free_wsum];
    /// empty windows come back with first > second.
    std::pair<std::int64_t, std::int64_t> free_window() const;
    std::optional<int> free_parity() const;
};

/// Exact measure; `free_table` must cover [free_lo, free_hi].
Rational stat_predicate_measure(const StatPredicate& sp, const WeightedParityTable& free_table);

/// Containment certificate on the statistic lattice: the inner event's
/// possible total m values and parity are forced inside the outer's bounds.
/// Both must cover the same block levels.
bool stat_predicate_subset(const StatPredicate& inner, const StatPredicate& outer);

/// Smallest and largest occupied |m - anchor_m| over the predicate's atoms
/// (total m, pins included); nullopt when the event is empty.
std::optional<std::pair<std::int64_t, std::int64_t>> stat_predicate_abs_gap(
    const StatPredicate& sp, const WeightedParityTable& free_table, std::int64_t anchor_m);

// ---------------------------------------------------------------------------
// B = Z_u minus defects.
// ---------------------------------------------------------------------------

struct DefectTail {
    int level = 0;   // strictly beyond the block and u
    SymbolSet set;   // removed event at that level
};

/// One removed piece C x tail: block words in C lose the tail event's mass.
/// An absent tail removes all of C. Distinct defects must use distinct tail
/// levels so densities multiply.
struct Defect {
    bool full_block = true;
    std::vector<std::vector<std::int64_t>> block_words; // explicit C, lex sorted
    std::optional<DefectTail> tail;
};

struct BSpec {
    Prefix u;
    std::vector<Defect> defects;
};

/// Measure removed by the defect's tail event (1 when the tail is absent).
Rational defect_tail_mass(const BaseSchedule& sched, const Defect& d);

/// mu(B) / mu(Z_u) when all defects are full-block (uniform density).
Rational uniform_density(const BaseSchedule& sched, const BSpec& b);

/// Density of B at one block word: product of (1 - tail mass) over the
/// defects whose block part contains the word.
Rational block_word_density(const BaseSchedule& sched, const BSpec& b,
                            const std::vector<std::int64_t>& word);

// ---------------------------------------------------------------------------
// Explicit block enumeration (oracle scale).
// ---------------------------------------------------------------------------

struct BlockEnumeration {
    int lo = 2, hi = 1;
    std::vector<std::vector<std::int64_t>> words; // lex order
    std::vector<Rational> measures;               // per word
};

BlockEnumeration enumerate_block(const BaseSchedule& sched, int lo, int hi,
                                 std::uint64_t budget = 10'000'000ull);

// ---------------------------------------------------------------------------
// The refinement Lemma.
// ---------------------------------------------------------------------------

struct LemmaCertificate {
    Rational mu_zu;      // mu(Z_u)
    Rational mu_b;       // mu(B)
    Rational mu_e;       // mu(Z_E)
    Rational mu_e0;      // mu(Z_{E0})
    bool holds = false;  // mu_e0 > mu_e / 2
};

/// Explicit mode: E indexes into `block`. E0 keeps the words whose density
/// exceeds 3/4. Hypotheses are checked exactly and raise HypothesisViolated.
LemmaCertificate lemma_refine(const BaseSchedule& sched, const Rational& xi, const BSpec& b,
                              const BlockEnumeration& block,
                              const std::vector<std::uint32_t>& e_words,
                              std::vector<std::uint32_t>* e0_out = nullptr);

/// Uniform-density mode for deep blocks: E0 is E itself when the density
/// clears 3/4 and empty otherwise.
LemmaCertificate lemma_refine_uniform(const BaseSchedule& sched, const Rational& xi,
                                      const BSpec& b, const Rational& mu_e, bool* kept_all);

// ---------------------------------------------------------------------------
// Proof context and set constructions.
// ---------------------------------------------------------------------------

struct GammaSets {
    StatPredicate gamma, gamma_minus, gamma_plus, psi, v0, v1;
    Rational mu_gamma, mu_gamma_minus, mu_gamma_plus, mu_psi, mu_v0, mu_v1;
};

struct ProofContext {
    std::int64_t q = 5;
    Rational beta{1, 4};
    Rational xi;  // min(beta, 1 - 2 beta)
    Rational eta; // xi / 64
    Rational delta{3};
    int I = 1;
    Prefix u;
    std::vector<Defect> defects;

    int ik = 0;
    Rational rho;
    Rational b;  // b(i(k)) in logq units
    double M = 0.0;

    int anchor_parity = 0; // block parity of the anchor extreme word
    Rational es;           // e^s in logq units (exact, positive)
    double s = 0.0;
    std::vector<std::int64_t> vminus, vplus;

    // Populated as the replay pipeline runs.
    std::optional<GammaSets> sets;
    std::vector<StatPredicate> e_components;  // E (disjoint pieces)
    std::vector<StatPredicate> e0_components; // E0

    int block_lo() const { return I + 1; }
    std::int64_t block_wsum() const;
};

ProofContext make_proof_context(std::int64_t q, const Rational& beta, int I, Prefix u,
                                std::vector<Defect> defects, const Rational& delta);

/// The five window/parity events over the block [I+1, i(k)] with exact
/// measures. The block statistic is mean-centered: stat = (m - W/2) logq
/// with W the block weight sum. V0/V1 are taken relative to
/// ctx.anchor_parity.
GammaSets gamma_sets(const ProofContext& ctx, const WeightedParityTable& block_table);

struct ExtremePair {
    std::vector<std::int64_t> vminus, vplus;
    std::int64_t m_minus = 0, m_plus = 0;
    Rational density_minus, density_plus; // of B at the two words
};

/// Lemma-refines both tails (uniform-density mode) and returns their
/// lexicographically smallest representatives.
ExtremePair select_extremes(const ProofContext& ctx, const GammaSets& gs,
                            const WeightedParityTable& block_table);

struct CaseSplitResult {
    int case_branch = 1; // 1 or 2
    std::vector<StatPredicate> e_components;
    Rational mu_e;
    Rational mu_gamma_v0, mu_gamma_v1;
    bool contained = false; // E inside Psi and V0, certified on the lattice
};

/// Case I keeps Gamma inter V0; Case II swaps the level-(I+1) head symbol
/// (0 vs the full nonzero alphabet) on Gamma inter V1, moving the statistic
/// by exactly (I+1)*logq, which the Psi widening absorbs. Throws
/// CaseSplitFailed (with both measures) when neither branch reaches xi/16.
CaseSplitResult case_split(const ProofContext& ctx, const GammaSets& gs,
                           const WeightedParityTable& block_table,
                           const WeightedParityTable& rest_table);

// ---------------------------------------------------------------------------
// K-sets, ratio diagnostics, and the distribution diagnostic.
// ---------------------------------------------------------------------------

enum class KsetRelation { parity, full_tail };
enum class RunMode { exact, monte_carlo, auto_mode };

/// B for K-set scans: the whole space, a window/parity event over [1, depth],
/// or an explicit cylinder union (enumerated within the state budget).
using KsetB = std::variant<std::monostate, StatPredicate, std::vector<Cylinder>>;

struct KsetResult {
    bool exact = true;
    Rational measure;      // exact mode
    double estimate = 0.0; // Monte Carlo mode
    double half_ci = 0.0;  // 1.96 * standard error
    std::uint64_t samples = 0;
    bool borderline = false; // a window boundary fell inside the guard band
};

KsetResult k_set_measure(const BaseSchedule& sched, const KsetB& b, double s, double delta,
                         int depth, KsetRelation relation, RunMode mode,
                         std::uint64_t state_budget = 10'000'000ull,
                         std::uint64_t mc_samples = 200'000ull, std::uint64_t seed = 1,
                         int workers = 1);

struct RatioScanRow {
    int window_lo = 1, window_hi = 1;
    std::int64_t r = 0; // probe cocycle in logq units, nonzero
    Rational measure;
};

/// For each window and probe r: the exact measure of points admitting a
/// partner (parity relation, coordinates rewritten inside the window) whose
/// cocycle is exactly r * logq. Trend data only; no verdict.
std::vector<RatioScanRow> ratio_scan(const std::vector<std::pair<int, int>>& windows,
                                     const std::vector<std::int64_t>& r_values);

/// Kolmogorov-Smirnov distance between the exactly normalized law of the
/// centered statistic at depth i and the standard normal CDF.
double ks_gaussian(std::int64_t q, int i);

// ---------------------------------------------------------------------------
// Proof replay.
// ---------------------------------------------------------------------------

struct StageRecord {
    std::string label;
    std::string lhs;
    std::string rhs;
    std::string exactness; // "exact-rational" | "guarded-float"
    bool pass = false;
    bool borderline = false;
    std::string note;
};

struct SearchTrace {
    int ik = 0;
    bool pass8 = false;
    bool pass10 = false;
    bool pass11 = false;
    std::string note;
};

struct ProofReport {
    ProofContext ctx;
    std::vector<SearchTrace> search;
    std::vector<StageRecord> stages;
    int case_branch = 0;
    bool mirrored = false; // rho < 0 branch (anchored at v+)
    bool complete = false;
    std::string failure; // first failing stage label when incomplete
};

struct ReplayConfig {
    std::int64_t q = 5;
    Rational beta{1, 4};
    int I = 1;
    Prefix u{std::vector<std::int64_t>{0}};
    std::vector<Defect> defects; // empty means the default thin defect
    std::vector<int> ks{8, 16, 32, 64, 96, 128};
    std::optional<Rational> rho_override;
    std::optional<int> ik_override;
    Rational delta{3};
};

ProofReport replay_proof(const ReplayConfig& cfg);

struct DensityResult {
    Prefix u;
    std::vector<Cylinder> b; // A intersected with Z_u
    Rational density;        // mu(B) / mu(Z_u)
};

/// Scans prefixes by depth then lexicographically for the first u with
/// mu(A inter Z_u) > (1 - xi/128) mu(Z_u). Throws NotFoundError with the
/// best density achieved when max_depth is exhausted.
DensityResult density_cylinder(const BaseSchedule& sched, const std::vector<Cylinder>& a,
                               const Rational& xi, int max_depth,
                               std::uint64_t budget = 200'000ull);

} // namespace parodo
