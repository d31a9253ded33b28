#pragma once

// Decoding-order search over n x n patches.
//
// The rate of decoding a cell depends only on the set of cells decoded
// before it (its wrapped 5x5 neighbourhood restricted to that set), not on
// their internal order. The objective is therefore an additive set function
// along a chain of subsets, which the subset DP solves exactly in 2^(n^2)
// states; exhaustive enumeration and branch-and-bound serve as independent
// cross-checks.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mscs/gaussfield.hpp"
#include "mscs/latgrid.hpp"
#include "mscs/parallel.hpp"

namespace mscs {

/// Relative tolerance under which two order totals count as tied; ties are
/// broken by the lexicographically smallest order string.
inline constexpr double kTieTolerance = 1e-12;

OrderScore score_order(const PatchOrder& order, const FieldModel& model, double quant_noise = kDefaultQuantNoise);

/// Every order for patch side n, sorted best-first (worst-first when `worst`).
/// n <= 2 always; n == 3 only with allow_n3 (362880 orders); n == 4 throws.
std::vector<OrderScore> exhaustive_search(int n, const FieldModel& model, bool worst = false,
                                          bool allow_n3 = false, double quant_noise = kDefaultQuantNoise);

/// cost(cell, S): rate of decoding `cell` once exactly the cells in bit-set S
/// are decoded. Subsets are n^2-bit integers; bit i is cell i (row-major).
class SubsetCostTable {
 public:
  SubsetCostTable(int n, std::vector<double> costs, std::int64_t lookups, std::int64_t distinct_masks);

  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] int cells() const { return n_ * n_; }
  [[nodiscard]] std::uint32_t full_set() const { return (1u << cells()) - 1u; }
  [[nodiscard]] double cost(int cell, std::uint32_t subset) const {
    return costs_[(static_cast<std::size_t>(subset) << shift_) | static_cast<std::size_t>(cell)];
  }
  /// (cell, subset) pairs evaluated and distinct masks they collapsed to.
  [[nodiscard]] std::int64_t lookups() const { return lookups_; }
  [[nodiscard]] std::int64_t distinct_masks() const { return distinct_masks_; }
  [[nodiscard]] double cache_hit_rate() const;

 private:
  int n_;
  int shift_;
  std::vector<double> costs_;
  std::int64_t lookups_;
  std::int64_t distinct_masks_;
};

/// Mask bits seen by `cell` when the cells in `subset` are decoded.
std::uint32_t induced_mask_bits(int n, int cell, std::uint32_t subset);

SubsetCostTable build_subset_costs(int n, const FieldModel& model, double quant_noise = kDefaultQuantNoise,
                                   Exec exec = Exec::parallel);

/// Held-Karp over subsets. Among optimal orders (within kTieTolerance) the
/// lexicographically smallest order string is returned.
OrderScore dp_search(const SubsetCostTable& table, bool worst = false, Exec exec = Exec::parallel);
OrderScore dp_search(int n, const FieldModel& model, bool worst = false, double quant_noise = kDefaultQuantNoise);

struct BranchAndBoundResult {
  OrderScore best;
  std::int64_t nodes_expanded = 0;
  /// nodes_expanded / (n^2)!
  double pruning_ratio = 0.0;
};

/// Depth-first search over stage prefixes. With pruning, a prefix is cut when
/// prefix cost + sum over remaining cells of cost(c, all other cells) cannot
/// beat the incumbent, or when its decoded set was already reached at no
/// higher cost.
BranchAndBoundResult branch_and_bound_search(const SubsetCostTable& table, bool worst = false, bool prune = true);
BranchAndBoundResult branch_and_bound_search(int n, const FieldModel& model, bool worst = false,
                                             double quant_noise = kDefaultQuantNoise);

// ---------------------------------------------------------------------------
// Dihedral symmetry of the patch.

/// Maps cell (row, col) of an n x n patch under symmetry g in [0, 8):
/// g & 3 quarter turns, then a transpose when g & 4.
std::array<int, 2> transform_cell(int n, int g, int row, int col);
PatchOrder transform_order(const PatchOrder& order, int g);

/// Distinct images of `order` under the 8 symmetries, sorted.
std::vector<PatchOrder> orbit(const PatchOrder& order);

/// Groups `orders` into orbits. Each class is sorted; classes are ordered by
/// their smallest member.
std::vector<std::vector<PatchOrder>> symmetry_classes(std::span<const PatchOrder> orders);
/// All orders of side n (n <= 3) grouped into orbits.
std::vector<std::vector<PatchOrder>> symmetry_classes(int n);

/// All (n^2)! orders, lexicographic. n <= 3.
std::vector<PatchOrder> all_orders(int n);

}  // namespace mscs
