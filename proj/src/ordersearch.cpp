#include "mscs/ordersearch.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mscs/ctxmask.hpp"
#include "mscs/error.hpp"

namespace mscs {

namespace {

int wrap(int a, int n) {
  const int r = a % n;
  return r < 0 ? r + n : r;
}

bool better(double a, double b, bool worst) { return worst ? a > b : a < b; }

bool tied(double a, double b) {
  return std::abs(a - b) <= kTieTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Per (cell, other cell): the window offsets of `cell` that wrap onto `other`.
std::vector<std::uint32_t> wrap_bits_table(int n) {
  const int cells = n * n;
  std::vector<std::uint32_t> t(static_cast<std::size_t>(cells) * cells, 0u);
  for (int cell = 0; cell < cells; ++cell) {
    const int r = cell / n;
    const int c = cell % n;
    for (int dy = -ContextMask::kRadius; dy <= ContextMask::kRadius; ++dy) {
      for (int dx = -ContextMask::kRadius; dx <= ContextMask::kRadius; ++dx) {
        if (dy == 0 && dx == 0) continue;
        const int other = wrap(r + dy, n) * n + wrap(c + dx, n);
        t[cell * cells + other] |= 1u << ContextMask::bit_of(dy, dx);
      }
    }
  }
  return t;
}

OrderScore score_from_sequence(const SubsetCostTable& table, const std::vector<int>& cell_sequence) {
  const int cells = table.cells();
  std::vector<int> stages(cells);
  std::vector<double> per_stage(cells);
  std::uint32_t decoded = 0;
  double sum = 0.0;
  for (int s = 0; s < cells; ++s) {
    const int cell = cell_sequence[s];
    stages[cell] = s;
    per_stage[s] = table.cost(cell, decoded);
    sum += per_stage[s];
    decoded |= 1u << cell;
  }
  return {PatchOrder(table.n(), std::move(stages)), std::move(per_stage), sum / cells};
}

void check_table_side(int n) {
  if (n < 2 || n > 4) throw InvalidArgument("subset search supports n in {2, 3, 4}, got " + std::to_string(n));
}

void sort_with_ties(std::vector<OrderScore>& scores, bool worst) {
  std::sort(scores.begin(), scores.end(), [worst](const OrderScore& a, const OrderScore& b) {
    if (a.total_bits_per_position != b.total_bits_per_position) {
      return better(a.total_bits_per_position, b.total_bits_per_position, worst);
    }
    return a.order < b.order;
  });
  // Totals equal up to rounding are ordered by order string.
  std::size_t i = 0;
  while (i < scores.size()) {
    std::size_t j = i + 1;
    while (j < scores.size() && tied(scores[j].total_bits_per_position, scores[i].total_bits_per_position)) ++j;
    std::sort(scores.begin() + static_cast<std::ptrdiff_t>(i), scores.begin() + static_cast<std::ptrdiff_t>(j),
              [](const OrderScore& a, const OrderScore& b) { return a.order < b.order; });
    i = j;
  }
}

}  // namespace

OrderScore score_order(const PatchOrder& order, const FieldModel& model, double quant_noise) {
  return theoretical_order_rate(model, order, quant_noise);
}

std::vector<PatchOrder> all_orders(int n) {
  if (n < 1 || n > 3) throw InvalidArgument("enumeration supports n <= 3");
  std::vector<int> stages(static_cast<std::size_t>(n) * n);
  std::iota(stages.begin(), stages.end(), 0);
  std::vector<PatchOrder> out;
  do {
    out.emplace_back(n, stages);
  } while (std::next_permutation(stages.begin(), stages.end()));
  return out;
}

std::vector<OrderScore> exhaustive_search(int n, const FieldModel& model, bool worst, bool allow_n3,
                                          double quant_noise) {
  model.validate();
  if (n >= 4) throw InvalidArgument("exhaustive search is infeasible for n >= 4; use dp_search");
  if (n == 3 && !allow_n3) throw InvalidArgument("n = 3 enumerates 362880 orders; pass allow_n3");
  if (n < 1) throw InvalidArgument("patch side must be >= 1");

  CondStatsCache cache(model, quant_noise, NoisePlacement::context_and_target);
  std::vector<OrderScore> scores;
  for (PatchOrder& order : all_orders(n)) {
    const StageMap map = StageMap::from_order(order);
    OrderScore s{order, {}, 0.0};
    double sum = 0.0;
    for (int st = 0; st < order.cells(); ++st) {
      s.per_stage_bits.push_back(cache.get(stage_mask(map, st)).rate_bits);
      sum += s.per_stage_bits.back();
    }
    s.total_bits_per_position = sum / order.cells();
    scores.push_back(std::move(s));
  }
  sort_with_ties(scores, worst);
  return scores;
}

SubsetCostTable::SubsetCostTable(int n, std::vector<double> costs, std::int64_t lookups,
                                 std::int64_t distinct_masks)
    : n_(n),
      shift_(std::bit_width(static_cast<unsigned>(n * n - 1))),
      costs_(std::move(costs)),
      lookups_(lookups),
      distinct_masks_(distinct_masks) {}

double SubsetCostTable::cache_hit_rate() const {
  return lookups_ == 0 ? 0.0 : 1.0 - static_cast<double>(distinct_masks_) / static_cast<double>(lookups_);
}

std::uint32_t induced_mask_bits(int n, int cell, std::uint32_t subset) {
  const int cells = n * n;
  std::uint32_t bits = 0;
  const int r = cell / n;
  const int c = cell % n;
  for (int dy = -ContextMask::kRadius; dy <= ContextMask::kRadius; ++dy) {
    for (int dx = -ContextMask::kRadius; dx <= ContextMask::kRadius; ++dx) {
      if (dy == 0 && dx == 0) continue;
      const int other = wrap(r + dy, n) * n + wrap(c + dx, n);
      if (other < cells && ((subset >> other) & 1u)) bits |= 1u << ContextMask::bit_of(dy, dx);
    }
  }
  return bits;
}

SubsetCostTable build_subset_costs(int n, const FieldModel& model, double quant_noise, Exec exec) {
  check_table_side(n);
  model.validate();
  const int cells = n * n;
  const int shift = std::bit_width(static_cast<unsigned>(cells - 1));
  const std::int64_t subsets = std::int64_t{1} << cells;
  const std::vector<std::uint32_t> wrap_bits = wrap_bits_table(n);
  const bool par = exec == Exec::parallel;

  // Induced mask per (subset, cell); entries with cell in subset stay unused.
  const std::size_t slots = static_cast<std::size_t>(subsets) << shift;
  std::vector<std::uint32_t> masks(slots, 0u);
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t s = 0; s < subsets; ++s) {
    const auto subset = static_cast<std::uint32_t>(s);
    for (int cell = 0; cell < cells; ++cell) {
      if ((subset >> cell) & 1u) continue;
      std::uint32_t bits = 0;
      for (std::uint32_t rest = subset; rest != 0; rest &= rest - 1) {
        bits |= wrap_bits[cell * cells + std::countr_zero(rest)];
      }
      masks[(static_cast<std::size_t>(s) << shift) | cell] = bits;
    }
  }

  std::vector<std::uint32_t> distinct;
  std::int64_t lookups = 0;
  for (std::int64_t s = 0; s < subsets; ++s) {
    for (int cell = 0; cell < cells; ++cell) {
      if ((s >> cell) & 1) continue;
      distinct.push_back(masks[(static_cast<std::size_t>(s) << shift) | cell]);
      ++lookups;
    }
  }
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<double> rates(distinct.size());
  const auto num_distinct = static_cast<std::int64_t>(distinct.size());
#pragma omp parallel for schedule(dynamic, 64) if (par)
  for (std::int64_t i = 0; i < num_distinct; ++i) {
    rates[i] = cond_stats(model, ContextMask::from_bits(distinct[i]), quant_noise).rate_bits;
  }

  std::vector<double> costs(slots, std::numeric_limits<double>::quiet_NaN());
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t s = 0; s < subsets; ++s) {
    for (int cell = 0; cell < cells; ++cell) {
      if ((s >> cell) & 1) continue;
      const std::size_t slot = (static_cast<std::size_t>(s) << shift) | cell;
      const auto it = std::lower_bound(distinct.begin(), distinct.end(), masks[slot]);
      costs[slot] = rates[it - distinct.begin()];
    }
  }
  return SubsetCostTable(n, std::move(costs), lookups, num_distinct);
}

namespace {

// forward[S]: optimal cost of decoding exactly S first. backward[S]: optimal
// cost of decoding the complement of S after S.
struct DpTables {
  std::vector<double> forward;
  std::vector<double> backward;
};

DpTables run_dp(const SubsetCostTable& table, bool worst, Exec exec) {
  const int cells = table.cells();
  const std::int64_t subsets = std::int64_t{1} << cells;
  const std::uint32_t full = table.full_set();
  const double init = worst ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  DpTables t{std::vector<double>(subsets, init), std::vector<double>(subsets, init)};
  t.forward[0] = 0.0;
  t.backward[full] = 0.0;

  auto relax_forward = [&](std::uint32_t s) {
    double best = init;
    for (std::uint32_t rest = s; rest != 0; rest &= rest - 1) {
      const int cell = std::countr_zero(rest);
      const std::uint32_t prev = s & ~(1u << cell);
      const double v = t.forward[prev] + table.cost(cell, prev);
      if (better(v, best, worst)) best = v;
    }
    t.forward[s] = best;
  };
  auto relax_backward = [&](std::uint32_t s) {
    double best = init;
    for (std::uint32_t rest = full & ~s; rest != 0; rest &= rest - 1) {
      const int cell = std::countr_zero(rest);
      const double v = table.cost(cell, s) + t.backward[s | (1u << cell)];
      if (better(v, best, worst)) best = v;
    }
    t.backward[s] = best;
  };

  if (exec == Exec::serial) {
    for (std::int64_t s = 1; s < subsets; ++s) relax_forward(static_cast<std::uint32_t>(s));
    for (std::int64_t s = subsets - 2; s >= 0; --s) relax_backward(static_cast<std::uint32_t>(s));
    return t;
  }

  // Layers of equal popcount are independent.
  std::vector<std::vector<std::uint32_t>> layers(cells + 1);
  for (std::int64_t s = 0; s < subsets; ++s) layers[std::popcount(static_cast<std::uint32_t>(s))].push_back(
      static_cast<std::uint32_t>(s));
  for (int k = 1; k <= cells; ++k) {
    const auto& layer = layers[k];
    const auto size = static_cast<std::int64_t>(layer.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < size; ++i) relax_forward(layer[i]);
  }
  for (int k = cells - 1; k >= 0; --k) {
    const auto& layer = layers[k];
    const auto size = static_cast<std::int64_t>(layer.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < size; ++i) relax_backward(layer[i]);
  }
  return t;
}

// True when some optimal chain from the empty set honours `fixed` (stage per
// cell, -1 = free). Only tight edges are followed.
bool tight_chain_exists(const SubsetCostTable& table, const DpTables& t, double optimum,
                        const std::vector<int>& fixed) {
  const int cells = table.cells();
  const std::int64_t subsets = std::int64_t{1} << cells;
  std::vector<int> cell_at_stage(cells, -1);
  for (int c = 0; c < cells; ++c) {
    if (fixed[c] >= 0) cell_at_stage[fixed[c]] = c;
  }
  std::vector<char> reach(subsets, 0);
  reach[0] = 1;
  for (std::int64_t s = 0; s < subsets - 1; ++s) {
    if (!reach[s]) continue;
    const auto subset = static_cast<std::uint32_t>(s);
    const int stage = std::popcount(subset);
    for (int c = 0; c < cells; ++c) {
      if ((subset >> c) & 1u) continue;
      if (fixed[c] >= 0 && fixed[c] != stage) continue;
      if (cell_at_stage[stage] >= 0 && cell_at_stage[stage] != c) continue;
      const std::uint32_t next = subset | (1u << c);
      if (tied(t.forward[subset] + table.cost(c, subset) + t.backward[next], optimum)) reach[next] = 1;
    }
  }
  return reach[subsets - 1] != 0;
}

}  // namespace

OrderScore dp_search(const SubsetCostTable& table, bool worst, Exec exec) {
  const int cells = table.cells();
  const DpTables t = run_dp(table, worst, exec);
  const double optimum = t.forward[table.full_set()];

  // Greedy lexicographic minimisation of the order string: fix each cell's
  // stage to the smallest value that still admits an optimal chain.
  std::vector<int> fixed(cells, -1);
  std::vector<bool> used(cells, false);
  for (int c = 0; c < cells; ++c) {
    for (int stage = 0; stage < cells; ++stage) {
      if (used[stage]) continue;
      fixed[c] = stage;
      if (tight_chain_exists(table, t, optimum, fixed)) break;
      fixed[c] = -1;
    }
    if (fixed[c] < 0) throw std::logic_error("dp_search: no optimal chain honours the partial order");
    used[fixed[c]] = true;
  }
  std::vector<int> sequence(cells);
  for (int c = 0; c < cells; ++c) sequence[fixed[c]] = c;
  return score_from_sequence(table, sequence);
}

OrderScore dp_search(int n, const FieldModel& model, bool worst, double quant_noise) {
  return dp_search(build_subset_costs(n, model, quant_noise), worst);
}

namespace {

struct BnbState {
  const SubsetCostTable& table;
  bool worst;
  bool prune;
  std::vector<double> bound_tail;  // per cell: cost(c, all others) or cost(c, {})
  std::vector<double> seen;        // best prefix cost per decoded set
  std::vector<int> path;
  std::vector<int> best_path;
  double incumbent;
  std::int64_t nodes = 0;

  void dfs(std::uint32_t decoded, double prefix, double tail_bound) {
    const int cells = table.cells();
    const int depth = static_cast<int>(path.size());
    if (depth == cells) {
      if (best_path.empty() || better(prefix, incumbent, worst)) {
        incumbent = prefix;
        best_path = path;
      }
      return;
    }
    // Children ordered by their own stage cost so the first leaf is greedy.
    std::vector<std::pair<double, int>> children;
    for (int c = 0; c < cells; ++c) {
      if (!((decoded >> c) & 1u)) children.emplace_back(table.cost(c, decoded), c);
    }
    std::stable_sort(children.begin(), children.end(), [this](const auto& a, const auto& b) {
      return better(a.first, b.first, worst);
    });
    for (const auto& [cost, c] : children) {
      const double next_prefix = prefix + cost;
      const double next_tail = tail_bound - bound_tail[c];
      const std::uint32_t next = decoded | (1u << c);
      if (prune) {
        if (!best_path.empty() && !better(next_prefix + next_tail, incumbent, worst)) continue;
        double& memo = seen[next];
        if (!std::isnan(memo) && !better(next_prefix, memo, worst)) continue;
        memo = next_prefix;
      }
      ++nodes;
      path.push_back(c);
      dfs(next, next_prefix, next_tail);
      path.pop_back();
    }
  }
};

}  // namespace

BranchAndBoundResult branch_and_bound_search(const SubsetCostTable& table, bool worst, bool prune) {
  const int cells = table.cells();
  BnbState st{table, worst, prune, std::vector<double>(cells),
              std::vector<double>(std::size_t{1} << cells, std::numeric_limits<double>::quiet_NaN()),
              {}, {}, 0.0, 0};
  double tail = 0.0;
  for (int c = 0; c < cells; ++c) {
    // Costs shrink as more cells are decoded, so these bound every stage.
    st.bound_tail[c] = worst ? table.cost(c, 0u) : table.cost(c, table.full_set() & ~(1u << c));
    tail += st.bound_tail[c];
  }
  st.path.reserve(cells);
  st.dfs(0u, 0.0, tail);

  BranchAndBoundResult out{score_from_sequence(table, st.best_path), st.nodes, 0.0};
  out.pruning_ratio = static_cast<double>(st.nodes) / factorial(cells);
  return out;
}

BranchAndBoundResult branch_and_bound_search(int n, const FieldModel& model, bool worst, double quant_noise) {
  return branch_and_bound_search(build_subset_costs(n, model, quant_noise), worst);
}

std::array<int, 2> transform_cell(int n, int g, int row, int col) {
  if (g < 0 || g >= 8) throw InvalidArgument("symmetry index must be in [0, 8)");
  int r = row;
  int c = col;
  for (int k = 0; k < (g & 3); ++k) {
    const int nr = c;
    c = n - 1 - r;
    r = nr;
  }
  if (g & 4) std::swap(r, c);
  return {r, c};
}

PatchOrder transform_order(const PatchOrder& order, int g) {
  const int n = order.n();
  std::vector<int> stages(order.cells());
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const auto [tr, tc] = transform_cell(n, g, r, c);
      stages[tr * n + tc] = order.stage_at(r, c);
    }
  }
  return PatchOrder(n, std::move(stages));
}

std::vector<PatchOrder> orbit(const PatchOrder& order) {
  std::vector<PatchOrder> out;
  for (int g = 0; g < 8; ++g) out.push_back(transform_order(order, g));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::vector<PatchOrder>> symmetry_classes(std::span<const PatchOrder> orders) {
  std::vector<PatchOrder> sorted(orders.begin(), orders.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<std::vector<PatchOrder>> classes;
  std::vector<bool> assigned(sorted.size(), false);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (assigned[i]) continue;
    std::vector<PatchOrder> cls;
    for (const PatchOrder& image : orbit(sorted[i])) {
      const auto it = std::lower_bound(sorted.begin(), sorted.end(), image);
      if (it != sorted.end() && *it == image) {
        assigned[it - sorted.begin()] = true;
        cls.push_back(image);
      }
    }
    classes.push_back(std::move(cls));
  }
  return classes;
}

std::vector<std::vector<PatchOrder>> symmetry_classes(int n) {
  const std::vector<PatchOrder> orders = all_orders(n);
  return symmetry_classes(std::span<const PatchOrder>(orders));
}

}  // namespace mscs
