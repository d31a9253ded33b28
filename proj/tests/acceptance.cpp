// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mscs/ctxmask.hpp"
#include "mscs/gaussfield.hpp"
#include "mscs/latgrid.hpp"
#include "mscs/mscodec.hpp"
#include "mscs/ordersearch.hpp"
#include "mscs/parsim.hpp"

using namespace mscs;

namespace {

// Tolerances and limits.
constexpr double kExactTol = 1e-12;
constexpr double kSymmetryRelTol = 1e-9;
constexpr double kMonotoneSlack = 1e-9;  // times sigma^2
constexpr double kMseRelTol = 0.03;
constexpr double kT95TwoSidedDf19 = 2.093;  // Student t, 0.975 quantile, 19 dof
constexpr double kFourByFourSlack = 0.005;
constexpr double kRateLowSlack = 0.01;
constexpr double kRateHighFactor = 1.02;
constexpr double kRateFlushBits = 64.0;
constexpr double kFitRelTol = 0.25;
constexpr double kRatioFactor = 3.0;

constexpr int kSeeds = 20;
constexpr int kRoundTripSeeds = 100;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

PatchOrder random_order(int n, std::mt19937_64& rng) {
  std::vector<int> s(n * n);
  std::iota(s.begin(), s.end(), 0);
  std::shuffle(s.begin(), s.end(), rng);
  return PatchOrder(n, s);
}

bool in_orbit(const PatchOrder& o, const char* text) {
  const auto orb = orbit(parse_order(text));
  return std::find(orb.begin(), orb.end(), o) != orb.end();
}

std::vector<std::uint64_t> seed_range(int count) {
  std::vector<std::uint64_t> s(count);
  std::iota(s.begin(), s.end(), 0);
  return s;
}

// Paired lower 95% bound of mean(b - a).
double paired_lower_bound(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += (b[i] - a[i]) / n;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) ss += (b[i] - a[i] - mean) * (b[i] - a[i] - mean);
  const double se = std::sqrt(ss / (n - 1) / n);
  return mean - kT95TwoSidedDf19 * se;
}

ContextMask mask_where(bool (*pred)(int, int)) {
  ContextMask m;
  for (int dy = -2; dy <= 2; ++dy)
    for (int dx = -2; dx <= 2; ++dx)
      if ((dy || dx) && pred(dy, dx)) m.set(dy, dx);
  return m;
}

// --- criteria ----------------------------------------------------------------

Outcome masks_fidelity() {
  Outcome o;
  const StageMap raster = StageMap::from_order(PatchOrder::raster(2));
  const LatentDims d8(8, 8);
  const ContextMask rows_even = mask_where([](int dy, int dx) { return dy % 2 == 0 && (dx == 1 || dx == -1); });
  const ContextMask rows_odd = mask_where([](int dy, int) { return dy == 1 || dy == -1; });
  o.require(stage_mask(raster, 1) == rows_even && rows_even.count() == 6, "stage 1 != 6-offset set");
  o.require(stage_mask(raster, 2) == rows_odd && rows_odd.count() == 10, "stage 2 != two full rows");
  o.require(stage_mask(raster, 3) == brute_force_mask(raster, 3, d8), "stage 3 != brute force");
  int mismatches = 0;
  for (const PatchOrder& ord : all_orders(2)) {
    const StageMap map = StageMap::from_order(ord);
    for (int s = 0; s < 4; ++s) mismatches += stage_mask(map, s) == brute_force_mask(map, s, d8) ? 0 : 1;
  }
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 100; ++i) {
    const StageMap map = StageMap::from_order(random_order(4, rng));
    for (int s = 0; s < 16; ++s) mismatches += stage_mask(map, s) == brute_force_mask(map, s, LatentDims(16, 16)) ? 0 : 1;
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " brute-force mismatches");
  o.note("96 + 1600 stage masks compared");
  return o;
}

Outcome best_order_2x2() {
  Outcome o;
  const FieldModel m;
  const auto ranked = exhaustive_search(2, m);
  const double raster = score_order(parse_order("0123"), m).total_bits_per_position;
  const double diag = score_order(parse_order("0231"), m).total_bits_per_position;
  o.require(ranked.size() == 24, "expected 24 orders");
  o.require(in_orbit(ranked.front().order, "0123"), "best is " + format_order(ranked.front().order) +
                                                        " (not a 0123 equivalent)");
  o.require(in_orbit(ranked.back().order, "0231"), "worst is " + format_order(ranked.back().order) +
                                                       " (not a 0231 equivalent)");
  o.require(raster < diag, "score(0123)=" + fmt("%.6f", raster) + " >= score(0231)=" + fmt("%.6f", diag));
  return o;
}

Outcome raster_not_optimal_4x4() {
  Outcome o;
  const FieldModel m;
  const OrderScore dp = dp_search(4, m);
  const double raster = score_order(PatchOrder::raster(4), m).total_bits_per_position;
  o.require(dp.total_bits_per_position < raster, "dp not below raster");
  std::mt19937_64 rng(1000);
  double best_random = INFINITY;
  for (int i = 0; i < 1000; ++i) {
    best_random = std::min(best_random, score_order(random_order(4, rng), m).total_bits_per_position);
  }
  o.require(dp.total_bits_per_position <= best_random + kExactTol, "a random order beats dp");
  o.note("dp " + format_order(dp.order) + " " + fmt("%.6f", dp.total_bits_per_position) + ", raster " +
         fmt("%.6f", raster) + ", best random " + fmt("%.6f", best_random));
  return o;
}

Outcome exact_methods_agree() {
  Outcome o;
  const FieldModel m;
  for (bool worst : {false, true}) {
    const double ex = exhaustive_search(2, m, worst).front().total_bits_per_position;
    const double dp2 = dp_search(2, m, worst).total_bits_per_position;
    const double bb2 = branch_and_bound_search(2, m, worst).best.total_bits_per_position;
    o.require(std::abs(dp2 - ex) <= kExactTol, "n=2 dp vs exhaustive");
    o.require(std::abs(dp2 - bb2) <= kExactTol, "n=2 dp vs branch-and-bound");
  }
  const SubsetCostTable t4 = build_subset_costs(4, m);
  const double dp4 = dp_search(t4).total_bits_per_position;
  const BranchAndBoundResult bb4 = branch_and_bound_search(t4);
  o.require(std::abs(dp4 - bb4.best.total_bits_per_position) <= kExactTol, "n=4 dp vs branch-and-bound");
  o.note("n=4 B&B expanded " + std::to_string(bb4.nodes_expanded) + " nodes");
  return o;
}

Outcome ablation_orders() {
  Outcome o;
  const FieldModel m;
  const std::vector<Mode> modes{Mode::multistage(dp_search(4, m).order), Mode::multistage(PatchOrder::raster(4)),
                                Mode::multistage(dp_search(4, m, true).order), Mode::multistage(dp_search(2, m).order),
                                Mode::multistage(dp_search(2, m, true).order)};
  const auto seeds = seed_range(kSeeds);
  const auto r = measure_rates(LatentDims(64, 64), m, modes, seeds);
  auto gap = [&](int lo, int hi, const char* name) {
    const double lb = paired_lower_bound(r[lo].per_seed_bits_per_position, r[hi].per_seed_bits_per_position);
    o.require(r[lo].bits_per_position < r[hi].bits_per_position && lb > 0, std::string(name) + " gap not significant");
    o.note(std::string(name) + " gap " + fmt("%.4f", r[hi].bits_per_position - r[lo].bits_per_position) +
           " (lower 95% " + fmt("%.4f", lb) + ")");
  };
  gap(0, 1, "best4<raster4");
  gap(1, 2, "raster4<worst4");
  gap(3, 4, "best2<worst2");
  return o;
}

Outcome mode_ordering() {
  Outcome o;
  const FieldModel m;
  const std::vector<Mode> modes{Mode::nocontext(), Mode::checkerboard(), Mode::multistage(dp_search(2, m).order),
                                Mode::multistage(dp_search(4, m).order)};
  const auto r = measure_rates(LatentDims(64, 64), m, modes, seed_range(kSeeds));
  const double none = r[0].bits_per_position, cb = r[1].bits_per_position, b2 = r[2].bits_per_position,
               b4 = r[3].bits_per_position;
  o.require(none > cb, "nocontext <= checkerboard");
  o.require(cb > b2, "checkerboard <= 2x2 best");
  o.require(b4 <= b2 + kFourByFourSlack, "4x4 best > 2x2 best + 0.005");
  o.note("nocontext " + fmt("%.4f", none) + ", checkerboard " + fmt("%.4f", cb) + ", 2x2 " + fmt("%.4f", b2) +
         ", 4x4 " + fmt("%.4f", b4));
  return o;
}

Outcome codec_correctness() {
  Outcome o;
  const FieldModel m;
  const LatentDims d(64, 64);
  const std::vector<Mode> modes{Mode::nocontext(),
                                Mode::checkerboard(),
                                Mode::ar(),
                                Mode::multistage(dp_search(2, m).order),
                                Mode::multistage(dp_search(4, m).order),
                                Mode::multistage(dp_search(4, m, true).order)};
  MeasureOptions opts;
  opts.verify = true;
  const auto r = measure_rates(d, m, modes, seed_range(kRoundTripSeeds), opts);
  const double flush = kRateFlushBits / static_cast<double>(d.positions());
  for (const RateReport& rep : r) {
    const std::string name = rep.mode + (rep.order.empty() ? "" : ":" + rep.order);
    o.require(rep.round_trip == "ok", name + " round trip failed");
    const double th = rep.theoretical_bits_per_position;
    const bool inside = rep.bits_per_position >= th - kRateLowSlack &&
                        rep.bits_per_position <= th * kRateHighFactor + flush;
    o.require(inside, name + " rate " + fmt("%.4f", rep.bits_per_position) + " outside [" +
                          fmt("%.4f", th - kRateLowSlack) + ", " + fmt("%.4f", th * kRateHighFactor + flush) + "]");
  }
  o.note("600 streams round-tripped");
  return o;
}

Outcome structural_constants() {
  Outcome o;
  o.require(anchor_fraction(StageMap::from_order(PatchOrder::raster(2))) == Fraction{1, 4}, "2x2 anchors");
  o.require(anchor_fraction(StageMap::from_order(PatchOrder::raster(4))) == Fraction{1, 16}, "4x4 anchors");
  o.require(anchor_fraction(StageMap::checkerboard()) == Fraction{1, 2}, "checkerboard anchors");
  const LatentDims d(48, 32);
  for (int n : {1, 2, 3, 4}) {
    o.require(build_schedule(Mode::multistage(PatchOrder::raster(n)), LatentDims(48, 48)).num_stages == n * n,
              std::to_string(n) + "x" + std::to_string(n) + " stage count");
  }
  o.require(build_schedule(Mode::checkerboard(), d).num_stages == 2, "checkerboard stage count");
  o.require(build_schedule(Mode::ar(), d).num_stages == d.positions(), "ar stage count");
  o.require(required_padding_multiple(2) == 64, "n=2 padding");
  o.require(required_padding_multiple(3) == 192, "n=3 padding");
  o.require(required_padding_multiple(4) == 64, "n=4 padding");
  return o;
}

Outcome oracle_invariants() {
  Outcome o;
  const FieldModel m;
  std::mt19937_64 rng(99);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto big = static_cast<std::uint32_t>(rng()) & ContextMask::kAllBits;
    const auto small = big & static_cast<std::uint32_t>(rng());
    const double vb = cond_stats(m, ContextMask::from_bits(big)).cond_variance;
    const double vs = cond_stats(m, ContextMask::from_bits(small)).cond_variance;
    violations += vb <= vs + kMonotoneSlack * m.variance ? 0 : 1;
  }
  o.require(violations == 0, std::to_string(violations) + " monotonicity violations");

  double worst_rel = 0;
  auto check_orbit = [&](const PatchOrder& ord) {
    const double s0 = score_order(ord, m).total_bits_per_position;
    for (int g = 1; g < 8; ++g) {
      const double s = score_order(transform_order(ord, g), m).total_bits_per_position;
      worst_rel = std::max(worst_rel, std::abs(s - s0) / s0);
    }
  };
  for (const PatchOrder& ord : all_orders(2)) check_orbit(ord);
  for (int i = 0; i < 50; ++i) check_orbit(random_order(4, rng));
  o.require(worst_rel <= kSymmetryRelTol, "D4 relative deviation " + fmt("%.3g", worst_rel));

  const CondStats st = cond_stats(m, ar_causal_mask(), kDefaultQuantNoise, NoisePlacement::context_only);
  double se = 0;
  int count = 0;
  for (std::uint64_t seed = 5000; count < 10000; ++seed) {
    const Grid<double> g = sample_field(m, LatentDims(64, 64), seed);
    for (int y = 2; y < 62; y += 6)
      for (int x = 2; x < 62; x += 6) {
        double mu = 0;
        for (std::size_t i = 0; i < st.offsets.size(); ++i) {
          mu += st.weights[i] * std::round(g(y + st.offsets[i].dy, x + st.offsets[i].dx));
        }
        se += (g(y, x) - mu) * (g(y, x) - mu);
        ++count;
      }
  }
  const double mse = se / count;
  o.require(std::abs(mse / st.cond_variance - 1) <= kMseRelTol,
            "predictor MSE " + fmt("%.4f", mse) + " vs " + fmt("%.4f", st.cond_variance));
  o.note("MSE/cond_variance " + fmt("%.4f", mse / st.cond_variance));
  return o;
}

Outcome latency_fit() {
  Outcome o;
  std::ifstream in(std::string(MSCS_DATA_DIR) + "/table1_decode_ms.csv");
  std::stringstream text;
  text << in.rdbuf();
  const auto samples = parse_timing_csv(text.str());
  const FitResult fit = fit_overhead(samples, 1.0);
  const auto& p = fit.predicted;  // ar, checkerboard, 2x2, 4x4
  o.require(samples.size() == 4, "expected four timings");
  o.require(p[0] > 10 * p[3] && p[3] > p[2] && p[2] > p[1], "ordering AR >> 4x4 > 2x2 > checkerboard");
  for (int i = 1; i < 4; ++i) {
    o.require(std::abs(fit.relative_residuals[i]) <= kFitRelTol,
              "row " + std::to_string(i) + " off by " + fmt("%+.1f%%", 100 * fit.relative_residuals[i]));
  }
  const double ratio = p[0] / p[1];
  const double measured = samples[0].latency / samples[1].latency;
  o.require(ratio <= measured * kRatioFactor && ratio >= measured / kRatioFactor,
            "AR/checkerboard ratio " + fmt("%.1f", ratio));
  o.note("t0 " + fmt("%.3f", fit.model.per_stage_overhead) + ", ratio " + fmt("%.1f", ratio) + " vs " +
         fmt("%.1f", measured));
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "stage masks match the expected offset sets and the brute-force oracle", 5, masks_fidelity},
      {2, "2x2 exhaustive ranking: raster best, checkerboard-like worst", 1, best_order_2x2},
      {3, "4x4 optimum beats raster and 1000 random orders", 60, raster_not_optimal_4x4},
      {4, "dp, exhaustive and branch-and-bound agree", 60, exact_methods_agree},
      {5, "measured best < raster < worst with 95% paired confidence", 120, ablation_orders},
      {6, "measured nocontext > checkerboard > 2x2 best >= 4x4 best", 120, mode_ordering},
      {7, "round trips exact and measured rates track theory", 600, codec_correctness},
      {8, "anchor fractions, stage counts and padding multiples", 1, structural_constants},
      {9, "monotonicity, dihedral invariance and predictor MSE", 600, oracle_invariants},
      {10, "latency model fitted to the decode-time table", 1, latency_fit},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.ok = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.require(secs <= c.budget_s, "runtime " + fmt("%.1f", secs) + " s over budget");
    failed += out.ok ? 0 : 1;
    std::printf("%s criterion %d: %s [%.2f s] %s\n", out.ok ? "PASS" : "FAIL", c.id, c.name, secs,
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
