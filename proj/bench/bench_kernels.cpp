// Serial vs OpenMP timings of the data-parallel kernels. Prints CSV:
// kernel,size,threads,serial_ms,parallel_ms,speedup,identical
//
// usage: mscs_bench [reps]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "mscs/gaussfield.hpp"
#include "mscs/mscodec.hpp"
#include "mscs/ordersearch.hpp"
#include "mscs/parallel.hpp"

using namespace mscs;

namespace {

double best_ms(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

template <typename T>
void row(const char* kernel, const char* size, int reps, const std::function<T(Exec)>& fn) {
  T a{}, b{};
  const double s = best_ms(reps, [&] { a = fn(Exec::serial); });
  const double p = best_ms(reps, [&] { b = fn(Exec::parallel); });
  std::printf("%s,%s,%d,%.3f,%.3f,%.2f,%s\n", kernel, size, max_threads(), s, p, s / p, a == b ? "yes" : "no");
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  configure_threads_from_env();
  const int reps = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
  const FieldModel m;
  std::printf("kernel,size,threads,serial_ms,parallel_ms,speedup,identical\n");

  row<Grid<double>>("sample_field", "1024x1024", reps,
                    [&](Exec e) { return sample_field(m, LatentDims(1024, 1024), 7, e); });

  row<std::vector<double>>("build_subset_costs", "n=4", reps, [&](Exec e) {
    const SubsetCostTable t = build_subset_costs(4, m, kDefaultQuantNoise, e);
    std::vector<double> v;
    for (std::uint32_t s = 0; s <= t.full_set(); s += 97) v.push_back(t.cost(static_cast<int>(s % 16), s & ~(1u << (s % 16))));
    return v;
  });

  const SubsetCostTable table = build_subset_costs(4, m);
  row<std::string>("dp_search", "n=4", reps, [&](Exec e) { return format_order(dp_search(table, false, e).order); });

  const QuantGrid grid = quantize(sample_field(m, LatentDims(256, 256), 1), m);
  const Mode mode = Mode::multistage(dp_search(table).order);
  row<std::vector<std::uint8_t>>("encode", "256x256 4x4", reps, [&](Exec e) {
    return encode(grid, mode, m, CodecOptions{kDefaultQuantNoise, e}).serialize();
  });
  const Bitstream bs = encode(grid, mode, m);
  row<QuantGrid>("decode", "256x256 4x4", reps,
                 [&](Exec e) { return decode(bs, m, CodecOptions{kDefaultQuantNoise, e}); });
  return 0;
}
