// mscs: decoding-order search, mask inspection, codec benchmarking, padding
// and wavefront simulation for multistage spatial context models.
//
// Exit codes: 0 success, 1 internal error, 2 usage error.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mscs/ctxmask.hpp"
#include "mscs/error.hpp"
#include "mscs/gaussfield.hpp"
#include "mscs/latgrid.hpp"
#include "mscs/mscodec.hpp"
#include "mscs/ordersearch.hpp"
#include "mscs/parallel.hpp"
#include "mscs/parsim.hpp"
#include "mscs/report.hpp"

namespace {

using namespace mscs;

constexpr const char* kFooter = R"(CSV schemas:
  orders:   order,total_bits,per_stage_bits,method,sigma2,rho,cov
  codec:    mode,order,height,width,seeds,total_bits,payload_bits,bits_per_position,
            bits_per_position_sd,theoretical_bits_per_position,per_stage_bits,round_trip
  simulate: mode,height,width,stages,max_stage_width,latency
  pad:      height,width,padded_height,padded_width,multiple,overhead
per_stage_bits is semicolon-joined. JSON output uses the same field names.
Environment: MSCS_THREADS caps worker threads (0 = OpenMP default).
Exit codes: 0 success, 1 internal error, 2 usage error.)";

struct ModelFlags {
  double sigma2 = 25.0;
  double rho = 0.9;
  std::string cov = "separable";
  double quant_noise = kDefaultQuantNoise;

  void add(CLI::App* cmd) {
    cmd->add_option("--sigma2", sigma2, "Marginal variance of the latent field")->capture_default_str();
    cmd->add_option("--rho", rho, "Correlation decay per unit lag, in (0, 1)")->capture_default_str();
    cmd->add_option("--cov", cov, "Covariance kind")->check(CLI::IsMember({"separable", "isotropic"}))
        ->capture_default_str();
    cmd->add_option("--quant-noise", quant_noise, "Quantization noise variance")->capture_default_str();
  }
  [[nodiscard]] FieldModel model() const {
    FieldModel m{sigma2, rho, parse_cov_kind(cov)};
    m.validate();
    return m;
  }
};

struct OutputFlags {
  std::string format = "text";
  std::string path;

  void add(CLI::App* cmd) {
    cmd->add_option("--report", format, "Output format")->check(CLI::IsMember({"text", "csv", "json"}))
        ->capture_default_str();
    cmd->add_option("-o,--output", path, "Write the report to a file instead of stdout");
  }
  void emit(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << text;
  }
};

// --- orders ----------------------------------------------------------------

struct OrdersFlags {
  int n = 2;
  std::string method = "dp";
  std::string order;
  bool worst = false;
  bool allow_n3 = false;
  ModelFlags model;
  OutputFlags out;
};

std::string render_orders(const std::vector<OrderRow>& rows, const std::string& format) {
  if (format == "csv") return orders_to_csv(rows);
  if (format == "json") return orders_to_json(rows);
  std::string text;
  for (const OrderRow& r : rows) text += r.order + " " + format_real(r.total_bits) + "\n";
  return text;
}

int cmd_orders(const std::string& sub, const OrdersFlags& f) {
  const FieldModel model = f.model.model();
  std::vector<OrderRow> rows;
  if (sub == "enumerate") {
    if (f.n > 3) throw InvalidArgument("enumerate supports n <= 3; use 'orders optimize' for n = 4");
    for (const OrderScore& s : exhaustive_search(f.n, model, f.worst, f.allow_n3, f.model.quant_noise)) {
      rows.push_back(make_order_row(s, "exhaustive", model));
    }
  } else if (sub == "optimize") {
    if (f.method == "exhaustive") {
      rows.push_back(
          make_order_row(exhaustive_search(f.n, model, f.worst, f.allow_n3, f.model.quant_noise).front(),
                         "exhaustive", model));
    } else {
      const SubsetCostTable table = build_subset_costs(f.n, model, f.model.quant_noise);
      if (f.method == "dp") {
        rows.push_back(make_order_row(dp_search(table, f.worst), "dp", model));
      } else {
        const BranchAndBoundResult r = branch_and_bound_search(table, f.worst);
        rows.push_back(make_order_row(r.best, "dfs", model));
        std::cerr << "dfs: " << r.nodes_expanded << " nodes expanded, pruning ratio "
                  << format_real(r.pruning_ratio) << "\n";
      }
    }
  } else {  // score
    if (f.order.empty()) throw InvalidArgument("score needs --order");
    const PatchOrder order = parse_order(f.order);
    if (order.n() != f.n) throw InvalidArgument("--order has side " + std::to_string(order.n()) + ", --n is " +
                                                std::to_string(f.n));
    rows.push_back(make_order_row(score_order(order, model, f.model.quant_noise), "score", model));
  }
  f.out.emit(render_orders(rows, f.out.format));
  return 0;
}

// --- masks -----------------------------------------------------------------

struct MasksFlags {
  int n = 2;
  std::string order;
  int stage = 0;
  bool checkerboard = false;
  int parity = 0;
  bool ar = false;
  OutputFlags out;
};

int cmd_masks(const MasksFlags& f) {
  ContextMask mask;
  std::string label;
  if (f.ar) {
    mask = ar_causal_mask();
    label = "ar";
  } else {
    const StageMap map = f.checkerboard ? StageMap::checkerboard(f.parity)
                                        : StageMap::from_order(f.order.empty() ? PatchOrder::raster(f.n)
                                                                               : parse_order(f.order));
    if (!f.checkerboard && map.n() != f.n) throw InvalidArgument("--order does not match --n");
    mask = stage_mask(map, f.stage);
    label = f.checkerboard ? "checkerboard" : format_order(PatchOrder(map.n(), map.cells()));
  }
  std::string offsets;
  for (const Offset& o : mask.offsets()) {
    offsets += (offsets.empty() ? "" : " ") + ("(" + std::to_string(o.dy) + "," + std::to_string(o.dx) + ")");
  }
  if (f.out.format == "json") {
    nlohmann::json j{{"order", label},
                     {"stage", f.ar ? 0 : f.stage},
                     {"mask", render_ascii(mask)},
                     {"available", mask.count()},
                     {"offsets", offsets},
                     {"four_adjacency", four_adjacency_count(mask)}};
    f.out.emit(j.dump(2) + "\n");
  } else if (f.out.format == "csv") {
    f.out.emit("order,stage,available,four_adjacency,offsets\n" + label + "," + std::to_string(f.stage) + "," +
               std::to_string(mask.count()) + "," + std::to_string(four_adjacency_count(mask)) + "," + offsets +
               "\n");
  } else {
    f.out.emit(render_ascii(mask) + "available: " + std::to_string(mask.count()) + "\noffsets: " + offsets +
               "\nfour_adjacency: " + std::to_string(four_adjacency_count(mask)) + "\n");
  }
  return 0;
}

// --- codec -----------------------------------------------------------------

struct CodecFlags {
  std::string mode = "multistage";
  int n = 2;
  std::string order = "best";
  int parity = 0;
  int height = 64;
  int width = 64;
  std::uint64_t seed = 0;
  int seeds_count = 1;
  std::string bitstream_path;
  bool verify = false;
  ModelFlags model;
  OutputFlags out;
};

Mode resolve_mode(const CodecFlags& f, const FieldModel& model) {
  const ModeKind kind = parse_mode_kind(f.mode);
  if (kind == ModeKind::checkerboard) return Mode::checkerboard(f.parity);
  if (kind != ModeKind::multistage) return kind == ModeKind::ar ? Mode::ar() : Mode::nocontext();
  if (f.order == "raster") return Mode::multistage(PatchOrder::raster(f.n));
  if (f.order == "best" || f.order == "worst") {
    if (f.n == 1) return Mode::multistage(PatchOrder::raster(1));
    return Mode::multistage(dp_search(f.n, model, f.order == "worst", f.model.quant_noise).order);
  }
  PatchOrder order = parse_order(f.order);
  if (order.n() != f.n) throw InvalidArgument("--order does not match --n");
  return Mode::multistage(std::move(order));
}

int cmd_codec(const CodecFlags& f) {
  const FieldModel model = f.model.model();
  if (f.seeds_count < 1) throw InvalidArgument("--seeds-count must be >= 1");
  const LatentDims dims(f.height, f.width);
  const Mode mode = resolve_mode(f, model);
  if (dims.height < 8 || dims.width < 8) throw InvalidArgument("codec requires at least an 8x8 grid");
  require_compatible(mode, dims);
  if (model.kind != CovKind::separable) throw InvalidArgument("codec bench samples fields; use --cov separable");

  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < f.seeds_count; ++i) seeds.push_back(f.seed + static_cast<std::uint64_t>(i));
  MeasureOptions opts;
  opts.codec.quant_noise = f.model.quant_noise;
  opts.verify = f.verify;
  const std::vector<Mode> modes{mode};
  const std::vector<RateReport> reports = measure_rates(dims, model, modes, seeds, opts);

  if (!f.bitstream_path.empty()) {
    const QuantGrid grid = quantize(sample_field(model, dims, f.seed), model);
    const auto bytes = encode(grid, mode, model, opts.codec).serialize();
    std::ofstream out(f.bitstream_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + f.bitstream_path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }

  if (f.out.format == "csv") {
    f.out.emit(rates_to_csv(reports));
  } else if (f.out.format == "json") {
    f.out.emit(rates_to_json(reports));
  } else {
    const RateReport& r = reports.front();
    std::ostringstream s;
    s << "mode: " << r.mode << (r.order.empty() ? "" : " " + r.order) << "\n"
      << "grid: " << r.dims.height << "x" << r.dims.width << ", seeds: " << r.seeds << "\n"
      << "bits_per_position: " << format_real(r.bits_per_position) << " (sd "
      << format_real(r.bits_per_position_sd) << ")\n"
      << "theoretical_bits_per_position: " << format_real(r.theoretical_bits_per_position) << "\n"
      << "total_bits: " << format_real(r.total_bits) << "\n"
      << "round_trip: " << r.round_trip << "\n";
    f.out.emit(s.str());
  }
  return reports.front().round_trip == "fail" ? 1 : 0;
}

// --- pad -------------------------------------------------------------------

struct PadFlags {
  int n = 2;
  std::int64_t height = 0;
  std::int64_t width = 0;
  OutputFlags out;
};

int cmd_pad(const PadFlags& f) {
  const PaddedDims p = pad_image_dims(f.height, f.width, f.n);
  const std::int64_t m = required_padding_multiple(f.n);
  if (f.out.format == "csv") {
    f.out.emit("height,width,padded_height,padded_width,multiple,overhead\n" + std::to_string(f.height) + "," +
               std::to_string(f.width) + "," + std::to_string(p.height) + "," + std::to_string(p.width) + "," +
               std::to_string(m) + "," + format_real(p.overhead) + "\n");
  } else if (f.out.format == "json") {
    nlohmann::json j{{"height", f.height},         {"width", f.width},  {"padded_height", p.height},
                     {"padded_width", p.width},    {"multiple", m},     {"overhead", p.overhead}};
    f.out.emit(j.dump(2) + "\n");
  } else {
    char pct[32];
    std::snprintf(pct, sizeof pct, "%.4g%%", p.overhead * 100.0);
    f.out.emit(std::to_string(p.height) + "x" + std::to_string(p.width) + " (multiple " + std::to_string(m) +
               ", overhead " + pct + ")" + (f.n == 3 ? "\nwarning: n=3 patches need padding to multiples of 192" : "") +
               "\n");
  }
  return 0;
}

// --- simulate --------------------------------------------------------------

struct SimulateFlags {
  std::string mode = "4x4";
  int height = 48;
  int width = 32;
  double lanes = 1024;
  double t0 = 1.0;
  double t1 = 0.001;
  std::string fit_table;
  OutputFlags out;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cmd_simulate(const SimulateFlags& f) {
  if (!f.fit_table.empty()) {
    const std::vector<TimingSample> samples = parse_timing_csv(read_file(f.fit_table));
    const FitResult fit = fit_overhead(samples, f.lanes);
    if (f.out.format == "json") {
      nlohmann::json rows = nlohmann::json::array();
      for (std::size_t i = 0; i < samples.size(); ++i) {
        rows.push_back({{"mode", samples[i].mode.kind == ModeKind::multistage
                                     ? std::to_string(samples[i].mode.order->n()) + "x" +
                                           std::to_string(samples[i].mode.order->n())
                                     : std::string(mode_kind_name(samples[i].mode.kind))},
                        {"measured", samples[i].latency},
                        {"predicted", fit.predicted[i]},
                        {"relative_residual", fit.relative_residuals[i]}});
      }
      nlohmann::json j{{"lanes", fit.model.lanes},
                       {"t0", fit.model.per_stage_overhead},
                       {"t1", fit.model.per_position_cost},
                       {"rows", rows}};
      f.out.emit(j.dump(2) + "\n");
      return 0;
    }
    std::string text = (f.out.format == "csv" ? "" : "t0: " + format_real(fit.model.per_stage_overhead) +
                                                         "\nt1: " + format_real(fit.model.per_position_cost) +
                                                         "\nlanes: " + format_real(fit.model.lanes) + "\n");
    text += "mode,stages,measured,predicted,relative_residual\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Schedule s = build_schedule(samples[i].mode, samples[i].dims);
      text += std::string(mode_kind_name(samples[i].mode.kind)) +
              (samples[i].mode.kind == ModeKind::multistage ? ":" + std::to_string(samples[i].mode.order->n()) + "x" +
                                                                  std::to_string(samples[i].mode.order->n())
                                                            : "") +
              "," + std::to_string(s.num_stages) + "," + format_real(samples[i].latency) + "," +
              format_real(fit.predicted[i]) + "," + format_real(fit.relative_residuals[i]) + "\n";
    }
    if (f.out.format == "csv") text = "# t0=" + format_real(fit.model.per_stage_overhead) +
                                      " t1=" + format_real(fit.model.per_position_cost) + "\n" + text;
    f.out.emit(text);
    return 0;
  }

  const Schedule s = build_schedule(parse_schedule_mode(f.mode), LatentDims(f.height, f.width));
  const LatencyModel lm{f.lanes, f.t0, f.t1};
  const double latency = simulate_latency(s, lm);
  std::int64_t widest = 0;
  for (std::int64_t w : s.positions_per_stage) widest = std::max(widest, w);
  if (f.out.format == "csv") {
    f.out.emit("mode,height,width,stages,max_stage_width,latency\n" + f.mode + "," + std::to_string(f.height) + "," +
               std::to_string(f.width) + "," + std::to_string(s.num_stages) + "," + std::to_string(widest) + "," +
               format_real(latency) + "\n");
  } else if (f.out.format == "json") {
    nlohmann::json j{{"mode", f.mode},   {"height", f.height},         {"width", f.width},
                     {"stages", s.num_stages}, {"max_stage_width", widest}, {"latency", latency}};
    f.out.emit(j.dump(2) + "\n");
  } else {
    f.out.emit(f.mode + ": " + std::to_string(s.num_stages) + " stages, up to " + std::to_string(widest) +
               " positions per stage, latency " + format_real(latency) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multistage context-model toolkit: order search, masks, codec, padding, schedules"};
  app.footer(kFooter);
  app.require_subcommand(1, 1);

  OrdersFlags of;
  auto* orders = app.add_subcommand("orders", "Score and search decoding orders");
  orders->require_subcommand(1, 1);
  std::string orders_sub;
  for (const char* name : {"enumerate", "optimize", "score"}) {
    auto* sub = orders->add_subcommand(name, std::string(name) + " decoding orders");
    sub->add_option("--n", of.n, "Patch side")->check(CLI::Range(1, 4))->capture_default_str();
    sub->add_flag("--worst", of.worst, "Rank worst-first / search the worst order");
    sub->add_flag("--allow-n3", of.allow_n3, "Permit exhaustive enumeration at n = 3");
    if (std::string(name) == "optimize") {
      sub->add_option("--method", of.method, "Search method")->check(CLI::IsMember({"dp", "dfs", "exhaustive"}))
          ->capture_default_str();
    }
    if (std::string(name) == "score") sub->add_option("--order", of.order, "Order as n*n hex digits")->required();
    of.model.add(sub);
    of.out.add(sub);
    sub->callback([&orders_sub, name] { orders_sub = name; });
  }

  MasksFlags mf;
  auto* masks = app.add_subcommand("masks", "Inspect stage context masks");
  masks->require_subcommand(1, 1);
  auto* show = masks->add_subcommand("show", "Render the 5x5 context mask of a stage");
  show->add_option("--n", mf.n, "Patch side")->check(CLI::Range(1, 4))->capture_default_str();
  show->add_option("--order", mf.order, "Order as n*n hex digits (default raster)");
  show->add_option("--stage", mf.stage, "Stage index")->capture_default_str();
  show->add_flag("--checkerboard", mf.checkerboard, "Use the checkerboard stage map");
  show->add_option("--parity", mf.parity, "Checkerboard anchor parity")->check(CLI::Range(0, 1));
  show->add_flag("--ar", mf.ar, "Show the autoregressive causal mask");
  mf.out.add(show);

  CodecFlags cf;
  auto* codec = app.add_subcommand("codec", "Entropy-code synthetic latent grids");
  codec->require_subcommand(1, 1);
  auto* bench = codec->add_subcommand("bench", "Measure bitrates over seeded fields");
  bench->add_option("--mode", cf.mode, "Context model")
      ->check(CLI::IsMember({"nocontext", "checkerboard", "ar", "multistage"}))
      ->capture_default_str();
  bench->add_option("--n", cf.n, "Patch side for multistage")->check(CLI::Range(1, 4))->capture_default_str();
  bench->add_option("--order", cf.order, "Hex order, or best | worst | raster")->capture_default_str();
  bench->add_option("--parity", cf.parity, "Checkerboard anchor parity")->check(CLI::Range(0, 1));
  bench->add_option("--height", cf.height, "Latent height")->capture_default_str();
  bench->add_option("--width", cf.width, "Latent width")->capture_default_str();
  bench->add_option("--seed", cf.seed, "First seed")->capture_default_str();
  bench->add_option("--seeds-count", cf.seeds_count, "Number of consecutive seeds")->capture_default_str();
  bench->add_option("--out", cf.bitstream_path, "Write the bitstream of the first seed to this file");
  bench->add_flag("--verify", cf.verify, "Decode and compare every bitstream before reporting");
  cf.model.add(bench);
  cf.out.add(bench);

  PadFlags pf;
  auto* pad = app.add_subcommand("pad", "Padded image size for an n x n patch model");
  pad->add_option("--n", pf.n, "Patch side")->check(CLI::Range(1, 4))->capture_default_str();
  pad->add_option("--height", pf.height, "Image height")->required();
  pad->add_option("--width", pf.width, "Image width")->required();
  pf.out.add(pad);

  SimulateFlags sf;
  auto* simulate = app.add_subcommand("simulate", "Wavefront stage counts and modeled latency");
  simulate->add_option("--mode", sf.mode, "ar | checkerboard | nocontext | 2x2 | 3x3 | 4x4")->capture_default_str();
  simulate->add_option("--height", sf.height, "Latent height")->capture_default_str();
  simulate->add_option("--width", sf.width, "Latent width")->capture_default_str();
  simulate->add_option("--lanes", sf.lanes, "Parallel lanes P")->capture_default_str();
  simulate->add_option("--t0", sf.t0, "Per-stage overhead")->capture_default_str();
  simulate->add_option("--t1", sf.t1, "Per-position cost")->capture_default_str();
  simulate->add_option("--fit-table", sf.fit_table, "CSV of measured latencies (mode,height,width,latency)");
  sf.out.add(simulate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    configure_threads_from_env();
    if (orders->parsed()) return cmd_orders(orders_sub, of);
    if (masks->parsed()) return cmd_masks(mf);
    if (codec->parsed()) return cmd_codec(cf);
    if (pad->parsed()) return cmd_pad(pf);
    return cmd_simulate(sf);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
