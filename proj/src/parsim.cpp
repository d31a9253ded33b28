#include "mscs/parsim.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "mscs/error.hpp"

namespace mscs {

std::int64_t Schedule::total_positions() const {
  return std::accumulate(positions_per_stage.begin(), positions_per_stage.end(), std::int64_t{0});
}

void LatencyModel::validate() const {
  if (!(lanes >= 1.0)) throw InvalidArgument("lanes must be >= 1");
  if (!(per_stage_overhead > 0.0) || !(per_position_cost > 0.0)) {
    throw InvalidArgument("t0 and t1 must be > 0");
  }
}

Schedule build_schedule(const Mode& mode, const LatentDims& dims) {
  require_compatible(mode, dims);
  const std::int64_t total = dims.positions();
  Schedule s{mode, dims, 0, {}};
  switch (mode.kind) {
    case ModeKind::nocontext: s.positions_per_stage = {total}; break;
    case ModeKind::ar: s.positions_per_stage.assign(static_cast<std::size_t>(total), 1); break;
    case ModeKind::checkerboard: s.positions_per_stage = {total / 2, total - total / 2}; break;
    case ModeKind::multistage: {
      const int cells = mode.order->cells();
      s.positions_per_stage.assign(cells, total / cells);
      break;
    }
  }
  s.num_stages = static_cast<std::int64_t>(s.positions_per_stage.size());
  return s;
}

double simulate_latency(const Schedule& schedule, const LatencyModel& model) {
  model.validate();
  double t = 0.0;
  for (std::int64_t n : schedule.positions_per_stage) {
    t += model.per_stage_overhead + static_cast<double>(n) * model.per_position_cost / model.lanes;
  }
  return t;
}

FitResult fit_overhead(std::span<const TimingSample> samples, double lanes) {
  if (!(lanes >= 1.0)) throw InvalidArgument("lanes must be >= 1");
  if (samples.size() < 2) throw InvalidArgument("fit needs at least two timing samples");

  // latency = t0 * stages + t1 * (positions / lanes)
  double saa = 0, sab = 0, sbb = 0, sal = 0, sbl = 0;
  std::vector<double> a, b;
  for (const TimingSample& smp : samples) {
    const Schedule sch = build_schedule(smp.mode, smp.dims);
    a.push_back(static_cast<double>(sch.num_stages));
    b.push_back(static_cast<double>(sch.total_positions()) / lanes);
    saa += a.back() * a.back();
    sab += a.back() * b.back();
    sbb += b.back() * b.back();
    sal += a.back() * smp.latency;
    sbl += b.back() * smp.latency;
  }
  const double det = saa * sbb - sab * sab;
  if (std::abs(det) <= 1e-12 * saa * sbb) {
    throw InvalidArgument("timing samples do not determine both t0 and t1 (need distinct stage counts)");
  }
  FitResult out;
  out.model.lanes = lanes;
  out.model.per_stage_overhead = (sal * sbb - sbl * sab) / det;
  out.model.per_position_cost = (saa * sbl - sab * sal) / det;
  if (!(out.model.per_stage_overhead > 0.0) || !(out.model.per_position_cost > 0.0)) {
    throw InvalidArgument("least-squares fit gave non-positive t0 or t1");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double pred = out.model.per_stage_overhead * a[i] + out.model.per_position_cost * b[i];
    out.predicted.push_back(pred);
    out.residuals.push_back(pred - samples[i].latency);
    out.relative_residuals.push_back((pred - samples[i].latency) / samples[i].latency);
  }
  return out;
}

Mode parse_schedule_mode(const std::string& text) {
  if (text == "ar") return Mode::ar();
  if (text == "checkerboard") return Mode::checkerboard();
  if (text == "nocontext") return Mode::nocontext();
  if (text.size() == 3 && text[1] == 'x' && text[0] == text[2] && text[0] >= '1' && text[0] <= '4') {
    return Mode::multistage(PatchOrder::raster(text[0] - '0'));
  }
  throw InvalidArgument("unknown schedule mode '" + text + "' (ar, checkerboard, nocontext, 2x2, 3x3, 4x4)");
}

std::vector<TimingSample> parse_timing_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<TimingSample> out;
  bool header = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      if (line != "mode,height,width,latency") {
        throw InvalidArgument("timing CSV header must be 'mode,height,width,latency'");
      }
      header = false;
      continue;
    }
    std::istringstream row(line);
    std::string mode, h, w, lat;
    if (!std::getline(row, mode, ',') || !std::getline(row, h, ',') || !std::getline(row, w, ',') ||
        !std::getline(row, lat)) {
      throw InvalidArgument("timing CSV line " + std::to_string(lineno) + " needs 4 fields");
    }
    try {
      out.push_back({parse_schedule_mode(mode), LatentDims(std::stoi(h), std::stoi(w)), std::stod(lat)});
    } catch (const std::logic_error& e) {
      throw InvalidArgument("timing CSV line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace mscs
