#include "mscs/report.hpp"

#include <cstdio>
#include <json.hpp>
#include <sstream>

#include "mscs/error.hpp"

namespace mscs {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string join_reals(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(';');
    out += format_real(v[i]);
  }
  return out;
}

std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> out;
  if (s.empty()) return out;
  for (const std::string& part : split(s, ';')) out.push_back(std::stod(part));
  return out;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text, const char* header, std::size_t columns) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != header) throw InvalidArgument("unexpected CSV header");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != columns) throw InvalidArgument("CSV row has " + std::to_string(fields.size()) + " fields");
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

OrderRow make_order_row(const OrderScore& score, const std::string& method, const FieldModel& model) {
  return {format_order(score.order), score.total_bits_per_position, score.per_stage_bits, method,
          model.variance,            model.rho,                     std::string(cov_kind_name(model.kind))};
}

std::string orders_to_csv(const std::vector<OrderRow>& rows) {
  std::string out = std::string(kOrderCsvHeader) + "\n";
  for (const OrderRow& r : rows) {
    out += r.order + "," + format_real(r.total_bits) + "," + join_reals(r.per_stage_bits) + "," + r.method + "," +
           format_real(r.sigma2) + "," + format_real(r.rho) + "," + r.cov + "\n";
  }
  return out;
}

std::vector<OrderRow> parse_orders_csv(const std::string& text) {
  std::vector<OrderRow> out;
  for (const auto& f : csv_rows(text, kOrderCsvHeader, 7)) {
    out.push_back({f[0], std::stod(f[1]), parse_reals(f[2]), f[3], std::stod(f[4]), std::stod(f[5]), f[6]});
  }
  return out;
}

std::string orders_to_json(const std::vector<OrderRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const OrderRow& r : rows) {
    arr.push_back({{"order", r.order},
                   {"total_bits", r.total_bits},
                   {"per_stage_bits", r.per_stage_bits},
                   {"method", r.method},
                   {"sigma2", r.sigma2},
                   {"rho", r.rho},
                   {"cov", r.cov}});
  }
  return arr.dump(2) + "\n";
}

std::string rates_to_csv(const std::vector<RateReport>& reports) {
  std::string out = std::string(kRateCsvHeader) + "\n";
  for (const RateReport& r : reports) {
    out += r.mode + "," + r.order + "," + std::to_string(r.dims.height) + "," + std::to_string(r.dims.width) + "," +
           std::to_string(r.seeds) + "," + format_real(r.total_bits) + "," + format_real(r.payload_bits) + "," +
           format_real(r.bits_per_position) + "," + format_real(r.bits_per_position_sd) + "," +
           format_real(r.theoretical_bits_per_position) + "," + join_reals(r.per_stage_bits) + "," + r.round_trip +
           "\n";
  }
  return out;
}

std::vector<RateReport> parse_rates_csv(const std::string& text) {
  std::vector<RateReport> out;
  for (const auto& f : csv_rows(text, kRateCsvHeader, 12)) {
    RateReport r;
    r.mode = f[0];
    r.order = f[1];
    r.dims = LatentDims(std::stoi(f[2]), std::stoi(f[3]));
    r.seeds = std::stoi(f[4]);
    r.total_bits = std::stod(f[5]);
    r.payload_bits = std::stod(f[6]);
    r.bits_per_position = std::stod(f[7]);
    r.bits_per_position_sd = std::stod(f[8]);
    r.theoretical_bits_per_position = std::stod(f[9]);
    r.per_stage_bits = parse_reals(f[10]);
    r.round_trip = f[11];
    out.push_back(std::move(r));
  }
  return out;
}

std::string rates_to_json(const std::vector<RateReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const RateReport& r : reports) {
    arr.push_back({{"mode", r.mode},
                   {"order", r.order},
                   {"height", r.dims.height},
                   {"width", r.dims.width},
                   {"seeds", r.seeds},
                   {"total_bits", r.total_bits},
                   {"payload_bits", r.payload_bits},
                   {"bits_per_position", r.bits_per_position},
                   {"bits_per_position_sd", r.bits_per_position_sd},
                   {"theoretical_bits_per_position", r.theoretical_bits_per_position},
                   {"per_stage_bits", r.per_stage_bits},
                   {"round_trip", r.round_trip},
                   {"per_seed_bits_per_position", r.per_seed_bits_per_position}});
  }
  return arr.dump(2) + "\n";
}

}  // namespace mscs
