#pragma once

// Tabular reports. CSV columns are fixed; JSON objects use the same field
// names. Reals are printed with 17 significant digits so that CSV parses back
// to identical doubles.

#include <string>
#include <vector>

#include "mscs/gaussfield.hpp"
#include "mscs/mscodec.hpp"

namespace mscs {

/// order,total_bits,per_stage_bits,method,sigma2,rho,cov
/// per_stage_bits is semicolon-joined.
struct OrderRow {
  std::string order;
  double total_bits = 0.0;
  std::vector<double> per_stage_bits;
  std::string method;
  double sigma2 = 0.0;
  double rho = 0.0;
  std::string cov;

  friend bool operator==(const OrderRow&, const OrderRow&) = default;
};

OrderRow make_order_row(const OrderScore& score, const std::string& method, const FieldModel& model);

inline constexpr const char* kOrderCsvHeader = "order,total_bits,per_stage_bits,method,sigma2,rho,cov";
inline constexpr const char* kRateCsvHeader =
    "mode,order,height,width,seeds,total_bits,payload_bits,bits_per_position,bits_per_position_sd,"
    "theoretical_bits_per_position,per_stage_bits,round_trip";

std::string format_real(double v);

std::string orders_to_csv(const std::vector<OrderRow>& rows);
std::vector<OrderRow> parse_orders_csv(const std::string& text);
std::string orders_to_json(const std::vector<OrderRow>& rows);

std::string rates_to_csv(const std::vector<RateReport>& reports);
/// Restores every CSV column; per-seed rates are JSON-only and stay empty.
std::vector<RateReport> parse_rates_csv(const std::string& text);
std::string rates_to_json(const std::vector<RateReport>& reports);

}  // namespace mscs
