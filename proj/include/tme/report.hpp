#pragma once

// Per-round token accounting for the two prompting policies, plus table and
// CSV rendering.

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "tme/error.hpp"

namespace tme {

struct TokenRow {
  int round = 0;
  long prompt_baseline = 0;
  long prompt_tet = 0;
  long completion_baseline = 0;
  long completion_tet = 0;
  long total_baseline = 0;
  long total_tet = 0;

  friend bool operator==(const TokenRow&, const TokenRow&) = default;
};

struct TokenReport {
  std::vector<TokenRow> rows;

  long total_baseline() const {
    long sum = 0;
    for (const TokenRow& r : rows) sum += r.total_baseline;
    return sum;
  }
  long total_tet() const {
    long sum = 0;
    for (const TokenRow& r : rows) sum += r.total_tet;
    return sum;
  }
  long saved() const { return total_baseline() - total_tet(); }
  double saved_pct() const {
    long base = total_baseline();
    return base == 0 ? 0.0 : static_cast<double>(saved()) / static_cast<double>(base);
  }

  friend bool operator==(const TokenReport&, const TokenReport&) = default;
};

enum class TableFormat { text, csv };

inline TableFormat table_format_from_string(const std::string& s) {
  if (s == "text") return TableFormat::text;
  if (s == "csv") return TableFormat::csv;
  fail(ErrorCode::invalid_argument, "unknown table format '" + s + "'");
}

inline constexpr const char* kCsvHeader =
    "round,prompt_baseline,prompt_tet,completion_baseline,completion_tet,"
    "total_baseline,total_tet";

inline std::string render_table(const TokenReport& report, TableFormat format) {
  std::ostringstream os;
  if (format == TableFormat::csv) {
    os << kCsvHeader << "\n";
    for (const TokenRow& r : report.rows)
      os << r.round << ',' << r.prompt_baseline << ',' << r.prompt_tet << ','
         << r.completion_baseline << ',' << r.completion_tet << ',' << r.total_baseline
         << ',' << r.total_tet << "\n";
    if (!report.rows.empty()) {
      long pb = 0, pt = 0, cb = 0, ct = 0;
      for (const TokenRow& r : report.rows) {
        pb += r.prompt_baseline;
        pt += r.prompt_tet;
        cb += r.completion_baseline;
        ct += r.completion_tet;
      }
      os << "total," << pb << ',' << pt << ',' << cb << ',' << ct << ','
         << report.total_baseline() << ',' << report.total_tet() << "\n";
    }
    return os.str();
  }

  os << std::left << std::setw(8) << "round" << std::right << std::setw(12) << "prompt_b"
     << std::setw(12) << "prompt_t" << std::setw(14) << "completion_b" << std::setw(14)
     << "completion_t" << std::setw(10) << "total_b" << std::setw(10) << "total_t"
     << std::setw(8) << "saved" << "\n";
  for (const TokenRow& r : report.rows)
    os << std::left << std::setw(8) << r.round << std::right << std::setw(12)
       << r.prompt_baseline << std::setw(12) << r.prompt_tet << std::setw(14)
       << r.completion_baseline << std::setw(14) << r.completion_tet << std::setw(10)
       << r.total_baseline << std::setw(10) << r.total_tet << std::setw(8)
       << (r.total_baseline - r.total_tet) << "\n";
  os << std::left << std::setw(8) << "total" << std::right << std::setw(12) << ""
     << std::setw(12) << "" << std::setw(14) << "" << std::setw(14) << "" << std::setw(10)
     << report.total_baseline() << std::setw(10) << report.total_tet() << std::setw(8)
     << report.saved() << "\n";
  os << "saved " << report.saved() << " tokens (" << std::fixed << std::setprecision(1)
     << report.saved_pct() * 100.0 << "%) across " << report.rows.size() << " rounds\n";
  return os.str();
}

}  // namespace tme
