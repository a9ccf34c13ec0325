#pragma once

#include <cstdint>
#include <iosfwd>
#include <json.hpp>
#include <string>
#include <variant>
#include <vector>

namespace epsurf::cli {

using Cell = std::variant<double, std::int64_t, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

/// 17 significant digits, "nan"/"inf" spelled out.
std::string format_double(double v);

/// `# schema=1`, header row, one line per row.
void write_csv(std::ostream& os, const Table& t);

/// {"config": ..., "rows": [...], "diagnostics": ...}
void write_json(std::ostream& os, const nlohmann::ordered_json& config, const Table& t,
                const nlohmann::ordered_json& diagnostics);

}  // namespace epsurf::cli
