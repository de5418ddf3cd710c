#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace hotelling::io {

/// %.17g; NaN and infinities become null (JSON) or the empty field (CSV).
std::string format_double(double v);

/// Compact single-line JSON with every float written to 17 significant digits.
std::string dump(const nlohmann::json& j);

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace hotelling::io
