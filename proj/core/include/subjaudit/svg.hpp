#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subjaudit/dense.hpp"

namespace subjaudit {

/// Fixed categorical palette; colors repeat after the last entry.
const std::vector<std::string>& palette();

struct Bar {
  std::string label;
  /// Missing values are drawn as an empty slot marked "n/a".
  std::optional<double> value;
};

/// Vertical bar chart with a zero-based y axis.
std::string bar_chart_svg(const std::string& title, const std::string& y_label, std::span<const Bar> bars);

/// Scatter plot of the rows of `points` (n x 2), colored by label in sorted
/// label order, with a legend.
std::string scatter_svg(const std::string& title, const DenseMatrix& points, std::span<const std::string> labels);

/// Escapes &, <, >, " and ' for XML text and attributes.
std::string xml_escape(std::string_view text);

}  // namespace subjaudit
