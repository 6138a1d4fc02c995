#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surpdec/candidates.hpp"
#include "surpdec/experiment.hpp"
#include "surpdec/types.hpp"

namespace surpdec {

/// Fixed ten-decimal rendering used in every CSV so reruns are byte-identical.
std::string format_number(double v);
/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(std::string_view s);

std::string items_csv(std::span<const DecompositionResult> results);
std::string summary_csv(std::span<const ConditionSummary> summaries);
std::string frontier_csv(std::span<const FrontierPoint> points);
std::string grid_csv(std::span<const GridRow> rows);
std::string failures_csv(std::span<const ItemFailure> failures);

/// Depth on the x axis, expected distortion on the y axis.
std::string frontier_svg(std::span<const FrontierPoint> points, std::string_view title);
/// Paired bars of N400 / P600 effects per experimental condition.
std::string effects_svg(std::span<const ConditionSummary> summaries, std::string_view title);

}  // namespace surpdec
