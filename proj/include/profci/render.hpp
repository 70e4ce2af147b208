#pragma once

#include "profci/reporting.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace profci {

enum class ReportFormat { csv, json, svg };

std::optional<ReportFormat> report_format_from_string(std::string_view s);

using Series = std::vector<std::pair<Timestamp, int>>;
using SeriesSet = std::vector<std::pair<std::string, Series>>; // (user, points)

// All renderers produce deterministic bytes for equal inputs. CSV uses
// ',' with blank cells empty; SVG is a static chart (step lines for
// series, grids for matrix and punch card). Unsupported pairings raise
// unsupported_combination.
std::string render_report(const TimeMatrix& matrix, ReportFormat format);
std::string render_report(const SeriesSet& series, ReportFormat format);
std::string render_report(const PunchCard& card, ReportFormat format);
std::string render_report(const std::vector<StuckUser>& stuck, ReportFormat format); // no svg

} // namespace profci
