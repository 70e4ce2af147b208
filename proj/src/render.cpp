#include "profci/render.hpp"

#include "profci/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace profci {

using nlohmann::json;

namespace {

const char* kWeekdays[7] = {"Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};

const char* kPalette[10] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string format_minutes(double minutes) {
    long long i = std::llround(minutes);
    if (std::fabs(minutes - static_cast<double>(i)) < 1e-9) return std::to_string(i);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", minutes);
    return buf;
}

std::string f1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string svg_open(int width, int height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
           std::to_string(width) + " " + std::to_string(height) + "\">\n";
}

// white -> steel blue
std::string heat_color(double intensity) {
    intensity = std::clamp(intensity, 0.0, 1.0);
    int r = static_cast<int>(std::lround(255 + (43 - 255) * intensity));
    int g = static_cast<int>(std::lround(255 + (108 - 255) * intensity));
    int b = static_cast<int>(std::lround(255 + (176 - 255) * intensity));
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

std::string matrix_csv(const TimeMatrix& matrix) {
    std::string out = "user";
    for (const std::string& id : matrix.task_ids) out += "," + csv_field(id);
    out += "\n";
    for (size_t u = 0; u < matrix.users.size(); ++u) {
        out += csv_field(matrix.users[u]);
        for (size_t k = 0; k < matrix.task_ids.size(); ++k) {
            const TimeMatrix::Cell& cell = matrix.cells[u][k];
            out += ",";
            if (!cell.blank) out += format_minutes(cell.minutes());
        }
        out += "\n";
    }
    return out;
}

std::string matrix_json(const TimeMatrix& matrix) {
    json cells = json::array();
    for (size_t u = 0; u < matrix.users.size(); ++u) {
        json row = json::array();
        for (size_t k = 0; k < matrix.task_ids.size(); ++k) {
            const TimeMatrix::Cell& cell = matrix.cells[u][k];
            if (cell.blank)
                row.push_back(nullptr);
            else
                row.push_back(cell.minutes());
        }
        cells.push_back(std::move(row));
    }
    return json{{"users", matrix.users}, {"tasks", matrix.task_ids}, {"cells", cells}}.dump(2) +
           "\n";
}

std::string matrix_svg(const TimeMatrix& matrix) {
    const int cell = 22, left = 120, top = 40, gap = 2;
    const int width = left + static_cast<int>(matrix.task_ids.size()) * cell + 20;
    const int height = top + static_cast<int>(matrix.users.size()) * cell + 20;

    double max_minutes = 0;
    for (const auto& row : matrix.cells)
        for (const auto& c : row)
            if (!c.blank) max_minutes = std::max(max_minutes, c.minutes());

    std::string svg = svg_open(width, height);
    svg += "<style>text{font-family:sans-serif;font-size:10px;}</style>\n";
    for (size_t k = 0; k < matrix.task_ids.size(); ++k) {
        int x = left + static_cast<int>(k) * cell;
        svg += "<text x=\"" + std::to_string(x + cell / 2) + "\" y=\"" + std::to_string(top - 6) +
               "\" text-anchor=\"middle\">" + std::to_string(k) + "</text>\n";
    }
    for (size_t u = 0; u < matrix.users.size(); ++u) {
        int y = top + static_cast<int>(u) * cell;
        svg += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" + std::to_string(y + 15) +
               "\" text-anchor=\"end\">" + xml_escape(matrix.users[u]) + "</text>\n";
        for (size_t k = 0; k < matrix.task_ids.size(); ++k) {
            const TimeMatrix::Cell& c = matrix.cells[u][k];
            std::string fill =
                c.blank ? "#f2f2f2"
                        : heat_color(max_minutes > 0 ? c.minutes() / max_minutes : 0.0);
            svg += "<rect x=\"" + std::to_string(left + static_cast<int>(k) * cell) + "\" y=\"" +
                   std::to_string(y) + "\" width=\"" + std::to_string(cell - gap) +
                   "\" height=\"" + std::to_string(cell - gap) + "\" fill=\"" + fill + "\"";
            if (!c.blank) {
                svg += "><title>" + xml_escape(matrix.users[u]) + " / " +
                       xml_escape(matrix.task_ids[k]) + ": " + format_minutes(c.minutes()) +
                       " min</title></rect>\n";
            } else {
                svg += "/>\n";
            }
        }
    }
    svg += "</svg>\n";
    return svg;
}

std::string series_csv(const SeriesSet& set) {
    std::string out = "user,timestamp,score\n";
    for (const auto& [user, points] : set)
        for (const auto& [ts, score] : points)
            out += csv_field(user) + "," + format_rfc3339(ts) + "," + std::to_string(score) +
                   "\n";
    return out;
}

std::string series_json(const SeriesSet& set) {
    json obj = json::object();
    for (const auto& [user, points] : set) {
        json arr = json::array();
        for (const auto& [ts, score] : points)
            arr.push_back(json{{"timestamp", format_rfc3339(ts)}, {"score", score}});
        obj[user] = std::move(arr);
    }
    return json{{"series", obj}}.dump(2) + "\n";
}

std::string series_svg(const SeriesSet& set) {
    const int width = 800, height = 400, left = 50, right = 150, top = 20, bottom = 40;
    const double plot_w = width - left - right, plot_h = height - top - bottom;

    Timestamp t_min = Timestamp::max(), t_max = Timestamp::min();
    int s_max = 1;
    for (const auto& [user, points] : set) {
        for (const auto& [ts, score] : points) {
            t_min = std::min(t_min, ts);
            t_max = std::max(t_max, ts);
            s_max = std::max(s_max, score);
        }
    }
    if (t_min > t_max) { // empty set
        t_min = Timestamp{};
        t_max = t_min + std::chrono::hours{1};
    }
    double span = std::max<double>(1.0, std::chrono::duration<double>(t_max - t_min).count());

    auto x_of = [&](Timestamp t) {
        return left + plot_w * std::chrono::duration<double>(t - t_min).count() / span;
    };
    auto y_of = [&](int score) { return top + plot_h * (1.0 - double(score) / s_max); };

    std::string svg = svg_open(width, height);
    svg += "<style>text{font-family:sans-serif;font-size:11px;}</style>\n";
    svg += "<line x1=\"" + std::to_string(left) + "\" y1=\"" + std::to_string(top) + "\" x2=\"" +
           std::to_string(left) + "\" y2=\"" + f1(top + plot_h) +
           "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + std::to_string(left) + "\" y1=\"" + f1(top + plot_h) + "\" x2=\"" +
           f1(left + plot_w) + "\" y2=\"" + f1(top + plot_h) +
           "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + std::to_string(left - 8) + "\" y=\"" + std::to_string(top + 4) +
           "\" text-anchor=\"end\">" + std::to_string(s_max) + "</text>\n";
    svg += "<text x=\"" + std::to_string(left - 8) + "\" y=\"" + f1(top + plot_h + 4) +
           "\" text-anchor=\"end\">0</text>\n";

    size_t color = 0;
    for (const auto& [user, points] : set) {
        if (!points.empty()) {
            std::string poly;
            double prev_y = 0;
            bool first = true;
            for (const auto& [ts, score] : points) {
                double x = x_of(ts), y = y_of(score);
                if (!first) poly += f1(x) + "," + f1(prev_y) + " "; // step
                poly += f1(x) + "," + f1(y) + " ";
                prev_y = y;
                first = false;
            }
            if (!poly.empty()) poly.pop_back();
            svg += "<polyline fill=\"none\" stroke=\"" + std::string(kPalette[color % 10]) +
                   "\" stroke-width=\"1.5\" points=\"" + poly + "\"/>\n";
        } else {
            svg += "<polyline fill=\"none\" stroke=\"" + std::string(kPalette[color % 10]) +
                   "\" stroke-width=\"1.5\" points=\"\"/>\n";
        }
        svg += "<text x=\"" + f1(left + plot_w + 8) + "\" y=\"" +
               std::to_string(top + 12 + static_cast<int>(color) * 14) + "\" fill=\"" +
               kPalette[color % 10] + "\">" + xml_escape(user) + "</text>\n";
        ++color;
    }
    svg += "</svg>\n";
    return svg;
}

std::string punchcard_csv(const PunchCard& card) {
    std::string out = "weekday";
    for (int h = 0; h < 24; ++h) {
        char buf[8];
        std::snprintf(buf, sizeof buf, ",%02d", h);
        out += buf;
    }
    out += "\n";
    for (int d = 0; d < 7; ++d) {
        out += kWeekdays[d];
        for (int h = 0; h < 24; ++h) out += "," + std::to_string(card.counts[d][h]);
        out += "\n";
    }
    return out;
}

std::string punchcard_json(const PunchCard& card) {
    json rows = json::array();
    for (int d = 0; d < 7; ++d) {
        json row = json::array();
        for (int h = 0; h < 24; ++h) row.push_back(card.counts[d][h]);
        rows.push_back(std::move(row));
    }
    json weekdays = json::array();
    for (const char* w : kWeekdays) weekdays.push_back(w);
    return json{{"weekdays", weekdays}, {"counts", rows}}.dump(2) + "\n";
}

std::string punchcard_svg(const PunchCard& card) {
    const int cell = 26, left = 50, top = 30;
    const int width = left + 24 * cell + 20, height = top + 7 * cell + 20;

    long max_count = 1;
    for (const auto& row : card.counts)
        for (long c : row) max_count = std::max(max_count, c);

    std::string svg = svg_open(width, height);
    svg += "<style>text{font-family:sans-serif;font-size:10px;}</style>\n";
    for (int h = 0; h < 24; ++h) {
        svg += "<text x=\"" + std::to_string(left + h * cell + cell / 2) + "\" y=\"" +
               std::to_string(top - 8) + "\" text-anchor=\"middle\">" + std::to_string(h) +
               "</text>\n";
    }
    for (int d = 0; d < 7; ++d) {
        svg += "<text x=\"" + std::to_string(left - 8) + "\" y=\"" +
               std::to_string(top + d * cell + cell / 2 + 4) + "\" text-anchor=\"end\">" +
               kWeekdays[d] + "</text>\n";
        for (int h = 0; h < 24; ++h) {
            long count = card.counts[d][h];
            if (count == 0) continue;
            double r = 2.0 + 10.0 * std::sqrt(double(count) / double(max_count));
            svg += "<circle cx=\"" + std::to_string(left + h * cell + cell / 2) + "\" cy=\"" +
                   std::to_string(top + d * cell + cell / 2) + "\" r=\"" + f1(r) +
                   "\" fill=\"#2b6cb0\"><title>" + std::string(kWeekdays[d]) + " " +
                   std::to_string(h) + ":00 - " + std::to_string(count) +
                   " commits</title></circle>\n";
        }
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace

std::optional<ReportFormat> report_format_from_string(std::string_view s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    if (s == "svg") return ReportFormat::svg;
    return std::nullopt;
}

std::string render_report(const TimeMatrix& matrix, ReportFormat format) {
    switch (format) {
    case ReportFormat::csv: return matrix_csv(matrix);
    case ReportFormat::json: return matrix_json(matrix);
    case ReportFormat::svg: return matrix_svg(matrix);
    }
    throw unsupported_combination("time matrix");
}

std::string render_report(const SeriesSet& series, ReportFormat format) {
    switch (format) {
    case ReportFormat::csv: return series_csv(series);
    case ReportFormat::json: return series_json(series);
    case ReportFormat::svg: return series_svg(series);
    }
    throw unsupported_combination("progress series");
}

std::string render_report(const PunchCard& card, ReportFormat format) {
    switch (format) {
    case ReportFormat::csv: return punchcard_csv(card);
    case ReportFormat::json: return punchcard_json(card);
    case ReportFormat::svg: return punchcard_svg(card);
    }
    throw unsupported_combination("punch card");
}

std::string render_report(const std::vector<StuckUser>& stuck, ReportFormat format) {
    if (format == ReportFormat::csv) {
        std::string out = "user,task_id,task_index,stalled_minutes,solver_count\n";
        for (const StuckUser& s : stuck)
            out += csv_field(s.user) + "," + csv_field(s.task_id) + "," +
                   std::to_string(s.task_index) + "," + format_minutes(s.stalled_minutes) + "," +
                   std::to_string(s.solver_count) + "\n";
        return out;
    }
    if (format == ReportFormat::json) {
        json arr = json::array();
        for (const StuckUser& s : stuck)
            arr.push_back(json{{"user", s.user},
                               {"task_id", s.task_id},
                               {"task_index", s.task_index},
                               {"stalled_minutes", s.stalled_minutes},
                               {"solver_count", s.solver_count}});
        return arr.dump(2) + "\n";
    }
    throw unsupported_combination("stuck-user report has no svg rendering");
}

} // namespace profci
