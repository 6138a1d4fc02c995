#include "surpdec/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace surpdec {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", v == 0.0 ? 0.0 : v);  // no "-0.0000000000"
  return buf;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string items_csv(std::span<const DecompositionResult> results) {
  std::ostringstream out;
  out << "item_id,condition,A,B,veridical,lm_surprisal,lambda,gamma\n";
  for (const auto& r : results) {
    out << csv_field(r.item_id) << ',' << csv_field(r.condition) << ',' << format_number(r.shallow) << ','
        << format_number(r.deep) << ',' << format_number(r.veridical) << ',' << format_number(r.lm_surprisal) << ','
        << format_number(r.params.lambda) << ',' << format_number(r.params.gamma) << '\n';
  }
  return out.str();
}

std::string summary_csv(std::span<const ConditionSummary> summaries) {
  std::ostringstream out;
  out << "condition,n_items,shallow_surprisal,deep_surprisal,veridical_surprisal,lm_surprisal,effect_n400,"
         "effect_p600,control_condition\n";
  for (const auto& s : summaries) {
    out << csv_field(s.condition) << ',' << s.n_items << ',' << format_number(s.mean_shallow) << ','
        << format_number(s.mean_deep) << ',' << format_number(s.mean_veridical) << ','
        << format_number(s.mean_lm_surprisal) << ',' << format_number(s.effect_n400) << ','
        << format_number(s.effect_p600) << ',' << csv_field(s.control_condition) << '\n';
  }
  return out.str();
}

std::string frontier_csv(std::span<const FrontierPoint> points) {
  std::ostringstream out;
  out << "lambda,depth,expected_distortion\n";
  for (const auto& p : points) {
    out << format_number(p.lambda) << ',' << format_number(p.depth) << ',' << format_number(p.expected_distortion)
        << '\n';
  }
  return out.str();
}

std::string grid_csv(std::span<const GridRow> rows) {
  std::ostringstream out;
  out << "rank,lambda,gamma,score,n_constraints,condition,shallow_surprisal,deep_surprisal,veridical_surprisal,"
         "effect_n400,effect_p600\n";
  std::size_t rank = 0;
  for (const auto& row : rows) {
    ++rank;
    for (const auto& s : row.summaries) {
      out << rank << ',' << format_number(row.lambda) << ',' << format_number(row.gamma) << ',' << row.score << ','
          << row.n_constraints << ',' << csv_field(s.condition) << ',' << format_number(s.mean_shallow) << ','
          << format_number(s.mean_deep) << ',' << format_number(s.mean_veridical) << ','
          << format_number(s.effect_n400) << ',' << format_number(s.effect_p600) << '\n';
    }
  }
  return out.str();
}

std::string failures_csv(std::span<const ItemFailure> failures) {
  std::ostringstream out;
  out << "item_id,error,message\n";
  for (const auto& f : failures) {
    out << csv_field(f.item_id) << ',' << error_code_name(f.code) << ',' << csv_field(f.message) << '\n';
  }
  return out.str();
}

std::string frontier_svg(std::span<const FrontierPoint> points, std::string_view title) {
  constexpr double kW = 480, kH = 360, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
  double max_x = 1e-12, max_y = 1e-12;
  for (const auto& p : points) {
    max_x = std::max(max_x, p.depth);
    max_y = std::max(max_y, p.expected_distortion);
  }
  auto sx = [&](double x) { return kLeft + x / max_x * (kW - kLeft - kRight); };
  auto sy = [&](double y) { return kH - kBottom - y / max_y * (kH - kTop - kBottom); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
      << kW << ' ' << kH << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << xml_escape(title) << "</text>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight << "\" y2=\""
      << kH - kBottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kH - kBottom
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (kLeft + kW - kRight) / 2 << "\" y=\"" << kH - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">processing depth (nats)</text>\n";
  out << "<text x=\"16\" y=\"" << (kTop + kH - kBottom) / 2 << "\" transform=\"rotate(-90 16 "
      << (kTop + kH - kBottom) / 2
      << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">expected distortion</text>\n";
  out << "<text x=\"" << kLeft << "\" y=\"" << kH - kBottom + 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">0</text>\n";
  out << "<text x=\"" << kW - kRight << "\" y=\"" << kH - kBottom + 16
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << coord(max_x) << "</text>\n";
  out << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << coord(max_y) << "</text>\n";
  out << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < points.size(); ++i) {
    out << (i ? " " : "") << coord(sx(points[i].depth)) << ',' << coord(sy(points[i].expected_distortion));
  }
  out << "\"/>\n";
  for (const auto& p : points) {
    out << "<circle cx=\"" << coord(sx(p.depth)) << "\" cy=\"" << coord(sy(p.expected_distortion))
        << "\" r=\"2.5\" fill=\"black\"><title>lambda=" << format_number(p.lambda) << "</title></circle>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string effects_svg(std::span<const ConditionSummary> summaries, std::string_view title) {
  std::vector<const ConditionSummary*> rows;
  for (const auto& s : summaries) {
    if (!s.is_control) rows.push_back(&s);
  }
  constexpr double kH = 320, kTop = 40, kBottom = 60, kLeft = 50, kGroup = 90, kBar = 28;
  const double width = kLeft + kGroup * static_cast<double>(std::max<std::size_t>(rows.size(), 1)) + 20;
  double span = 1e-12;
  for (const auto* s : rows) {
    if (std::isfinite(s->effect_n400)) span = std::max(span, std::abs(s->effect_n400));
    if (std::isfinite(s->effect_p600)) span = std::max(span, std::abs(s->effect_p600));
  }
  const double zero = kTop + (kH - kTop - kBottom) / 2;
  const double scale = (kH - kTop - kBottom) / 2 / span;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << coord(width) << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << coord(width) << ' ' << kH << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << coord(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">"
      << xml_escape(title) << "</text>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << coord(zero) << "\" x2=\"" << coord(width - 10) << "\" y2=\""
      << coord(zero) << "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double x = kLeft + kGroup * static_cast<double>(i) + 10;
    const double values[2] = {rows[i]->effect_n400, rows[i]->effect_p600};
    const char* colors[2] = {"#3b6fb6", "#c0392b"};
    for (int k = 0; k < 2; ++k) {
      const double v = std::isfinite(values[k]) ? values[k] : 0.0;
      const double h = std::abs(v) * scale;
      const double y = v >= 0 ? zero - h : zero;
      out << "<rect x=\"" << coord(x + k * kBar) << "\" y=\"" << coord(y) << "\" width=\"" << kBar - 4
          << "\" height=\"" << coord(h) << "\" fill=\"" << colors[k] << "\"><title>"
          << (k == 0 ? "N400 " : "P600 ") << format_number(values[k]) << "</title></rect>\n";
    }
    out << "<text x=\"" << coord(x + kBar) << "\" y=\"" << kH - kBottom + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(rows[i]->condition)
        << "</text>\n";
  }
  out << "<rect x=\"" << kLeft << "\" y=\"" << kH - 24 << "\" width=\"10\" height=\"10\" fill=\"#3b6fb6\"/>"
      << "<text x=\"" << kLeft + 14 << "\" y=\"" << kH - 15
      << "\" font-family=\"sans-serif\" font-size=\"11\">N400 effect (shallow)</text>\n";
  out << "<rect x=\"" << kLeft + 150 << "\" y=\"" << kH - 24 << "\" width=\"10\" height=\"10\" fill=\"#c0392b\"/>"
      << "<text x=\"" << kLeft + 164 << "\" y=\"" << kH - 15
      << "\" font-family=\"sans-serif\" font-size=\"11\">P600 effect (deep)</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace surpdec
