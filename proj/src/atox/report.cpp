#include "atox/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "atox/csv.hpp"
#include "atox/error.hpp"

namespace atox {

Dimension dimension_from_string(const std::string& s) {
  if (s == "language") return Dimension::Language;
  if (s == "axis") return Dimension::Axis;
  if (s == "descriptor") return Dimension::Descriptor;
  if (s == "noun") return Dimension::Noun;
  if (s == "template") return Dimension::Template;
  throw ValidationError("unknown dimension: " + s);
}

const char* to_string(Dimension d) {
  switch (d) {
    case Dimension::Language: return "language";
    case Dimension::Axis: return "axis";
    case Dimension::Descriptor: return "descriptor";
    case Dimension::Noun: return "noun";
    case Dimension::Template: return "template";
  }
  return "?";
}

const char* to_string(ATLevel level) {
  switch (level) {
    case ATLevel::Low: return "Low";
    case ATLevel::Medium: return "Medium";
    case ATLevel::High: return "High";
  }
  return "?";
}

ATLevel classify_level(double rate) {
  if (rate > 0.005) return ATLevel::High;
  if (rate < 0.001) return ATLevel::Low;
  return ATLevel::Medium;
}

namespace {

std::string key_of(const TranslationView& view, Dimension d) {
  switch (d) {
    case Dimension::Language: return view.translation->language;
    case Dimension::Axis: return view.sentence->axis;
    case Dimension::Descriptor: return view.sentence->descriptor_id;
    case Dimension::Noun: return view.sentence->noun_id.empty() ? "-" : view.sentence->noun_id;
    case Dimension::Template: return view.sentence->template_id;
  }
  return "?";
}

}  // namespace

RateTable aggregate(const std::vector<TranslationView>& records,
                    const std::vector<ToxicityFinding>& findings, Dimension dimension) {
  std::map<std::string, RateRow> rows;
  std::map<std::string, std::string> key_by_record;  // language\x1fid -> key
  for (const auto& view : records) {
    std::string key = key_of(view, dimension);
    auto& row = rows[key];
    row.key = key;
    ++row.n_sentences;
    key_by_record[view.translation->language + '\x1f' + view.translation->sentence_id] = key;
  }
  for (const auto& f : findings) {
    auto it = key_by_record.find(f.language + '\x1f' + f.sentence_id);
    if (it == key_by_record.end()) continue;
    ++rows[it->second].n_toxic;
  }
  RateTable table;
  table.dimension = dimension;
  for (auto& [key, row] : rows) {
    row.rate = row.n_sentences
                   ? static_cast<double>(row.n_toxic) / static_cast<double>(row.n_sentences)
                   : 0.0;
    table.rows.push_back(row);
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const RateRow& a, const RateRow& b) {
    if (a.rate != b.rate) return a.rate > b.rate;
    return a.key < b.key;
  });
  return table;
}

std::vector<RangeRow> toxicity_range_table(const std::vector<LanguageRegionStats>& languages) {
  std::vector<RangeRow> rows(3);
  rows[0].level = ATLevel::Low;
  rows[1].level = ATLevel::Medium;
  rows[2].level = ATLevel::High;
  std::vector<double> in_sum(3, 0.0), overall_sum(3, 0.0);
  for (const auto& lang : languages) {
    size_t idx = static_cast<size_t>(classify_level(lang.toxicity_rate));
    ++rows[idx].num_languages;
    in_sum[idx] += lang.toxicity_in_region;
    overall_sum[idx] += lang.toxicity_overall;
  }
  for (size_t i = 0; i < 3; ++i) {
    if (rows[i].num_languages == 0) continue;
    double n = static_cast<double>(rows[i].num_languages);
    rows[i].pct_toxic_in_region = 100.0 * in_sum[i] / n;
    rows[i].pct_toxic_overall = 100.0 * overall_sum[i] / n;
    if (rows[i].pct_toxic_overall > 0.0) {
      rows[i].ratio = rows[i].pct_toxic_in_region / rows[i].pct_toxic_overall;
    }
  }
  return rows;
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out;
}

std::string f4(double v) { return io::format_fixed(v, 4); }

}  // namespace

std::string rate_table_to_csv(const RateTable& table) {
  std::string out = std::string(to_string(table.dimension)) + ",n_sentences,n_toxic,rate\n";
  for (const auto& row : table.rows) {
    out += io::csv_row({row.key, std::to_string(row.n_sentences), std::to_string(row.n_toxic),
                        f4(row.rate)});
    out += '\n';
  }
  return out;
}

std::string rate_table_to_json(const RateTable& table) {
  std::string out = "{\"schema_version\":1,\"dimension\":\"";
  out += to_string(table.dimension);
  out += "\",\"rows\":[";
  for (size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (i) out += ',';
    out += "{\"key\":\"" + json_escape(row.key) + "\",\"n_sentences\":" +
           std::to_string(row.n_sentences) + ",\"n_toxic\":" + std::to_string(row.n_toxic) +
           ",\"rate\":" + f4(row.rate) + "}";
  }
  out += "]}\n";
  return out;
}

std::string range_table_to_csv(const std::vector<RangeRow>& rows) {
  std::string out = "range,num_languages,pct_toxic_in_region,pct_toxic_overall,ratio\n";
  for (const auto& row : rows) {
    out += io::csv_row({to_string(row.level), std::to_string(row.num_languages),
                        f4(row.pct_toxic_in_region), f4(row.pct_toxic_overall),
                        row.ratio ? io::format_fixed(*row.ratio, 2) : "n/a"});
    out += '\n';
  }
  return out;
}

std::string grid_to_csv(const HeatmapGrid& grid) {
  std::string out = "# contribution_edges:";
  for (double e : grid.contribution_edges) out += " " + f4(e);
  out += "\n# gini_edges:";
  for (double e : grid.gini_edges) out += " " + f4(e);
  out += "\ncontribution_bin,gini_bin,count,toxic,toxic_rate\n";
  for (size_t ci = 0; ci < grid.contribution_bins(); ++ci) {
    for (size_t gi = 0; gi < grid.gini_bins(); ++gi) {
      const GridCell& cell = grid.at(ci, gi);
      std::string rate = cell.count
                             ? f4(static_cast<double>(cell.toxic) / static_cast<double>(cell.count))
                             : "empty";
      out += io::csv_row({std::to_string(ci), std::to_string(gi), std::to_string(cell.count),
                          std::to_string(cell.toxic), rate});
      out += '\n';
    }
  }
  return out;
}

std::string grid_to_svg(const HeatmapGrid& grid, const std::optional<FlagThresholds>& region) {
  constexpr int kSize = 640;
  constexpr int kMargin = 60;
  const int plot = kSize - 2 * kMargin;
  const size_t cbins = grid.contribution_bins();
  const size_t gbins = grid.gini_bins();

  double max_rate = 0.0;
  for (const auto& cell : grid.cells) {
    if (cell.count && cell.toxic) {
      max_rate = std::max(max_rate,
                          static_cast<double>(cell.toxic) / static_cast<double>(cell.count));
    }
  }

  auto color_of = [&](const GridCell& cell) -> std::string {
    // White marks both empty cells and 0%-toxicity cells.
    if (cell.count == 0 || cell.toxic == 0 || max_rate == 0.0) return "#ffffff";
    double t = (static_cast<double>(cell.toxic) / static_cast<double>(cell.count)) / max_rate;
    // Ramp from near-white to deep red.
    int r = static_cast<int>(255.0 + t * (203.0 - 255.0) + 0.5);
    int g = static_cast<int>(245.0 + t * (24.0 - 245.0) + 0.5);
    int b = static_cast<int>(240.0 + t * (29.0 - 240.0) + 0.5);
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kSize) +
         "\" height=\"" + std::to_string(kSize) + "\" viewBox=\"0 0 " + std::to_string(kSize) +
         " " + std::to_string(kSize) + "\">\n";
  svg += "<rect width=\"" + std::to_string(kSize) + "\" height=\"" + std::to_string(kSize) +
         "\" fill=\"#ffffff\"/>\n";

  for (size_t ci = 0; ci < cbins; ++ci) {
    double x0 = grid.contribution_edges[ci];
    double x1 = grid.contribution_edges[ci + 1];
    for (size_t gi = 0; gi < gbins; ++gi) {
      double y0 = grid.gini_edges[gi];
      double y1 = grid.gini_edges[gi + 1];
      const GridCell& cell = grid.at(ci, gi);
      double px = kMargin + x0 * plot;
      double pw = (x1 - x0) * plot;
      double py = kMargin + (1.0 - y1) * plot;
      double ph = (y1 - y0) * plot;
      svg += "<rect x=\"" + f4(px) + "\" y=\"" + f4(py) + "\" width=\"" + f4(pw) +
             "\" height=\"" + f4(ph) + "\" fill=\"" + color_of(cell) +
             "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    }
  }

  if (region) {
    double px = kMargin;
    double pw = region->contribution_max * plot;
    double py = kMargin;
    double ph = (1.0 - region->gini_min) * plot;
    svg += "<rect x=\"" + f4(px) + "\" y=\"" + f4(py) + "\" width=\"" + f4(pw) + "\" height=\"" +
           f4(ph) + "\" fill=\"none\" stroke=\"#00b7c3\" stroke-width=\"2\"/>\n";
  }

  svg += "<rect x=\"" + std::to_string(kMargin) + "\" y=\"" + std::to_string(kMargin) +
         "\" width=\"" + std::to_string(plot) + "\" height=\"" + std::to_string(plot) +
         "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
  svg += "<text x=\"" + std::to_string(kSize / 2) + "\" y=\"" + std::to_string(kSize - 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">source "
         "contribution</text>\n";
  svg += "<text x=\"18\" y=\"" + std::to_string(kSize / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
         "transform=\"rotate(-90 18 " +
         std::to_string(kSize / 2) + ")\">gini impurity</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace atox
