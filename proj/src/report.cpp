#include "xaibench/report.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "xaibench/error.hpp"
#include "xaibench/io.hpp"

namespace xaibench {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Distinguishable polygon colors; the last entry is reserved for the
// random baseline.
constexpr std::array<const char*, 10> kPalette = {
    "#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee",
    "#aa3377", "#ee8866", "#44aa99", "#774411", "#888888",
};

const char* color_for(Method m) {
    return kPalette[static_cast<std::size_t>(m) % kPalette.size()];
}

std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

const MetricReport& report_for(const BenchmarkResult& result, MetricId id) {
    for (const auto& r : result.reports) {
        if (r.metric == id) return r;
    }
    fail(ErrorCode::invalid_argument,
         "metric " + metric_id_string(id) + " was not evaluated; cannot build the report");
}

std::string xml_escape(const std::string& s) {
    std::string out;
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

} // namespace

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_scores_csv(const std::filesystem::path& path, const BenchmarkResult& result,
                      const std::string& stamp) {
    std::string csv = "# " + stamp + "\n";
    csv += "metric,method,sample_id,raw,normalized\n";
    for (const auto& rep : result.reports) {
        const bool is_road = rep.metric == MetricId::road;
        auto emit = [&](const MethodScore& score) {
            for (std::size_t s = 0; s < score.raw.size(); ++s) {
                csv += metric_id_string(rep.metric);
                csv += ',';
                csv += method_id(score.method);
                csv += ',';
                if (is_road) {
                    csv += 'd';
                    csv += std::to_string(s);
                } else {
                    csv += std::to_string(rep.sample_ids[s]);
                }
                csv += ',';
                csv += format_double(score.raw[s]);
                csv += ',';
                csv += format_double(score.normalized[s]);
                csv += '\n';
            }
        };
        for (const auto& score : rep.methods) emit(score);
        emit(rep.baseline);
    }
    io::atomic_write_text(path, csv);
}

void write_ranks_csv(const std::filesystem::path& path, const BenchmarkResult& result,
                     const std::string& stamp) {
    std::string csv = "# " + stamp + "\n";
    csv += "metric,property,method,mean,sem,rank,baseline_passed\n";
    for (const auto& rep : result.reports) {
        auto emit = [&](const MethodScore& score, bool baseline) {
            csv += metric_id_string(rep.metric);
            csv += ',';
            csv += property_name(rep.property);
            csv += ',';
            csv += method_id(score.method);
            csv += ',';
            csv += format_double(score.stats.mean);
            csv += ',';
            csv += format_double(score.stats.sem);
            csv += ',';
            if (!baseline) csv += std::to_string(score.rank);
            csv += ',';
            csv += rep.baseline_passed ? "true" : "false";
            csv += '\n';
        };
        for (const auto& score : rep.methods) emit(score, false);
        emit(rep.baseline, true);
    }
    io::atomic_write_text(path, csv);
}

void write_property_csv(const std::filesystem::path& path, const BenchmarkResult& result,
                        const std::vector<MetricId>& property_metrics, const std::string& stamp) {
    std::string csv = "# " + stamp + "\n";
    csv += "property,metric,method,mean,sem,rank\n";
    for (MetricId id : property_metrics) {
        const MetricReport& rep = report_for(result, id);
        for (const auto& score : rep.methods) {
            csv += property_name(rep.property);
            csv += ',';
            csv += metric_id_string(rep.metric);
            csv += ',';
            csv += method_id(score.method);
            csv += ',';
            csv += format_double(score.stats.mean);
            csv += ',';
            csv += format_double(score.stats.sem);
            csv += ',';
            csv += std::to_string(score.rank);
            csv += '\n';
        }
    }
    io::atomic_write_text(path, csv);
}

void write_spyder_svg(const std::filesystem::path& path, const BenchmarkResult& result,
                      const std::vector<MetricId>& property_metrics, const std::string& stamp) {
    if (property_metrics.size() < 3)
        fail(ErrorCode::invalid_argument, "a radar chart needs at least 3 properties");
    std::vector<const MetricReport*> reps;
    for (MetricId id : property_metrics) reps.push_back(&report_for(result, id));

    const double cx = 300.0, cy = 300.0, radius = 210.0;
    const std::size_t axes = reps.size();
    auto point = [&](std::size_t axis, double value) {
        const double a = 2.0 * kPi * static_cast<double>(axis) / static_cast<double>(axes);
        const double v = std::clamp(value, 0.0, 1.0) * radius;
        return std::pair<double, double>(cx + v * std::sin(a), cy - v * std::cos(a));
    };
    auto coord = [](double v) { return fixed3(v); };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<!-- " + xml_escape(stamp) + " -->\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"840\" height=\"620\" "
           "viewBox=\"0 0 840 620\" font-family=\"sans-serif\" font-size=\"13\">\n";
    svg += "<rect width=\"840\" height=\"620\" fill=\"white\"/>\n";

    for (int ring = 1; ring <= 4; ++ring) {
        const double rr = radius * ring / 4.0;
        svg += "<circle cx=\"" + coord(cx) + "\" cy=\"" + coord(cy) + "\" r=\"" + coord(rr) +
               "\" fill=\"none\" stroke=\"#dddddd\"/>\n";
        svg += "<text x=\"" + coord(cx + 4.0) + "\" y=\"" + coord(cy - rr - 3.0) +
               "\" fill=\"#999999\" font-size=\"10\">" + fixed3(ring / 4.0) + "</text>\n";
    }
    for (std::size_t i = 0; i < axes; ++i) {
        const auto [x, y] = point(i, 1.0);
        svg += "<line x1=\"" + coord(cx) + "\" y1=\"" + coord(cy) + "\" x2=\"" + coord(x) +
               "\" y2=\"" + coord(y) + "\" stroke=\"#bbbbbb\"/>\n";
        const auto [lx, ly] = point(i, 1.13);
        svg += "<text x=\"" + coord(lx) + "\" y=\"" + coord(ly) +
               "\" text-anchor=\"middle\" fill=\"#333333\">" +
               xml_escape(property_name(reps[i]->property)) + "</text>\n";
        const auto [mx, my] = point(i, 1.22);
        svg += "<text x=\"" + coord(mx) + "\" y=\"" + coord(my) +
               "\" text-anchor=\"middle\" fill=\"#888888\" font-size=\"10\">" +
               xml_escape(metric_id_string(reps[i]->metric)) + "</text>\n";
    }

    struct Series {
        Method method;
        std::vector<double> values;
        bool baseline;
    };
    std::vector<Series> series;
    for (std::size_t mi = 0; mi < reps.front()->methods.size(); ++mi) {
        Series s{reps.front()->methods[mi].method, {}, false};
        for (const auto* rep : reps) s.values.push_back(rep->methods[mi].stats.mean);
        series.push_back(std::move(s));
    }
    {
        Series s{Method::random_baseline, {}, true};
        for (const auto* rep : reps) s.values.push_back(rep->baseline.stats.mean);
        series.push_back(std::move(s));
    }

    for (const auto& s : series) {
        std::string pts;
        for (std::size_t i = 0; i < axes; ++i) {
            const auto [x, y] = point(i, s.values[i]);
            if (!pts.empty()) pts += ' ';
            pts += coord(x) + "," + coord(y);
        }
        svg += "<polygon points=\"" + pts + "\" fill=\"" + color_for(s.method) +
               "\" fill-opacity=\"0.07\" stroke=\"" + color_for(s.method) +
               "\" stroke-width=\"2\"";
        if (s.baseline) svg += " stroke-dasharray=\"6 4\"";
        svg += "/>\n";
    }

    double ly = 60.0;
    svg += "<text x=\"590\" y=\"40\" font-size=\"15\" fill=\"#111111\">Methods</text>\n";
    for (const auto& s : series) {
        svg += "<rect x=\"590\" y=\"" + coord(ly - 11.0) + "\" width=\"14\" height=\"14\" fill=\"" +
               color_for(s.method) + "\"/>\n";
        svg += "<text x=\"612\" y=\"" + coord(ly) + "\" fill=\"#111111\">" +
               xml_escape(method_name(s.method)) + "</text>\n";
        ly += 24.0;
    }
    svg += "</svg>\n";
    io::atomic_write_text(path, svg);
}

std::string ranking_table(const BenchmarkResult& result) {
    std::vector<std::string> row_names;
    for (const auto& score : result.reports.front().methods)
        row_names.push_back(method_name(score.method));
    row_names.push_back(method_name(Method::random_baseline));

    std::size_t name_w = 6;
    for (const auto& n : row_names) name_w = std::max(name_w, n.size());

    std::vector<std::string> headers;
    std::vector<std::size_t> col_w;
    std::vector<std::vector<std::string>> cells(row_names.size());
    for (const auto& rep : result.reports) {
        headers.push_back(metric_id_string(rep.metric));
        std::size_t w = headers.back().size();
        for (std::size_t mi = 0; mi < rep.methods.size(); ++mi) {
            const auto& sc = rep.methods[mi];
            std::string cell = std::to_string(sc.rank) + " (" + fixed3(sc.stats.mean) + "±" +
                               fixed3(sc.stats.sem) + ")";
            w = std::max(w, cell.size());
            cells[mi].push_back(std::move(cell));
        }
        std::string bcell = "- (" + fixed3(rep.baseline.stats.mean) + "±" +
                            fixed3(rep.baseline.stats.sem) + ")";
        w = std::max(w, bcell.size());
        cells.back().push_back(std::move(bcell));
        col_w.push_back(w);
    }

    auto pad = [](const std::string& s, std::size_t w) {
        std::string out = s;
        // The plus-minus sign is two UTF-8 bytes but one display column.
        std::size_t display = s.size();
        if (s.find("±") != std::string::npos) display -= 1;
        while (display < w) {
            out += ' ';
            ++display;
        }
        return out;
    };

    std::string table = pad("method", name_w);
    for (std::size_t c = 0; c < headers.size(); ++c) table += "  " + pad(headers[c], col_w[c]);
    table += '\n';
    for (std::size_t r = 0; r < row_names.size(); ++r) {
        table += pad(row_names[r], name_w);
        for (std::size_t c = 0; c < headers.size(); ++c) table += "  " + pad(cells[r][c], col_w[c]);
        table += '\n';
    }
    return table;
}

void write_summary_json(const std::filesystem::path& path, const BenchmarkResult& result,
                        std::uint64_t master_seed, const std::string& config_hash,
                        const std::string& version) {
    nlohmann::json j;
    j["version"] = version;
    j["seed"] = master_seed;
    j["config_hash"] = config_hash;
    j["normalization_note"] =
        "the random baseline participates in the per-sample normalization min/max "
        "but is excluded from ranking";
    nlohmann::json metrics = nlohmann::json::array();
    for (const auto& rep : result.reports) {
        nlohmann::json m;
        m["metric"] = metric_id_string(rep.metric);
        m["property"] = property_name(rep.property);
        m["baseline_passed"] = rep.baseline_passed;
        m["baseline"] = {{"mean", rep.baseline.stats.mean},
                         {"sem", rep.baseline.stats.sem},
                         {"degenerate", rep.baseline.degenerate}};
        nlohmann::json methods = nlohmann::json::array();
        for (const auto& score : rep.methods) {
            methods.push_back({{"method", method_id(score.method)},
                               {"mean", score.stats.mean},
                               {"sem", score.stats.sem},
                               {"rank", score.rank},
                               {"degenerate", score.degenerate}});
        }
        m["methods"] = std::move(methods);
        metrics.push_back(std::move(m));
    }
    j["metrics"] = std::move(metrics);
    io::atomic_write_text(path, j.dump(2) + "\n");
}

} // namespace xaibench
