#include "banditgame/results_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace banditgame {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

template <typename T>
json optional_to_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

/// Maps data coordinates to the plot area of a fixed 720x480 canvas.
struct Frame {
  static constexpr double kWidth = 720, kHeight = 480, kLeft = 80, kRight = 20, kTop = 40, kBottom = 60;
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void pad_range(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
}

void svg_open(std::ostream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" viewBox=\"0 0 720 480\">\n"
      << "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n"
      << "<text x=\"360\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
      << title << "</text>\n";
}

void svg_axes(std::ostream& out, const Frame& f, bool log_x, bool log_y, const std::string& xlabel,
              const std::string& ylabel) {
  const double left = Frame::kLeft, bottom = Frame::kHeight - Frame::kBottom;
  const double right = Frame::kWidth - Frame::kRight, top = Frame::kTop;
  out << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n"
      << "<line x1=\"" << fixed2(left) << "\" y1=\"" << fixed2(bottom) << "\" x2=\"" << fixed2(right)
      << "\" y2=\"" << fixed2(bottom) << "\"/>\n"
      << "<line x1=\"" << fixed2(left) << "\" y1=\"" << fixed2(bottom) << "\" x2=\"" << fixed2(left)
      << "\" y2=\"" << fixed2(top) << "\"/>\n</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  auto tick_label = [](double v, bool log) {
    if (log) return "1e" + std::to_string(static_cast<int>(std::lround(v)));
    return fixed2(v);
  };
  const double x_step = log_x ? 1.0 : 0.2 * (f.x1 - f.x0);
  for (double x = log_x ? std::ceil(f.x0) : f.x0; x <= f.x1 + 1e-9; x += x_step) {
    out << "<line x1=\"" << fixed2(f.px(x)) << "\" y1=\"" << fixed2(bottom) << "\" x2=\""
        << fixed2(f.px(x)) << "\" y2=\"" << fixed2(bottom + 5) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fixed2(f.px(x)) << "\" y=\"" << fixed2(bottom + 18)
        << "\" text-anchor=\"middle\">" << tick_label(x, log_x) << "</text>\n";
  }
  const double y_step = log_y ? 1.0 : 0.25 * (f.y1 - f.y0);
  for (double y = log_y ? std::ceil(f.y0) : f.y0; y <= f.y1 + 1e-9; y += y_step) {
    out << "<line x1=\"" << fixed2(left - 5) << "\" y1=\"" << fixed2(f.py(y)) << "\" x2=\""
        << fixed2(left) << "\" y2=\"" << fixed2(f.py(y)) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fixed2(left - 8) << "\" y=\"" << fixed2(f.py(y) + 4)
        << "\" text-anchor=\"end\">" << tick_label(y, log_y) << "</text>\n";
  }
  out << "<text x=\"" << fixed2(0.5 * (left + right)) << "\" y=\"" << fixed2(Frame::kHeight - 15)
      << "\" text-anchor=\"middle\">" << xlabel << "</text>\n"
      << "<text x=\"18\" y=\"" << fixed2(0.5 * (top + bottom)) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << fixed2(0.5 * (top + bottom)) << ")\">" << ylabel << "</text>\n</g>\n";
}

void svg_polyline(std::ostream& out, const std::vector<std::pair<double, double>>& pts,
                  const char* color, const char* extra = "") {
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" " << extra << " points=\"";
  for (std::size_t k = 0; k < pts.size(); ++k) {
    out << (k ? " " : "") << fixed2(pts[k].first) << "," << fixed2(pts[k].second);
  }
  out << "\"/>\n";
}

void svg_legend(std::ostream& out, std::size_t index, const char* color, const std::string& label) {
  const double y = Frame::kTop + 12 + 16 * static_cast<double>(index);
  out << "<line x1=\"" << fixed2(Frame::kLeft + 14) << "\" y1=\"" << fixed2(y) << "\" x2=\""
      << fixed2(Frame::kLeft + 34) << "\" y2=\"" << fixed2(y) << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n<text x=\"" << fixed2(Frame::kLeft + 40) << "\" y=\"" << fixed2(y + 4)
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << label << "</text>\n";
}

void write_regret_svg(std::ostream& out, const ExperimentResult& result) {
  std::vector<std::string> algorithms;
  for (const auto& r : result.regret_rows) {
    if (std::find(algorithms.begin(), algorithms.end(), r.algorithm) == algorithms.end()) {
      algorithms.push_back(r.algorithm);
    }
  }
  const double tiny = std::numeric_limits<double>::min();
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& r : result.regret_rows) {
    const double lx = std::log10(static_cast<double>(r.horizon));
    x0 = std::min(x0, lx);
    x1 = std::max(x1, lx);
    for (double v : {r.p10, r.mean_regret, r.p90}) {
      if (v > tiny) {
        y0 = std::min(y0, std::log10(v));
        y1 = std::max(y1, std::log10(v));
      }
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1;
  if (!std::isfinite(y0)) y0 = 0, y1 = 1;
  pad_range(x0, x1);
  pad_range(y0, y1);
  const Frame f{std::floor(x0), std::ceil(x1), std::floor(y0), std::ceil(y1)};
  svg_open(out, "Regret scaling (reg_row + reg_col)");
  svg_axes(out, f, true, true, "T", "regret");

  for (std::size_t a = 0; a < algorithms.size(); ++a) {
    const char* color = kPalette[a % std::size(kPalette)];
    std::vector<std::pair<double, double>> mean, lower, upper;
    for (const auto& r : result.regret_rows) {
      if (r.algorithm != algorithms[a]) continue;
      const double x = f.px(std::log10(static_cast<double>(r.horizon)));
      auto y = [&](double v) { return f.py(std::log10(std::max(v, std::pow(10.0, f.y0)))); };
      mean.emplace_back(x, y(r.mean_regret));
      lower.emplace_back(x, y(r.p10));
      upper.emplace_back(x, y(r.p90));
    }
    out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
    bool first = true;
    for (const auto& p : lower) {
      out << (first ? "" : " ") << fixed2(p.first) << "," << fixed2(p.second);
      first = false;
    }
    for (auto it = upper.rbegin(); it != upper.rend(); ++it) {
      out << " " << fixed2(it->first) << "," << fixed2(it->second);
    }
    out << "\"/>\n";
    svg_polyline(out, mean, color);
    std::string label = algorithms[a];
    for (const auto& fit : result.fits) {
      if (fit.label != algorithms[a] || !fit.fit.defined) continue;
      const double fx0 = std::max(f.x0, std::log10(std::max(fit.t_min, 1.0)));
      const double fx1 = f.x1;
      svg_polyline(out,
                   {{f.px(fx0), f.py(fit.fit.intercept + fit.fit.slope * fx0)},
                    {f.px(fx1), f.py(fit.fit.intercept + fit.fit.slope * fx1)}},
                   color, "stroke-dasharray=\"6,4\"");
      label += " (slope " + fixed2(fit.fit.slope) + ")";
    }
    svg_legend(out, a, color, label);
  }
  out << "</svg>\n";
}

void write_psne_svg(std::ostream& out, const ExperimentResult& result) {
  std::vector<double> d_values;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  for (const auto& r : result.psne_rows) {
    if (std::find(d_values.begin(), d_values.end(), r.d_min) == d_values.end()) d_values.push_back(r.d_min);
    if (r.t_over_opt > 0.0) {
      x0 = std::min(x0, std::log10(r.t_over_opt));
      x1 = std::max(x1, std::log10(r.t_over_opt));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1;
  pad_range(x0, x1);
  const Frame f{std::floor(x0), std::ceil(x1), 0.0, 1.0};
  svg_open(out, "PSNE identification success rate");
  svg_axes(out, f, true, false, "t / OPT", "success rate");
  out << "<line x1=\"" << fixed2(f.px(f.x0)) << "\" y1=\"" << fixed2(f.py(0.75)) << "\" x2=\""
      << fixed2(f.px(f.x1)) << "\" y2=\"" << fixed2(f.py(0.75))
      << "\" stroke=\"gray\" stroke-dasharray=\"4,4\"/>\n";
  for (std::size_t d = 0; d < d_values.size(); ++d) {
    const char* color = kPalette[d % std::size(kPalette)];
    std::vector<std::pair<double, double>> pts;
    double d_1 = 0.0;
    for (const auto& r : result.psne_rows) {
      if (r.d_min != d_values[d]) continue;
      d_1 = r.d_1;
      pts.emplace_back(f.px(std::log10(r.t_over_opt)), f.py(r.success_rate));
    }
    svg_polyline(out, pts, color);
    svg_legend(out, d, color, "d_min = " + format_double(d_values[d]) + ", d_1 = " + format_double(d_1));
  }
  out << "</svg>\n";
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

}  // namespace

ResultFormat parse_result_format(const std::string& name) {
  if (name == "csv") return ResultFormat::csv;
  if (name == "json") return ResultFormat::json;
  if (name == "svg") return ResultFormat::svg;
  throw std::invalid_argument("unknown result format \"" + name + "\" (expected csv, json or svg)");
}

json result_to_json(const ExperimentResult& r) {
  json j;
  j["kind"] = r.kind;
  j["config"] = r.config;
  j["provenance"] = {{"config_hash", r.provenance.config_hash},
                     {"master_seed", r.provenance.master_seed},
                     {"code_version", r.provenance.code_version},
                     {"rng", r.provenance.rng}};
  json rows = json::array();
  for (const auto& row : r.regret_rows) {
    rows.push_back({{"algorithm", row.algorithm}, {"T", row.horizon}, {"epsilon", row.epsilon},
                    {"mean_regret", row.mean_regret}, {"p10", row.p10}, {"p90", row.p90},
                    {"trials", row.trials}, {"seed", row.seed}});
  }
  for (const auto& row : r.psne_rows) {
    rows.push_back({{"d_min", row.d_min}, {"d_1", row.d_1}, {"m", row.m}, {"n", row.n}, {"t", row.t},
                    {"t_over_opt", row.t_over_opt}, {"success_rate", row.success_rate},
                    {"success_rate_mixed", row.success_rate_mixed}, {"trials", row.trials},
                    {"seed", row.seed}});
  }
  j["rows"] = std::move(rows);
  json fits = json::array();
  for (const auto& fit : r.fits) {
    fits.push_back({{"label", fit.label}, {"t_min", fit.t_min}, {"defined", fit.fit.defined},
                    {"slope", fit.fit.slope}, {"intercept", fit.fit.intercept}, {"r2", fit.fit.r2},
                    {"points", fit.fit.points}});
  }
  j["fits"] = std::move(fits);
  json thresholds = json::array();
  for (const auto& t : r.thresholds) {
    thresholds.push_back({{"d_min", t.d_min}, {"ratio", t.ratio}, {"opt", t.opt}, {"horizon", t.horizon},
                          {"first_t", optional_to_json(t.first_t)},
                          {"first_t_over_opt", optional_to_json(t.first_t_over_opt)},
                          {"min_rate_after", t.min_rate_after}});
  }
  j["thresholds"] = std::move(thresholds);
  return j;
}

ExperimentResult result_from_json(const json& j) {
  ExperimentResult r;
  r.kind = j.at("kind").get<std::string>();
  r.config = j.at("config");
  const json& p = j.at("provenance");
  r.provenance.config_hash = p.at("config_hash").get<std::string>();
  r.provenance.master_seed = p.at("master_seed").get<std::uint64_t>();
  r.provenance.code_version = p.at("code_version").get<std::string>();
  r.provenance.rng = p.at("rng").get<std::string>();
  for (const json& row : j.at("rows")) {
    if (r.kind == "regret") {
      RegretRow x;
      x.algorithm = row.at("algorithm").get<std::string>();
      x.horizon = row.at("T").get<std::uint64_t>();
      x.epsilon = row.at("epsilon").get<double>();
      x.mean_regret = row.at("mean_regret").get<double>();
      x.p10 = row.at("p10").get<double>();
      x.p90 = row.at("p90").get<double>();
      x.trials = row.at("trials").get<std::size_t>();
      x.seed = row.at("seed").get<std::uint64_t>();
      r.regret_rows.push_back(std::move(x));
    } else {
      PsneRow x;
      x.d_min = row.at("d_min").get<double>();
      x.d_1 = row.at("d_1").get<double>();
      x.m = row.at("m").get<std::size_t>();
      x.n = row.at("n").get<std::size_t>();
      x.t = row.at("t").get<std::uint64_t>();
      x.t_over_opt = row.at("t_over_opt").get<double>();
      x.success_rate = row.at("success_rate").get<double>();
      x.success_rate_mixed = row.at("success_rate_mixed").get<double>();
      x.trials = row.at("trials").get<std::size_t>();
      x.seed = row.at("seed").get<std::uint64_t>();
      r.psne_rows.push_back(x);
    }
  }
  for (const json& fit : j.at("fits")) {
    SlopeFit s;
    s.label = fit.at("label").get<std::string>();
    s.t_min = fit.at("t_min").get<double>();
    s.fit.defined = fit.at("defined").get<bool>();
    s.fit.slope = fit.at("slope").get<double>();
    s.fit.intercept = fit.at("intercept").get<double>();
    s.fit.r2 = fit.at("r2").get<double>();
    s.fit.points = fit.at("points").get<std::size_t>();
    r.fits.push_back(std::move(s));
  }
  for (const json& t : j.at("thresholds")) {
    IdentificationThreshold x;
    x.d_min = t.at("d_min").get<double>();
    x.ratio = t.at("ratio").get<double>();
    x.opt = t.at("opt").get<double>();
    x.horizon = t.at("horizon").get<std::uint64_t>();
    x.first_t = optional_from_json<std::uint64_t>(t.at("first_t"));
    x.first_t_over_opt = optional_from_json<double>(t.at("first_t_over_opt"));
    x.min_rate_after = t.at("min_rate_after").get<double>();
    r.thresholds.push_back(x);
  }
  return r;
}

void write_csv(std::ostream& out, const ExperimentResult& r) {
  if (r.kind == "psne") {
    out << kPsneCsvHeader << '\n';
    for (const auto& row : r.psne_rows) {
      out << format_double(row.d_min) << ',' << format_double(row.d_1) << ',' << row.m << ',' << row.n
          << ',' << row.t << ',' << format_double(row.t_over_opt) << ','
          << format_double(row.success_rate) << ',' << row.trials << ',' << row.seed << '\n';
    }
    return;
  }
  out << kRegretCsvHeader << '\n';
  for (const auto& row : r.regret_rows) {
    out << row.algorithm << ',' << row.horizon << ',' << format_double(row.epsilon) << ','
        << format_double(row.mean_regret) << ',' << format_double(row.p10) << ','
        << format_double(row.p90) << ',' << row.trials << ',' << row.seed << '\n';
  }
}

void write_svg(std::ostream& out, const ExperimentResult& result) {
  if (result.kind == "psne") {
    write_psne_svg(out, result);
  } else {
    write_regret_svg(out, result);
  }
}

void write_results(const ExperimentResult& result, const std::string& path, ResultFormat format) {
  std::ofstream out = open_for_write(path);
  switch (format) {
    case ResultFormat::csv:
      write_csv(out, result);
      break;
    case ResultFormat::json:
      out << result_to_json(result).dump(2) << '\n';
      break;
    case ResultFormat::svg:
      write_svg(out, result);
      break;
  }
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path);
}

ExperimentResult read_results_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return result_from_json(j);
}

}  // namespace banditgame
