#include <algorithm>
#include <cmath>
#include <cstdio>
#include <Eigen/Core>

#include "ttk/cli/commands.hpp"
#include "ttk/cli/svg.hpp"
#include "ttk/error.hpp"
#include "ttk/stats.hpp"
#include "ttk/text.hpp"

namespace ttk::cli {
namespace {

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string csv_cell(const ordered_json& j) {
  if (j.is_null()) return "";
  if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
  if (j.is_number_integer() || j.is_number_unsigned()) return j.dump();
  if (j.is_number()) return fmt6(j.get<double>());
  std::string s = j.is_string() ? j.get<std::string>() : j.dump();
  if (s == "inf" || s == "-inf" || s == "nan") return s;
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }
  return s;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<ordered_json>> rows;

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + csv_cell(r[i]);
      out += '\n';
    }
    return out;
  }
};

std::string join_ids(const ordered_json& ids) {
  std::string s;
  for (const auto& id : ids) s += (s.empty() ? "" : "+") + id.get<std::string>();
  return s;
}

const ordered_json& field(const ordered_json& obj, const char* name) {
  if (!obj.is_object() || !obj.contains(name)) {
    throw ValidationError(std::string("report payload lacks \"") + name + "\"");
  }
  return obj[name];
}

std::string xml_escape(std::string_view s) {
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

std::string slug(std::string_view s) {
  std::string out;
  for (unsigned char c : s) out += std::isalnum(c) ? static_cast<char>(std::tolower(c)) : '_';
  return out;
}

struct Panel {
  std::string name;
  std::vector<double> x, y;
  ScatterSpec spec;
};

std::vector<Panel> svg_panels(const EvalReport& report) {
  std::vector<Panel> panels;
  const auto& p = report.payload;
  switch (report.kind) {
    case ReportKind::pointwise_eval:
      for (const auto& m : field(p, "methods")) {
        Panel panel;
        const auto label = field(m, "method").get<std::string>() + "_" + join_ids(field(m, "model_ids"));
        panel.name = "pointwise_" + slug(label);
        for (const auto& pt : field(m, "points")) {
          panel.x.push_back(to_double(field(pt, "score")));
          panel.y.push_back(to_double(field(pt, "mean_rating")));
        }
        panel.spec = {label + " vs mean rating", field(m, "method").get<std::string>(), "mean human rating"};
        panels.push_back(std::move(panel));
      }
      break;
    case ReportKind::qe_correlation:
      for (const auto& c : field(p, "cells")) {
        Panel panel;
        const auto metric = field(c, "metric").get<std::string>();
        const auto cond = field(c, "condition").get<std::string>();
        panel.name = "qe_" + slug(metric) + "_" + slug(cond);
        for (const auto& pt : field(c, "points")) {
          panel.x.push_back(to_double(field(pt, "tindex")));
          panel.y.push_back(to_double(field(pt, "value")));
        }
        panel.spec = {metric + " (" + cond + ")", "T-index", metric};
        panels.push_back(std::move(panel));
      }
      break;
    case ReportKind::shift_report: {
      Panel panel;
      panel.name = "shifts_overall_vs_components";
      for (const auto& o : field(p, "observations")) {
        panel.x.push_back(to_double(field(o, "g_shift")) + to_double(field(o, "a_shift")) +
                          to_double(field(o, "t_shift")));
        panel.y.push_back(to_double(field(o, "o_shift")));
      }
      panel.spec = {"overall shift vs sum of component shifts", "genre + author + translationese shift",
                    "overall shift"};
      panels.push_back(std::move(panel));
      break;
    }
    case ReportKind::pairwise_eval: {
      if (!p.contains("disagreement")) {
        throw ValidationError("svg for pairwise_eval needs the disagreement table (run with --dataset)");
      }
      const auto& rows = field(field(p, "disagreement"), "rows");
      Panel bleu, delta;
      bleu.name = "disagreement_bleu";
      delta.name = "disagreement_delta_tindex";
      for (const auto& r : rows) {
        const double a = field(r, "agreement_count").get<double>();
        bleu.x.push_back(a);
        bleu.y.push_back(to_double(field(r, "bleu")));
        delta.x.push_back(a);
        delta.y.push_back(to_double(field(r, "delta_tindex")));
      }
      bleu.spec = {"pairwise BLEU by agreement count", "agreement count", "sentence BLEU"};
      delta.spec = {"T-index difference by agreement count", "agreement count", "|delta T-index|"};
      panels.push_back(std::move(bleu));
      panels.push_back(std::move(delta));
      break;
    }
    case ReportKind::binary_eval:
    case ReportKind::corpus_stats:
      throw ValidationError("svg output is not available for " + std::string(to_string(report.kind)) +
                            " reports (use json or csv)");
  }
  return panels;
}

// Tick values at "nice" steps covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 4.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
    out.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return out;
}

}  // namespace

std::optional<LeastSquaresLine> fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) return std::nullopt;
  Eigen::MatrixXd xm(static_cast<Eigen::Index>(x.size()), 1);
  Eigen::VectorXd ym(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    xm(static_cast<Eigen::Index>(i), 0) = x[i];
    ym(static_cast<Eigen::Index>(i)) = y[i];
  }
  try {
    const auto r = stats::ols(xm, ym, true, {"x"});
    return LeastSquaresLine{r.coefficients[0], r.coefficients[1]};
  } catch (const ValidationError&) {
    return std::nullopt;  // constant x or constant y
  }
}

std::string render_scatter(std::span<const double> xs, std::span<const double> ys, const ScatterSpec& spec) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
    if (std::isfinite(xs[i]) && std::isfinite(ys[i])) {
      x.push_back(xs[i]);
      y.push_back(ys[i]);
    }
  }
  const double left = 64, right = 16, top = 32, bottom = 48;
  const double pw = spec.width - left - right, ph = spec.height - top - bottom;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!x.empty()) {
    x0 = *std::min_element(x.begin(), x.end());
    x1 = *std::max_element(x.begin(), x.end());
    y0 = *std::min_element(y.begin(), y.end());
    y1 = *std::max_element(y.begin(), y.end());
  }
  auto pad = [](double& lo, double& hi) {
    if (hi - lo <= 0.0) {
      const double d = std::max(1.0, std::abs(lo)) * 0.5;
      lo -= d;
      hi += d;
    } else {
      const double d = (hi - lo) * 0.05;
      lo -= d;
      hi += d;
    }
  };
  pad(x0, x1);
  pad(y0, y1);
  auto sx = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
  auto sy = [&](double v) { return top + (y1 - v) / (y1 - y0) * ph; };

  std::string s;
  auto add = [&s](const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    s += buf;
  };
  add("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n",
      spec.width, spec.height, spec.width, spec.height);
  add("<rect width=\"%d\" height=\"%d\" fill=\"white\"/>\n", spec.width, spec.height);
  s += "<text x=\"" + fmt6(spec.width / 2.0) + "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" +
       xml_escape(spec.title) + "</text>\n";
  // axes
  add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", left, top + ph, left + pw, top + ph);
  add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", left, top, left, top + ph);
  for (double t : ticks(x0, x1)) {
    add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", sx(t), top + ph, sx(t),
        top + ph + 4);
    s += "<text x=\"" + fmt6(sx(t)) + "\" y=\"" + fmt6(top + ph + 16) + "\" text-anchor=\"middle\">" + fmt6(t) +
         "</text>\n";
  }
  for (double t : ticks(y0, y1)) {
    add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", left - 4, sy(t), left, sy(t));
    s += "<text x=\"" + fmt6(left - 6) + "\" y=\"" + fmt6(sy(t) + 4) + "\" text-anchor=\"end\">" + fmt6(t) +
         "</text>\n";
  }
  s += "<text x=\"" + fmt6(left + pw / 2) + "\" y=\"" + fmt6(spec.height - 10.0) + "\" text-anchor=\"middle\">" +
       xml_escape(spec.x_label) + "</text>\n";
  s += "<text transform=\"translate(14 " + fmt6(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
       xml_escape(spec.y_label) + "</text>\n";
  s += "<g fill=\"steelblue\" fill-opacity=\"0.7\">\n";
  for (std::size_t i = 0; i < x.size(); ++i) add("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\"/>\n", sx(x[i]), sy(y[i]));
  s += "</g>\n";
  if (const auto line = fit_line(x, y)) {
    add("<line class=\"fit\" x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"firebrick\" "
        "stroke-width=\"1.5\"/>\n",
        sx(x0), sy(line->intercept + line->slope * x0), sx(x1), sy(line->intercept + line->slope * x1));
    s += "<text x=\"" + fmt6(left + pw - 4) + "\" y=\"" + fmt6(top + 12) + "\" text-anchor=\"end\" fill=\"firebrick\">" +
         "y = " + fmt6(line->intercept) + " + " + fmt6(line->slope) + " x</text>\n";
  }
  s += "</svg>\n";
  return s;
}

ReportFormat parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  if (s == "svg") return ReportFormat::svg;
  throw ValidationError("unknown report format \"" + std::string(s) + "\" (expected json|csv|svg)");
}

std::string report_csv(const EvalReport& report) {
  const auto& p = report.payload;
  Table t;
  switch (report.kind) {
    case ReportKind::binary_eval:
      t.header = {"method", "model", "domain", "accuracy", "auroc", "n_pos", "n_neg", "skipped"};
      for (const auto& r : field(p, "rows")) {
        t.rows.push_back({r["method"], r["model"], r["domain"], r["accuracy"], r["auroc"], r["n_pos"], r["n_neg"],
                          r["skipped"]});
      }
      break;
    case ReportKind::pairwise_eval:
      t.header = {"method", "model_ids", "agreement_count", "n", "correct", "ties", "accuracy"};
      for (const auto& m : field(p, "methods")) {
        const auto ids = join_ids(m["model_ids"]);
        for (const auto& b : field(m, "buckets")) {
          t.rows.push_back({m["method"], ids, b["agreement_count"], b["n"], b["correct"], b["ties"], b["accuracy"]});
        }
        t.rows.push_back({m["method"], ids, "all", m["n"], m["correct"], m["ties"], m["accuracy"]});
      }
      break;
    case ReportKind::pointwise_eval:
      t.header = {"method", "model_ids", "n", "r", "p"};
      for (const auto& m : field(p, "methods")) {
        const auto& c = m["pearson"];
        t.rows.push_back({m["method"], join_ids(m["model_ids"]), m["points"].size(), c.is_null() ? c : c["r"],
                          c.is_null() ? c : c["p"]});
      }
      break;
    case ReportKind::corpus_stats:
      t.header = {"feature", "low", "high", "p_value"};
      for (const auto& r : field(p, "rows")) t.rows.push_back({r["feature"], r["low"], r["high"], r["p_value"]});
      break;
    case ReportKind::shift_report:
      t.header = {"term", "coefficient", "std_error", "t_value", "p_value", "vif"};
      for (const auto& r : field(field(p, "regression"), "terms")) {
        t.rows.push_back({r["name"], r["coefficient"], r["std_error"], r["t_value"], r["p_value"], r["vif"]});
      }
      break;
    case ReportKind::qe_correlation:
      t.header = {"metric", "condition", "n", "r", "p"};
      for (const auto& c : field(p, "cells")) {
        const auto& pr = c["pearson"];
        t.rows.push_back({c["metric"], c["condition"], c["points"].size(), pr.is_null() ? pr : pr["r"],
                          pr.is_null() ? pr : pr["p"]});
      }
      break;
  }
  return t.str();
}

std::vector<std::string> report_svg(const EvalReport& report, const Path& out_dir) {
  const auto panels = svg_panels(report);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<std::string> written;
  for (const auto& panel : panels) {
    const auto name = panel.name + ".svg";
    text::write_file(out_dir / name, render_scatter(panel.x, panel.y, panel.spec));
    written.push_back(name);
  }
  return written;
}

}  // namespace ttk::cli
