// Copyright 2026 The qweather Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qweather/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "qweather/error.hpp"
#include "qweather/ingest.hpp"
#include "qweather/util.hpp"

namespace qweather::report {

namespace {

using util::format_double;

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

std::string fx(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

/// Linear map from a data interval (padded by 5% each side) to pixels.
struct Scale {
  double lo;
  double hi;
  double px_lo;
  double px_hi;

  static Scale padded(double lo, double hi, double px_lo, double px_hi) {
    if (!(hi > lo)) {
      const double pad = std::max(std::abs(lo) * 0.05, 0.5);
      return {lo - pad, hi + pad, px_lo, px_hi};
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad, px_lo, px_hi};
  }

  [[nodiscard]] double operator()(double v) const { return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo); }
};

class Svg {
 public:
  explicit Svg(const std::string& title) {
    body_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\" width=\"800\" height=\"500\" "
             "font-family=\"sans-serif\" font-size=\"12\">\n"
          << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n"
          << "<text x=\"400\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title) << "</text>\n";
  }

  void raw(const std::string& s) { body_ << s << "\n"; }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0,
            const std::string& extra = "") {
    body_ << "<line x1=\"" << fx(x1) << "\" y1=\"" << fx(y1) << "\" x2=\"" << fx(x2) << "\" y2=\"" << fx(y2)
          << "\" stroke=\"" << stroke << "\" stroke-width=\"" << fx(width) << "\"" << extra << "/>\n";
  }

  void text(double x, double y, const std::string& s, const std::string& anchor = "middle", const std::string& extra = "") {
    body_ << "<text x=\"" << fx(x) << "\" y=\"" << fx(y) << "\" text-anchor=\"" << anchor << "\"" << extra << ">"
          << escape(s) << "</text>\n";
  }

  void y_axis(const Scale& y, const std::string& name) {
    line(kLeft, kTop, kLeft, kHeight - kBottom, "black");
    for (int i = 0; i <= 4; ++i) {
      const double v = y.lo + (y.hi - y.lo) * i / 4.0;
      const double py = y(v);
      line(kLeft - 4, py, kLeft, py, "black");
      text(kLeft - 6, py + 4, label(v), "end");
    }
    body_ << "<text x=\"16\" y=\"" << fx((kTop + kHeight - kBottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
          << fx((kTop + kHeight - kBottom) / 2) << ")\">" << escape(name) << "</text>\n";
  }

  void x_axis(const std::string& name) {
    line(kLeft, kHeight - kBottom, kWidth - kRight, kHeight - kBottom, "black");
    text((kLeft + kWidth - kRight) / 2, kHeight - 18, name);
  }

  std::string finish() {
    body_ << "</svg>\n";
    return body_.str();
  }

 private:
  std::ostringstream body_;
};

std::vector<std::vector<std::string>> parse_rows(std::string_view csv, std::vector<std::string>& header) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line)) throw ReportError("empty CSV");
  header.clear();
  for (auto f : util::split(line, ',')) header.emplace_back(f);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> r;
    for (auto f : util::split(line, ',')) r.emplace_back(f);
    if (r.size() != header.size()) throw ReportError("CSV row width " + std::to_string(r.size()) + " != header width");
    rows.push_back(std::move(r));
  }
  return rows;
}

double num(const std::string& s) {
  const auto v = util::parse_double(s);
  if (!v) throw ReportError("non-numeric CSV field '" + s + "'");
  return *v;
}

}  // namespace

// --- violin ----------------------------------------------------------------------

ViolinSeries violin_from_runs(const std::vector<train::RunReport>& runs) {
  if (runs.empty()) throw ReportError("violin needs at least one run");
  const std::size_t horizon = runs.front().predictions_native.size();
  if (horizon == 0) throw ReportError("violin needs a horizon of at least one day");
  ViolinSeries v;
  for (std::size_t d = 0; d < horizon; ++d) {
    ViolinDay day;
    day.day = static_cast<int>(d + 1);
    day.actual = runs.front().actuals_native.at(d);
    for (const auto& r : runs) {
      if (r.predictions_native.size() != horizon) throw ReportError("runs disagree on horizon");
      day.runs.push_back(r.predictions_native[d]);
    }
    const auto s = train::day_stats(day.runs);
    day.min = s.min;
    day.q1 = s.q1;
    day.median = s.median;
    day.q3 = s.q3;
    day.max = s.max;
    v.days.push_back(std::move(day));
  }
  return v;
}

std::string violin_csv(const ViolinSeries& v) {
  if (v.days.empty()) throw ReportError("empty violin series");
  const std::size_t k = v.days.front().runs.size();
  std::string out = "day,actual";
  for (std::size_t i = 0; i < k; ++i) out += ",run_" + std::to_string(i + 1);
  out += ",min,q1,median,q3,max\n";
  for (const auto& d : v.days) {
    if (d.runs.size() != k) throw ReportError("violin days disagree on run count");
    out += std::to_string(d.day) + "," + format_double(d.actual);
    for (double r : d.runs) out += "," + format_double(r);
    out += "," + format_double(d.min) + "," + format_double(d.q1) + "," + format_double(d.median) + "," +
           format_double(d.q3) + "," + format_double(d.max) + "\n";
  }
  return out;
}

ViolinSeries parse_violin_csv(std::string_view csv) {
  std::vector<std::string> header;
  const auto rows = parse_rows(csv, header);
  if (header.size() < 8 || header[0] != "day" || header[1] != "actual") throw ReportError("not a violin CSV");
  const std::size_t k = header.size() - 7;
  ViolinSeries v;
  for (const auto& r : rows) {
    ViolinDay d;
    d.day = static_cast<int>(num(r[0]));
    d.actual = num(r[1]);
    for (std::size_t i = 0; i < k; ++i) d.runs.push_back(num(r[2 + i]));
    d.min = num(r[2 + k]);
    d.q1 = num(r[3 + k]);
    d.median = num(r[4 + k]);
    d.q3 = num(r[5 + k]);
    d.max = num(r[6 + k]);
    v.days.push_back(std::move(d));
  }
  return v;
}

double silverman_bandwidth(std::vector<double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  std::sort(values.begin(), values.end());
  if (values.front() == values.back()) return 0.0;
  double mean = 0.0;
  for (double x : values) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const double iqr = train::quantile_sorted(values, 0.75) - train::quantile_sorted(values, 0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

std::string violin_svg(const ViolinSeries& v, const std::string& title) {
  if (v.days.empty()) throw ReportError("empty violin series");
  double lo = v.days.front().actual;
  double hi = lo;
  for (const auto& d : v.days) {
    lo = std::min({lo, d.min, d.actual});
    hi = std::max({hi, d.max, d.actual});
  }
  const auto y = Scale::padded(lo, hi, kHeight - kBottom, kTop);
  const double slot = (kWidth - kLeft - kRight) / static_cast<double>(v.days.size());
  Svg svg(title);
  svg.y_axis(y, "forecast");
  svg.x_axis("forecast day");

  for (std::size_t i = 0; i < v.days.size(); ++i) {
    const auto& d = v.days[i];
    const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
    const double half = 0.4 * slot;
    svg.text(cx, kHeight - kBottom + 16, std::to_string(d.day));

    if (d.runs.size() < 2) {
      for (double r : d.runs) {
        svg.raw("<circle cx=\"" + fx(cx) + "\" cy=\"" + fx(y(r)) + "\" r=\"3\" fill=\"#4477aa\"/>");
      }
    } else {
      const double h = silverman_bandwidth(d.runs);
      if (h > 0.0) {
        constexpr int kSteps = 48;
        const double a = std::max(d.min - 2.0 * h, y.lo);
        const double b = std::min(d.max + 2.0 * h, y.hi);
        std::vector<double> dens(kSteps + 1);
        double peak = 0.0;
        for (int s = 0; s <= kSteps; ++s) {
          const double t = a + (b - a) * s / kSteps;
          double acc = 0.0;
          for (double r : d.runs) acc += std::exp(-0.5 * ((t - r) / h) * ((t - r) / h));
          dens[static_cast<std::size_t>(s)] = acc / (static_cast<double>(d.runs.size()) * h * std::sqrt(2.0 * std::numbers::pi));
          peak = std::max(peak, dens[static_cast<std::size_t>(s)]);
        }
        std::string pts;
        for (int s = 0; s <= kSteps; ++s) {
          const double t = a + (b - a) * s / kSteps;
          pts += fx(cx + half * dens[static_cast<std::size_t>(s)] / peak) + "," + fx(y(t)) + " ";
        }
        for (int s = kSteps; s >= 0; --s) {
          const double t = a + (b - a) * s / kSteps;
          pts += fx(cx - half * dens[static_cast<std::size_t>(s)] / peak) + "," + fx(y(t)) + " ";
        }
        pts.pop_back();
        svg.raw("<polygon points=\"" + pts + "\" fill=\"#a6c8e8\" fill-opacity=\"0.6\" stroke=\"#4477aa\"/>");
      } else {
        // All runs agree: zero-width violin.
        svg.line(cx - half, y(d.median), cx + half, y(d.median), "#4477aa", 2.0);
      }
      svg.line(cx, y(d.min), cx, y(d.max), "black");
      svg.raw("<rect x=\"" + fx(cx - 0.08 * slot) + "\" y=\"" + fx(y(d.q3)) + "\" width=\"" + fx(0.16 * slot) +
              "\" height=\"" + fx(y(d.q1) - y(d.q3)) + "\" fill=\"white\" stroke=\"black\"/>");
      svg.line(cx - 0.08 * slot, y(d.median), cx + 0.08 * slot, y(d.median), "black", 2.0);
    }
    svg.raw("<circle cx=\"" + fx(cx) + "\" cy=\"" + fx(y(d.actual)) + "\" r=\"4\" fill=\"#cc3311\"/>");
  }
  return svg.finish();
}

// --- loss ------------------------------------------------------------------------

std::string loss_csv(const std::vector<train::LossHistory>& histories) {
  if (histories.empty()) throw ReportError("no loss histories");
  const std::size_t n = histories.front().size();
  for (const auto& h : histories) {
    if (h.size() != n) throw ReportError("loss histories have different lengths");
  }
  std::string out = "epoch,train_mean,val_mean\n";
  const double k = static_cast<double>(histories.size());
  for (std::size_t e = 0; e < n; ++e) {
    double tr = 0.0;
    double va = 0.0;
    for (const auto& h : histories) {
      tr += h[e].train_loss;
      va += h[e].val_loss;
    }
    out += std::to_string(e + 1) + "," + format_double(tr / k) + "," + format_double(va / k) + "\n";
  }
  return out;
}

train::LossHistory parse_loss_csv(std::string_view csv) {
  std::vector<std::string> header;
  const auto rows = parse_rows(csv, header);
  if (header != std::vector<std::string>{"epoch", "train_mean", "val_mean"}) throw ReportError("not a loss CSV");
  train::LossHistory h;
  for (const auto& r : rows) h.push_back({num(r[1]), num(r[2])});
  return h;
}

std::string loss_svg(const train::LossHistory& mean, const std::string& title) {
  Svg svg(title);
  svg.x_axis("epoch");
  if (mean.empty()) {
    svg.text(400, 250, "no training epochs");
    return svg.finish();
  }
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& e : mean) hi = std::max({hi, e.train_loss, e.val_loss});
  const auto y = Scale::padded(lo, hi, kHeight - kBottom, kTop);
  const auto x = Scale::padded(1.0, static_cast<double>(mean.size()), kLeft, kWidth - kRight);
  svg.y_axis(y, "loss (MSE, standardized)");
  for (int i = 0; i <= 4; ++i) {
    const double e = 1.0 + (static_cast<double>(mean.size()) - 1.0) * i / 4.0;
    svg.text(x(e), kHeight - kBottom + 16, label(std::round(e)));
  }
  std::string tr;
  std::string va;
  for (std::size_t e = 0; e < mean.size(); ++e) {
    const double px = x(static_cast<double>(e + 1));
    tr += fx(px) + "," + fx(y(mean[e].train_loss)) + " ";
    va += fx(px) + "," + fx(y(mean[e].val_loss)) + " ";
  }
  tr.pop_back();
  va.pop_back();
  svg.raw("<polyline points=\"" + tr + "\" fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"2\"/>");
  svg.raw("<polyline points=\"" + va + "\" fill=\"none\" stroke=\"#cc3311\" stroke-width=\"2\"/>");
  svg.text(kWidth - kRight - 10, kTop + 14, "training", "end", " fill=\"#1f5fbf\"");
  svg.text(kWidth - kRight - 10, kTop + 30, "validation", "end", " fill=\"#cc3311\"");
  return svg.finish();
}

// --- comparison --------------------------------------------------------------------

std::string comparison_csv(const ComparisonTable& t) {
  if (t.rows.empty()) throw ReportError("empty comparison table");
  std::string out = "model,experiment,depth,mae,accuracy_pct\n";
  for (const auto& r : t.rows) {
    out += r.model + "," + r.experiment + "," + r.depth + "," + format_double(r.mae) + "," +
           format_double(r.accuracy_pct) + "\n";
  }
  return out;
}

ComparisonTable parse_comparison_csv(std::string_view csv) {
  std::vector<std::string> header;
  const auto rows = parse_rows(csv, header);
  if (header != std::vector<std::string>{"model", "experiment", "depth", "mae", "accuracy_pct"}) {
    throw ReportError("not a comparison CSV");
  }
  ComparisonTable t;
  for (const auto& r : rows) t.rows.push_back({r[0], r[1], r[2], num(r[3]), num(r[4])});
  return t;
}

std::string mae_svg(const ComparisonTable& t, const std::string& title) {
  if (t.rows.empty()) throw ReportError("empty comparison table");
  std::vector<const ComparisonRow*> bars;
  const ComparisonRow* baseline = nullptr;
  double hi = 0.0;
  for (const auto& r : t.rows) {
    hi = std::max(hi, r.mae);
    if (r.model == "RNN") {
      baseline = &r;
    } else {
      bars.push_back(&r);
    }
  }
  const auto y = Scale{0.0, hi > 0.0 ? hi * 1.1 : 1.0, kHeight - kBottom, kTop};
  Svg svg(title);
  svg.y_axis(y, "MAE (standardized)");
  svg.x_axis("variational layers");
  const double slot = (kWidth - kLeft - kRight) / static_cast<double>(std::max<std::size_t>(bars.size(), 1));
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& r = *bars[i];
    const double x0 = kLeft + slot * (static_cast<double>(i) + 0.15);
    const std::string fill = r.experiment == "1" ? "#555555" : "#bbbbbb";
    svg.raw("<rect x=\"" + fx(x0) + "\" y=\"" + fx(y(r.mae)) + "\" width=\"" + fx(0.7 * slot) + "\" height=\"" +
            fx(y(0.0) - y(r.mae)) + "\" fill=\"" + fill + "\"/>");
    svg.text(x0 + 0.35 * slot, y(r.mae) - 4, label(r.mae));
    svg.text(x0 + 0.35 * slot, kHeight - kBottom + 16, "Exp " + r.experiment + " / " + r.depth);
  }
  if (baseline) {
    svg.line(kLeft, y(baseline->mae), kWidth - kRight, y(baseline->mae), "#228833", 2.0,
             " stroke-dasharray=\"8 5\"");
    svg.text(kWidth - kRight - 4, y(baseline->mae) - 6, "RNN " + label(baseline->mae), "end", " fill=\"#228833\"");
  }
  return svg.finish();
}

std::string run_mae_csv(const std::vector<train::RunReport>& runs) {
  std::string out = "run,seed,mae,accuracy_pct,mae_native\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    out += std::to_string(i + 1) + "," + std::to_string(runs[i].seed) + "," + format_double(runs[i].mae) + "," +
           format_double(runs[i].accuracy_pct) + "," + format_double(runs[i].mae_native) + "\n";
  }
  return out;
}

namespace {

std::string run_mae_svg(std::string_view csv, const std::string& title) {
  std::vector<std::string> header;
  const auto rows = parse_rows(csv, header);
  Svg svg(title);
  svg.x_axis("run");
  double hi = 0.0;
  for (const auto& r : rows) hi = std::max(hi, num(r[2]));
  const auto y = Scale{0.0, hi > 0.0 ? hi * 1.1 : 1.0, kHeight - kBottom, kTop};
  svg.y_axis(y, "MAE (standardized)");
  const double slot = (kWidth - kLeft - kRight) / static_cast<double>(std::max<std::size_t>(rows.size(), 1));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double mae = num(rows[i][2]);
    const double x0 = kLeft + slot * (static_cast<double>(i) + 0.15);
    svg.raw("<rect x=\"" + fx(x0) + "\" y=\"" + fx(y(mae)) + "\" width=\"" + fx(0.7 * slot) + "\" height=\"" +
            fx(y(0.0) - y(mae)) + "\" fill=\"#777777\"/>");
    svg.text(x0 + 0.35 * slot, kHeight - kBottom + 16, rows[i][0]);
  }
  return svg.finish();
}

}  // namespace

void emit_model_report(const std::filesystem::path& dir, const std::vector<train::RunReport>& runs,
                       const std::string& title) {
  if (runs.empty()) throw ReportError("no runs for " + title);
  const std::string vcsv = violin_csv(violin_from_runs(runs));
  ingest::atomic_write(dir / "violin.csv", vcsv);
  ingest::atomic_write(dir / "violin.svg", violin_svg(parse_violin_csv(vcsv), title + " - forecast distribution"));

  std::vector<train::LossHistory> hs;
  for (const auto& r : runs) hs.push_back(r.history);
  const std::string lcsv = loss_csv(hs);
  ingest::atomic_write(dir / "loss.csv", lcsv);
  ingest::atomic_write(dir / "loss.svg", loss_svg(parse_loss_csv(lcsv), title + " - mean loss"));

  const std::string mcsv = run_mae_csv(runs);
  ingest::atomic_write(dir / "mae.csv", mcsv);
  ingest::atomic_write(dir / "mae.svg", run_mae_svg(mcsv, title + " - MAE per run"));
}

void emit_comparison(const std::filesystem::path& dir, const ComparisonTable& t, const std::string& title) {
  const std::string csv = comparison_csv(t);
  ingest::atomic_write(dir / "comparison.csv", csv);
  ingest::atomic_write(dir / "comparison.svg", mae_svg(parse_comparison_csv(csv), title));
}

}  // namespace qweather::report
