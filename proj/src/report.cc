// Copyright 2026 The idrisk Authors
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

#include "idrisk/report.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace idrisk {

using nlohmann::json;

namespace {

template <typename T>
json MatrixJson(const Matrix<T>& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) {
      if constexpr (std::is_same_v<T, std::uint8_t>) {
        row.push_back(static_cast<int>(m(i, k)));
      } else {
        row.push_back(m(i, k));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
std::string MatrixCsv(const Matrix<T>& m) {
  std::string out;
  for (std::size_t k = 0; k < m.cols(); ++k) {
    if (k) out += ',';
    out += "syn_" + std::to_string(k + 1);
  }
  out += '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t k = 0; k < m.cols(); ++k) {
      if (k) out += ',';
      if constexpr (std::is_floating_point_v<T>) {
        out += FormatDouble(m(i, k));
      } else {
        out += std::to_string(static_cast<unsigned>(m(i, k)));
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace

json ToJson(const Schema& schema) {
  json vars = json::array();
  for (const auto& v : schema.variables()) {
    json entry{{"name", v.name}, {"kind", KindName(v.kind)}};
    if (v.is_categorical()) entry["levels"] = v.levels;
    vars.push_back(std::move(entry));
  }
  return json{{"variables", vars}};
}

Schema SchemaFromJson(const json& value) {
  if (!value.is_object() || !value.contains("variables") ||
      !value["variables"].is_array()) {
    throw DataError("schema: expected an object with a 'variables' array");
  }
  std::vector<VariableSpec> specs;
  for (const auto& entry : value["variables"]) {
    if (!entry.is_object() || !entry.contains("name") ||
        !entry["name"].is_string()) {
      throw DataError("schema: every variable needs a string 'name'");
    }
    const std::string name = entry["name"];
    const std::string kind = entry.value("kind", std::string("continuous"));
    if (kind == "continuous") {
      specs.push_back(VariableSpec::Continuous(name));
    } else if (kind == "categorical") {
      if (!entry.contains("levels") || !entry["levels"].is_array()) {
        throw DataError("schema: categorical variable '" + name +
                        "' needs a 'levels' array");
      }
      std::vector<std::string> levels;
      for (const auto& level : entry["levels"]) {
        levels.push_back(level.is_string() ? level.get<std::string>()
                                           : level.dump());
      }
      specs.push_back(VariableSpec::Categorical(name, std::move(levels)));
    } else {
      throw DataError("schema: variable '" + name + "' has unknown kind '" +
                      kind + "'");
    }
  }
  return Schema(std::move(specs));
}

Schema LoadSchema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema '" + path.string() + "'");
  json value;
  try {
    in >> value;
  } catch (const json::exception& e) {
    throw DataError("schema '" + path.string() + "': " + e.what());
  }
  return SchemaFromJson(value);
}

json ToJson(const RiskResult& result) {
  return json{{"n", result.num_records()},
              {"m", result.num_synthetic()},
              {"file_risk", result.file_risk},
              {"true_match_rate", result.true_match_rate},
              {"false_match_rate", result.false_match_rate},
              {"c", MatrixJson(result.c)},
              {"t", MatrixJson(result.t)},
              {"ir", MatrixJson(result.ir)}};
}

json ToJson(const UtilityResult& result) {
  return json{{"u_p", result.per_dataset},
              {"converged", result.converged},
              {"warnings", result.warnings}};
}

json ToJson(const BoxSummary& box) {
  return json{{"min", box.min},
              {"q1", box.q1},
              {"median", box.median},
              {"q3", box.q3},
              {"max", box.max}};
}

json ToJson(const Box2D& box) {
  return json{{"risk", ToJson(box.risk)}, {"utility", ToJson(box.utility)}};
}

json ToJson(const SweepResult& sweep, bool include_matrices) {
  json per_radius = json::array();
  for (std::size_t r = 0; r < sweep.radii.size(); ++r) {
    json entry{{"radius", sweep.radii[r]},
               {"file_risk", sweep.file_risk[r]},
               {"mean", sweep.mean_risk[r]},
               {"box", ToJson(sweep.boxes[r])}};
    if (include_matrices && r < sweep.results.size()) {
      entry["risk"] = ToJson(sweep.results[r]);
    }
    per_radius.push_back(std::move(entry));
  }
  return json{{"synthesized", sweep.synthesized},
              {"best_radius", sweep.best_radius},
              {"radii", per_radius}};
}

json ToJson(const ScenarioOutcome& outcome) {
  return json{{"scenario", outcome.scenario.name},
              {"synthesized", outcome.scenario.visit_sequence},
              {"radius", outcome.radius},
              {"risk", outcome.risk},
              {"utility", outcome.utility},
              {"box", ToJson(outcome.box)},
              {"sweep", ToJson(outcome.sweep)}};
}

json ToJson(const MStudyArm& arm) {
  return json{{"m", arm.m},
              {"mean_risk", arm.mean_risk},
              {"mean_utility", arm.mean_utility},
              {"box", ToJson(arm.box)}};
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("error writing '" + path.string() + "'");
}

void WriteJson(const std::filesystem::path& path, const json& value) {
  WriteText(path, value.dump(2) + "\n");
}

void WriteRiskMatrices(const RiskResult& result,
                       const std::filesystem::path& dir) {
  WriteText(dir / "c.csv", MatrixCsv(result.c));
  WriteText(dir / "t.csv", MatrixCsv(result.t));
  WriteText(dir / "ir.csv", MatrixCsv(result.ir));
}

std::string SweepCsv(std::span<const SweepResult> sweeps,
                     std::span<const std::string> labels) {
  std::string out = "scenario,radius,replicate,file_risk\n";
  for (std::size_t s = 0; s < sweeps.size(); ++s) {
    const auto& sweep = sweeps[s];
    for (std::size_t r = 0; r < sweep.radii.size(); ++r) {
      for (std::size_t k = 0; k < sweep.file_risk[r].size(); ++k) {
        out += labels[s] + "," + FormatDouble(sweep.radii[r]) + "," +
               std::to_string(k + 1) + "," +
               FormatDouble(sweep.file_risk[r][k]) + "\n";
      }
    }
  }
  return out;
}

std::string ScenarioCsv(std::span<const ScenarioOutcome> outcomes) {
  std::string out = "scenario,radius,replicate,file_risk,u_p\n";
  for (const auto& o : outcomes) {
    for (std::size_t k = 0; k < o.risk.size(); ++k) {
      out += o.scenario.name + "," + FormatDouble(o.radius) + "," +
             std::to_string(k + 1) + "," + FormatDouble(o.risk[k]) + "," +
             FormatDouble(o.utility[k]) + "\n";
    }
  }
  return out;
}

std::string MStudyCsv(std::span<const MStudyArm> arms) {
  std::string out = "m,repetition,mean_file_risk,mean_u_p\n";
  for (const auto& arm : arms) {
    for (std::size_t r = 0; r < arm.mean_risk.size(); ++r) {
      out += std::to_string(arm.m) + "," + std::to_string(r + 1) + "," +
             FormatDouble(arm.mean_risk[r]) + "," +
             FormatDouble(arm.mean_utility[r]) + "\n";
    }
  }
  return out;
}

namespace {

constexpr const char* kPalette[] = {"#1b9e77", "#d95f02", "#7570b3",
                                    "#e7298a", "#66a61e", "#e6ab02"};

// Linear map from a data interval onto a pixel interval.
struct Axis {
  double lo, hi, px_lo, px_hi;

  static Axis Fit(double lo, double hi, double px_lo, double px_hi) {
    if (!(hi > lo)) {
      const double pad = lo == 0 ? 1.0 : std::fabs(lo) * 0.05;
      lo -= pad;
      hi += pad;
    } else {
      const double pad = (hi - lo) * 0.05;
      lo -= pad;
      hi += pad;
    }
    return Axis{lo, hi, px_lo, px_hi};
  }
  double operator()(double v) const {
    return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
  }
};

std::string Num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

std::string Px(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(1);
  os << v;
  return os.str();
}

class Svg {
 public:
  Svg(int width, int height) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
         << "\" height=\"" << height << "\" font-family=\"sans-serif\" "
         << "font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" "
         << "fill=\"white\"/>\n";
  }
  void Line(double x1, double y1, double x2, double y2,
            const std::string& color, double width = 1) {
    out_ << "<line x1=\"" << Px(x1) << "\" y1=\"" << Px(y1) << "\" x2=\""
         << Px(x2) << "\" y2=\"" << Px(y2) << "\" stroke=\"" << color
         << "\" stroke-width=\"" << width << "\"/>\n";
  }
  void Rect(double x1, double y1, double x2, double y2,
            const std::string& color, double opacity) {
    out_ << "<rect x=\"" << Px(std::min(x1, x2)) << "\" y=\""
         << Px(std::min(y1, y2)) << "\" width=\"" << Px(std::fabs(x2 - x1))
         << "\" height=\"" << Px(std::fabs(y2 - y1)) << "\" fill=\"" << color
         << "\" fill-opacity=\"" << opacity << "\" stroke=\"" << color
         << "\"/>\n";
  }
  void Circle(double x, double y, const std::string& color) {
    out_ << "<circle cx=\"" << Px(x) << "\" cy=\"" << Px(y)
         << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
  }
  void Text(double x, double y, const std::string& text,
            const char* anchor = "middle") {
    out_ << "<text x=\"" << Px(x) << "\" y=\"" << Px(y)
         << "\" text-anchor=\"" << anchor << "\">" << text << "</text>\n";
  }
  void Frame(double x0, double y0, double x1, double y1, const Axis& yaxis,
             const std::string& ylabel) {
    Line(x0, y1, x1, y1, "black");
    Line(x0, y0, x0, y1, "black");
    for (int t = 0; t <= 4; ++t) {
      const double v = yaxis.lo + (yaxis.hi - yaxis.lo) * t / 4.0;
      Line(x0 - 4, yaxis(v), x0, yaxis(v), "black");
      Text(x0 - 6, yaxis(v) + 4, Num(v), "end");
    }
    Text(x0 - 10, y0 - 8, ylabel, "start");
  }
  std::string Finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  std::ostringstream out_;
};

void Bounds(std::span<const double> values, double& lo, double& hi) {
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
}

}  // namespace

std::string SweepSvg(std::span<const SweepResult> sweeps,
                     std::span<const std::string> labels) {
  const int panel_w = 320;
  const int panel_h = 260;
  Svg svg(panel_w * static_cast<int>(std::max<std::size_t>(1, sweeps.size())),
          panel_h + 40);
  for (std::size_t s = 0; s < sweeps.size(); ++s) {
    const auto& sweep = sweeps[s];
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& risks : sweep.file_risk) Bounds(risks, lo, hi);
    const double x0 = panel_w * static_cast<double>(s) + 60;
    const double x1 = x0 + panel_w - 80;
    const double y0 = 30;
    const double y1 = panel_h;
    const Axis y = Axis::Fit(lo, hi, y1, y0);
    svg.Frame(x0, y0, x1, y1, y, "file risk");
    svg.Text((x0 + x1) / 2, 16, labels[s]);
    const double slot = (x1 - x0) / static_cast<double>(sweep.radii.size());
    for (std::size_t r = 0; r < sweep.radii.size(); ++r) {
      const auto& b = sweep.boxes[r];
      const double cx = x0 + slot * (static_cast<double>(r) + 0.5);
      const double half = slot * 0.3;
      const std::string color = r == sweep.best_index ? "#d95f02" : "#1b9e77";
      svg.Line(cx, y(b.min), cx, y(b.q1), "black");
      svg.Line(cx, y(b.q3), cx, y(b.max), "black");
      svg.Rect(cx - half, y(b.q1), cx + half, y(b.q3), color, 0.4);
      svg.Line(cx - half, y(b.median), cx + half, y(b.median), "black", 2);
      svg.Text(cx, y1 + 14, Num(sweep.radii[r] * 100) + "%");
    }
    svg.Text((x0 + x1) / 2, y1 + 30, "radius r");
  }
  return svg.Finish();
}

std::string ScenarioSvg(std::span<const ScenarioOutcome> outcomes) {
  Svg svg(520, 420);
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& o : outcomes) {
    Bounds(o.utility, xlo, xhi);
    Bounds(o.risk, ylo, yhi);
  }
  const double x0 = 70, x1 = 490, y0 = 30, y1 = 370;
  const Axis x = Axis::Fit(xlo, xhi, x0, x1);
  const Axis y = Axis::Fit(ylo, yhi, y1, y0);
  svg.Frame(x0, y0, x1, y1, y, "identification risk");
  for (int t = 0; t <= 4; ++t) {
    const double v = x.lo + (x.hi - x.lo) * t / 4.0;
    svg.Line(x(v), y1, x(v), y1 + 4, "black");
    svg.Text(x(v), y1 + 16, Num(v));
  }
  svg.Text((x0 + x1) / 2, y1 + 34, "propensity score utility U_p");
  for (std::size_t s = 0; s < outcomes.size(); ++s) {
    const auto& o = outcomes[s];
    const std::string color = kPalette[s % std::size(kPalette)];
    for (std::size_t k = 0; k < o.risk.size(); ++k) {
      svg.Circle(x(o.utility[k]), y(o.risk[k]), color);
    }
    svg.Rect(x(o.box.utility.q1), y(o.box.risk.q1), x(o.box.utility.q3),
             y(o.box.risk.q3), color, 0.15);
    svg.Text(x1 - 40, y0 + 14 * static_cast<double>(s + 1),
             o.scenario.name, "start");
    svg.Circle(x1 - 48, y0 + 14 * static_cast<double>(s + 1) - 4, color);
  }
  return svg.Finish();
}

std::string MStudySvg(std::span<const MStudyArm> arms) {
  Svg svg(520, 420);
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& arm : arms) {
    Bounds(arm.mean_utility, xlo, xhi);
    Bounds(arm.mean_risk, ylo, yhi);
  }
  const double x0 = 70, x1 = 490, y0 = 30, y1 = 370;
  const Axis x = Axis::Fit(xlo, xhi, x0, x1);
  const Axis y = Axis::Fit(ylo, yhi, y1, y0);
  svg.Frame(x0, y0, x1, y1, y, "mean identification risk");
  for (int t = 0; t <= 4; ++t) {
    const double v = x.lo + (x.hi - x.lo) * t / 4.0;
    svg.Line(x(v), y1, x(v), y1 + 4, "black");
    svg.Text(x(v), y1 + 16, Num(v));
  }
  svg.Text((x0 + x1) / 2, y1 + 34, "mean propensity score utility U_p");
  for (std::size_t a = 0; a < arms.size(); ++a) {
    const auto& b = arms[a].box;
    const std::string color = kPalette[a % std::size(kPalette)];
    svg.Rect(x(b.utility.q1), y(b.risk.q1), x(b.utility.q3), y(b.risk.q3),
             color, 0.25);
    const double mx = x(b.utility.median);
    const double my = y(b.risk.median);
    svg.Line(mx, my, x(b.utility.min), my, color);
    svg.Line(mx, my, x(b.utility.max), my, color);
    svg.Line(mx, my, mx, y(b.risk.min), color);
    svg.Line(mx, my, mx, y(b.risk.max), color);
    svg.Text(x1 - 40, y0 + 14 * static_cast<double>(a + 1),
             "m = " + std::to_string(arms[a].m), "start");
    svg.Circle(x1 - 48, y0 + 14 * static_cast<double>(a + 1) - 4, color);
  }
  return svg.Finish();
}

}  // namespace idrisk
