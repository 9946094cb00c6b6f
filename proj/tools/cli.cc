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

#include "cli.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "idrisk/cart.h"
#include "idrisk/dataset.h"
#include "idrisk/experiments.h"
#include "idrisk/report.h"
#include "idrisk/risk.h"
#include "idrisk/rng.h"
#include "idrisk/utility.h"
#include "json.hpp"

namespace idrisk::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// A usage problem: bad flag combination or missing input. Exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flag values with JSON-config fallback. Flags given on the command line win
// over the config file; the config file wins over built-in defaults. Config
// keys are the long flag names with '-' replaced by '_'.
class Settings {
 public:
  void Bind(const std::string& key, CLI::Option* option) {
    options_[key].push_back(option);
  }
  void LoadConfig(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("--config: cannot open '" + path + "'");
    try {
      in >> config_;
    } catch (const json::exception& e) {
      throw UsageError("--config: '" + path + "' is not valid JSON: " +
                       e.what());
    }
    if (!config_.is_object()) {
      throw UsageError("--config: top level must be a JSON object");
    }
  }
  const json& config() const { return config_; }

  bool FromFlag(const std::string& key) const {
    return Parsed(key) != nullptr;
  }
  bool FromConfig(const std::string& key) const {
    return config_.is_object() && config_.contains(key);
  }
  bool Has(const std::string& key) const {
    return FromFlag(key) || FromConfig(key);
  }

  template <typename T>
  std::optional<T> Find(const std::string& key) const {
    if (const CLI::Option* option = Parsed(key)) return option->as<T>();
    if (FromConfig(key)) {
      try {
        return config_.at(key).get<T>();
      } catch (const json::exception&) {
        throw UsageError("config field '" + key + "' has the wrong type");
      }
    }
    return std::nullopt;
  }
  template <typename T>
  T Get(const std::string& key, T fallback) const {
    auto v = Find<T>(key);
    return v ? *v : fallback;
  }
  template <typename T>
  T Require(const std::string& key) const {
    auto v = Find<T>(key);
    if (!v) {
      throw UsageError("--" + Flag(key) + " is required (or '" + key +
                       "' in --config)");
    }
    return *v;
  }
  static std::string Flag(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
  }

 private:
  // The same key is bound once per subcommand; only one of them is parsed.
  const CLI::Option* Parsed(const std::string& key) const {
    auto it = options_.find(key);
    if (it == options_.end()) return nullptr;
    for (const CLI::Option* option : it->second) {
      if (option->count() > 0) return option;
    }
    return nullptr;
  }

  std::map<std::string, std::vector<CLI::Option*>> options_;
  json config_;
};

// Storage for CLI11 to write into; values are read back through Settings.
struct FlagStorage {
  std::string config, out, orig, schema, known_radius, svg_dummy;
  std::vector<std::string> syn, known, synvars, categorical, radius, visit,
      scenarios;
  std::vector<double> radii;
  std::vector<int> m_values;
  double r = 0, radius_fixed = 0, cp = 0;
  bool percentage = true, euclidean = false, no_utility = false, svg = false;
  int m = 0, repetitions = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0, min_bucket = 0, min_split = 0;
  unsigned threads = 0;
};

// Case-sensitive wildcard match supporting '*' and '?'.
bool WildcardMatch(std::string_view pattern, std::string_view text) {
  std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

// Expands each --syn entry: a directory (all *.csv inside), a glob on the file
// name, or a plain path. Each entry's matches are sorted by name.
std::vector<fs::path> ExpandSynPaths(const std::vector<std::string>& specs) {
  std::vector<fs::path> out;
  for (const auto& spec : specs) {
    const fs::path path(spec);
    std::vector<fs::path> matches;
    if (fs::is_directory(path)) {
      for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
          matches.push_back(entry.path());
        }
      }
    } else if (spec.find_first_of("*?") != std::string::npos) {
      const fs::path dir =
          path.has_parent_path() ? path.parent_path() : fs::path(".");
      const std::string pattern = path.filename().string();
      if (fs::is_directory(dir)) {
        for (const auto& entry : fs::directory_iterator(dir)) {
          if (entry.is_regular_file() &&
              WildcardMatch(pattern, entry.path().filename().string())) {
            matches.push_back(entry.path());
          }
        }
      }
    } else {
      matches.push_back(path);
    }
    if (matches.empty()) {
      throw UsageError("--syn: no files match '" + spec + "'");
    }
    std::sort(matches.begin(), matches.end());
    out.insert(out.end(), matches.begin(), matches.end());
  }
  return out;
}

// Original data: --orig CSV with optional --schema / --categorical, or a
// sibling "<stem>.schema.json" when neither is given.
Dataset LoadOriginal(const Settings& s, const std::string& path) {
  CsvReadOptions options;
  if (auto schema = s.Find<std::string>("schema")) {
    options.schema = LoadSchema(*schema);
  } else if (auto cats = s.Find<std::vector<std::string>>("categorical")) {
    options.categorical = *cats;
  } else {
    fs::path sibling = fs::path(path).replace_extension(".schema.json");
    if (fs::exists(sibling)) options.schema = LoadSchema(sibling);
  }
  return LoadCsv(path, options);
}

// Experiments accept --orig or generate CE-like data with --n.
Dataset ExperimentData(const Settings& s) {
  if (auto orig = s.Find<std::string>("orig")) return LoadOriginal(s, *orig);
  if (auto n = s.Find<std::size_t>("n")) {
    return GenerateCeLike(*n, s.Get<std::uint64_t>("seed", 1));
  }
  throw UsageError("--orig is required (or --n to generate CE-like data)");
}

std::map<std::string, double> ParseRadiusMap(
    const std::vector<std::string>& entries) {
  std::map<std::string, double> radii;
  for (const auto& entry : entries) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError("--radius: expected NAME=VALUE, got '" + entry + "'");
    }
    const std::string name = entry.substr(0, eq);
    try {
      std::size_t used = 0;
      const double v = std::stod(entry.substr(eq + 1), &used);
      if (used != entry.size() - eq - 1) throw std::invalid_argument("tail");
      radii[name] = v;
    } catch (const std::exception&) {
      throw UsageError("--radius: value for '" + name + "' is not a number");
    }
  }
  return radii;
}

// Resolves r (scalar, broadcast to every continuous known/synthesized
// variable) or a per-variable radius map.
std::map<std::string, double> ResolveRadii(const Settings& s,
                                           const Schema& schema,
                                           const std::vector<std::string>& known,
                                           const std::vector<std::string>& syn) {
  if (s.FromFlag("r") && s.FromFlag("radius")) {
    throw UsageError(
        "--r and --radius conflict: pass one scalar --r for every continuous "
        "variable, or --radius NAME=VALUE for each one, not both");
  }
  std::optional<double> scalar;
  std::optional<std::map<std::string, double>> per_var;
  if (s.FromFlag("r")) {
    scalar = s.Find<double>("r");
  } else if (s.FromFlag("radius")) {
    per_var = ParseRadiusMap(*s.Find<std::vector<std::string>>("radius"));
  } else if (s.FromConfig("r")) {
    const json& r = s.config().at("r");
    if (s.FromConfig("radius")) {
      throw UsageError(
          "config fields 'r' and 'radius' conflict: give one of them");
    }
    if (r.is_number()) {
      scalar = r.get<double>();
    } else if (r.is_object()) {
      per_var.emplace();
      for (const auto& [name, value] : r.items()) {
        if (!value.is_number()) {
          throw UsageError("config field 'r': radius for '" + name +
                           "' is not a number");
        }
        (*per_var)[name] = value.get<double>();
      }
    } else {
      throw UsageError("config field 'r' must be a number or an object");
    }
  } else if (s.FromConfig("radius")) {
    per_var = ParseRadiusMap(s.Get<std::vector<std::string>>("radius", {}));
  }
  if (per_var) return *per_var;
  std::map<std::string, double> radii;
  bool needs_radius = false;
  for (const auto* names : {&known, &syn}) {
    for (const auto& name : *names) {
      auto idx = schema.Find(name);
      if (idx && !schema[*idx].is_categorical()) {
        needs_radius = true;
        if (scalar) radii[name] = *scalar;
      }
    }
  }
  if (needs_radius && !scalar) {
    throw UsageError("--r is required: continuous variables need a radius");
  }
  return radii;
}

std::string Fixed(double v, int precision = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

ExperimentConfig ExperimentSettings(const Settings& s) {
  ExperimentConfig cfg;
  cfg.known = s.Get<std::vector<std::string>>("known", cfg.known);
  const std::string known_radius =
      s.FromConfig("known_radius") && s.config().at("known_radius").is_number()
          ? FormatDouble(s.config().at("known_radius").get<double>())
          : "0.1";
  std::string mode = s.FromFlag("known_radius")
                         ? *s.Find<std::string>("known_radius")
                         : known_radius;
  if (!s.FromFlag("known_radius") && s.FromConfig("known_radius") &&
      s.config().at("known_radius").is_string()) {
    mode = s.config().at("known_radius").get<std::string>();
  }
  if (mode != "swept") {
    try {
      std::size_t used = 0;
      cfg.known_radius = std::stod(mode, &used);
      if (used != mode.size()) throw std::invalid_argument("tail");
    } catch (const std::exception&) {
      throw UsageError("--known-radius must be a number or 'swept'");
    }
  }
  cfg.percentage = s.Get<bool>("percentage", true);
  cfg.euclidean = s.Get<bool>("euclidean", false);
  cfg.cart.min_bucket = s.Get<std::size_t>("min_bucket", cfg.cart.min_bucket);
  cfg.cart.min_split = s.Get<std::size_t>("min_split", cfg.cart.min_split);
  cfg.cart.complexity_threshold =
      s.Get<double>("cp", cfg.cart.complexity_threshold);
  cfg.threads = s.Get<unsigned>("threads", 0);
  return cfg;
}

std::vector<Scenario> ScenarioList(const Settings& s,
                                   std::vector<std::string> fallback) {
  std::vector<Scenario> out;
  for (const auto& name :
       s.Get<std::vector<std::string>>("scenarios", std::move(fallback))) {
    if (name == "all") {
      for (auto& sc : AllScenarios()) out.push_back(std::move(sc));
    } else {
      out.push_back(ParseScenario(name));
    }
  }
  if (out.empty()) throw UsageError("--scenarios: no scenarios given");
  return out;
}

fs::path OutDir(const Settings& s) {
  return fs::path(s.Get<std::string>("out", "idrisk_out"));
}

int RunEvaluate(const Settings& s, std::ostream& out) {
  const Dataset orig = LoadOriginal(s, s.Require<std::string>("orig"));
  const auto syn_paths =
      ExpandSynPaths(s.Require<std::vector<std::string>>("syn"));
  std::vector<Dataset> syns;
  for (const auto& path : syn_paths) {
    syns.push_back(LoadCsv(path, orig.schema()));
  }
  RiskConfig cfg;
  cfg.known = s.Require<std::vector<std::string>>("known");
  cfg.synthesized = s.Require<std::vector<std::string>>("synvars");
  cfg.radii = ResolveRadii(s, orig.schema(), cfg.known, cfg.synthesized);
  cfg.percentage = s.Get<bool>("percentage", true);
  cfg.euclidean = s.Get<bool>("euclidean", false);

  EvaluateOptions eval;
  eval.threads = s.Get<unsigned>("threads", 0);
  const RiskResult risk = EvaluateFast(orig, syns, cfg, eval);
  std::optional<UtilityResult> utility;
  if (!s.Get<bool>("no_utility", false)) {
    utility = PropensityUtility(orig, syns, {}, eval.threads);
  }

  const fs::path dir = OutDir(s);
  WriteRiskMatrices(risk, dir / "risk");
  json files = json::array();
  for (const auto& p : syn_paths) files.push_back(p.filename().string());
  json summary{{"n", risk.num_records()},
               {"m", risk.num_synthetic()},
               {"synthetic_files", files},
               {"known", cfg.known},
               {"synthesized", cfg.synthesized},
               {"radii", cfg.radii},
               {"percentage", cfg.percentage},
               {"euclidean", cfg.euclidean},
               {"file_risk", risk.file_risk},
               {"true_match_rate", risk.true_match_rate},
               {"false_match_rate", risk.false_match_rate}};
  if (utility) summary["u_p"] = utility->per_dataset;
  WriteJson(dir / "risk" / "summary.json", summary);
  WriteJson(dir / "risk" / "result.json", ToJson(risk));
  if (utility) {
    WriteJson(dir / "utility" / "utility.json", ToJson(*utility));
    std::string csv = "dataset,u_p\n";
    for (std::size_t k = 0; k < utility->per_dataset.size(); ++k) {
      csv += syn_paths[k].filename().string() + "," +
             FormatDouble(utility->per_dataset[k]) + "\n";
    }
    WriteText(dir / "utility" / "utility.csv", csv);
  }

  out << "records: " << risk.num_records()
      << "  synthetic datasets: " << risk.num_synthetic() << "\n";
  out << std::left << std::setw(28) << "dataset" << std::right << std::setw(12)
      << "file_risk" << std::setw(12) << "true_match" << std::setw(12)
      << "false_match" << std::setw(12) << "U_p" << "\n";
  for (std::size_t k = 0; k < risk.num_synthetic(); ++k) {
    out << std::left << std::setw(28) << syn_paths[k].filename().string()
        << std::right << std::setw(12) << Fixed(risk.file_risk[k])
        << std::setw(12) << Fixed(risk.true_match_rate[k]) << std::setw(12)
        << Fixed(risk.false_match_rate[k]) << std::setw(12)
        << (utility ? Fixed(utility->per_dataset[k], 6) : std::string("-"))
        << "\n";
  }
  out << "mean file risk: " << Fixed(Mean(risk.file_risk)) << "\n";
  if (utility) {
    for (const auto& w : utility->warnings) out << "warning: " << w << "\n";
  }
  out << "wrote " << (dir / "risk").string() << "\n";
  return 0;
}

int RunSynthesize(const Settings& s, std::ostream& out) {
  const Dataset orig = LoadOriginal(s, s.Require<std::string>("orig"));
  SynthesisPlan plan;
  plan.visit_sequence = s.Require<std::vector<std::string>>("visit");
  plan.m = s.Get<int>("m", 1);
  plan.seed = s.Get<std::uint64_t>("seed", 1);
  plan.min_bucket = s.Get<std::size_t>("min_bucket", plan.min_bucket);
  plan.min_split = s.Get<std::size_t>("min_split", plan.min_split);
  plan.complexity_threshold = s.Get<double>("cp", plan.complexity_threshold);
  const auto replicates =
      Synthesize(orig, plan, s.Get<unsigned>("threads", 0));
  const fs::path dir = OutDir(s) / "synthetic";
  fs::create_directories(dir);
  for (std::size_t k = 0; k < replicates.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "syn_%03zu.csv", k + 1);
    WriteCsv(replicates[k], dir / name);
  }
  WriteJson(dir / "schema.json", ToJson(orig.schema()));
  out << "wrote " << replicates.size() << " replicates of " << orig.num_rows()
      << " records to " << dir.string() << "\n";
  return 0;
}

int RunSweep(const Settings& s, std::ostream& out) {
  const Dataset orig = ExperimentData(s);
  const ExperimentConfig cfg = ExperimentSettings(s);
  const auto scenarios = ScenarioList(s, {"all"});
  const auto radii = s.Get<std::vector<double>>("radii", DefaultRadiusGrid());
  const int m = s.Get<int>("m", 20);
  const std::uint64_t seed = s.Get<std::uint64_t>("seed", 1);

  std::vector<SweepResult> sweeps;
  std::vector<std::string> labels;
  json doc = json::array();
  for (const auto& scenario : scenarios) {
    const std::uint64_t stream =
        SplitMix64(seed ^ SplitMix64(static_cast<std::uint64_t>(scenario.id) + 1));
    sweeps.push_back(RunRadiusSweep(orig, scenario, radii, m, stream, cfg));
    labels.push_back(scenario.name);
    json entry = ToJson(sweeps.back());
    entry["scenario"] = scenario.name;
    doc.push_back(std::move(entry));
  }
  const fs::path dir = OutDir(s) / "experiments";
  WriteJson(dir / "sweep.json", doc);
  WriteText(dir / "sweep.csv", SweepCsv(sweeps, labels));
  if (s.Get<bool>("svg", false)) {
    WriteText(dir / "sweep.svg", SweepSvg(sweeps, labels));
  }
  for (std::size_t i = 0; i < sweeps.size(); ++i) {
    out << labels[i] << ": maximizing radius "
        << Fixed(sweeps[i].best_radius * 100, 1) << "%  mean file risk";
    for (double v : sweeps[i].mean_risk) out << " " << Fixed(v, 2);
    out << "\n";
  }
  out << "wrote " << dir.string() << "\n";
  return 0;
}

int RunScenarios(const Settings& s, std::ostream& out) {
  const Dataset orig = ExperimentData(s);
  const ExperimentConfig cfg = ExperimentSettings(s);
  const auto scenarios = ScenarioList(s, {"all"});
  RadiusPolicy policy;
  policy.grid = s.Get<std::vector<double>>("radii", DefaultRadiusGrid());
  policy.fixed = s.Find<double>("radius");
  const int m = s.Get<int>("m", 20);
  const auto outcomes = ScenarioStudy(orig, scenarios, m, policy,
                                      s.Get<std::uint64_t>("seed", 1), cfg);
  const fs::path dir = OutDir(s) / "experiments";
  json doc = json::array();
  for (const auto& o : outcomes) doc.push_back(ToJson(o));
  WriteJson(dir / "scenarios.json", doc);
  WriteText(dir / "scenarios.csv", ScenarioCsv(outcomes));
  if (s.Get<bool>("svg", false)) {
    WriteText(dir / "scenarios.svg", ScenarioSvg(outcomes));
  }
  for (const auto& o : outcomes) {
    out << o.scenario.name << " (r = " << Fixed(o.radius * 100, 1)
        << "%): mean file risk " << Fixed(Mean(o.risk), 3) << "  IQR ["
        << Fixed(o.box.risk.q1, 3) << ", " << Fixed(o.box.risk.q3, 3)
        << "]  mean U_p " << Fixed(Mean(o.utility), 6) << "\n";
  }
  out << "wrote " << dir.string() << "\n";
  return 0;
}

int RunMStudy(const Settings& s, std::ostream& out) {
  const Dataset orig = ExperimentData(s);
  const ExperimentConfig cfg = ExperimentSettings(s);
  const auto scenarios = ScenarioList(s, {"S1"});
  if (scenarios.size() != 1) {
    throw UsageError("--scenarios: mstudy takes exactly one scenario");
  }
  MStudyOptions options;
  options.m_values = s.Get<std::vector<int>>("m_values", options.m_values);
  options.repetitions = s.Get<int>("repetitions", options.repetitions);
  options.radius = s.Get<double>("radius", options.radius);
  options.compute_utility = !s.Get<bool>("no_utility", false);
  const auto arms = MStudy(orig, scenarios.front(), options,
                           s.Get<std::uint64_t>("seed", 1), cfg);
  const fs::path dir = OutDir(s) / "experiments";
  json doc = json::array();
  for (const auto& arm : arms) doc.push_back(ToJson(arm));
  WriteJson(dir / "mstudy.json", doc);
  WriteText(dir / "mstudy.csv", MStudyCsv(arms));
  if (s.Get<bool>("svg", false)) WriteText(dir / "mstudy.svg", MStudySvg(arms));
  for (const auto& arm : arms) {
    const auto& b = arm.box.risk;
    out << "m = " << arm.m << ": risk median " << Fixed(b.median, 3)
        << " IQR [" << Fixed(b.q1, 3) << ", " << Fixed(b.q3, 3) << "] range ["
        << Fixed(b.min, 3) << ", " << Fixed(b.max, 3) << "]  U_p median "
        << Fixed(arm.box.utility.median, 6) << "\n";
  }
  out << "wrote " << dir.string() << "\n";
  return 0;
}

int RunGenerate(const Settings& s, std::ostream& out) {
  const auto n = s.Require<std::size_t>("n");
  const Dataset ds = GenerateCeLike(n, s.Get<std::uint64_t>("seed", 1));
  const fs::path path(s.Get<std::string>("out", "ce.csv"));
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  WriteCsv(ds, path);
  fs::path schema_path = path;
  schema_path.replace_extension(".schema.json");
  WriteJson(schema_path, ToJson(ds.schema()));
  out << "wrote " << n << " records to " << path.string() << " (schema "
      << schema_path.string() << ")\n";
  return 0;
}

struct Command {
  CLI::App* app;
  int (*run)(const Settings&, std::ostream&);
};

}  // namespace

int Run(const std::vector<std::string>& argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{
      "idrisk: identification risk and utility of partially synthetic data"};
  app.name("idrisk");
  app.require_subcommand(0, 1);
  FlagStorage f;
  Settings settings;

  auto* config_opt =
      app.add_option("--config", f.config, "JSON config; flags override it");

  auto add_common = [&](CLI::App* sub) {
    settings.Bind("out", sub->add_option("--out", f.out,
                                         "Output directory (file for generate)"));
    settings.Bind("threads", sub->add_option("--threads", f.threads,
                                             "Worker threads (0 = all cores)"));
  };
  auto add_data = [&](CLI::App* sub) {
    settings.Bind("orig", sub->add_option("--orig", f.orig, "Original CSV"));
    settings.Bind("schema",
                  sub->add_option("--schema", f.schema, "Schema JSON file"));
    settings.Bind("categorical",
                  sub->add_option("--categorical", f.categorical,
                                  "Columns to read as categorical")
                      ->delimiter(','));
  };
  auto add_cart = [&](CLI::App* sub) {
    settings.Bind("min_bucket", sub->add_option("--min-bucket", f.min_bucket,
                                                "CART minimum leaf size"));
    settings.Bind("min_split", sub->add_option("--min-split", f.min_split,
                                               "CART minimum node size to split"));
    settings.Bind("cp", sub->add_option("--cp", f.cp,
                                        "CART relative complexity threshold"));
  };
  auto add_matching = [&](CLI::App* sub) {
    settings.Bind("percentage",
                  sub->add_flag("--percentage,!--no-percentage", f.percentage,
                                "Radii are fractions of the true value"));
    settings.Bind("euclidean",
                  sub->add_flag("--euclidean", f.euclidean,
                                "Ellipse matching for synthesized variables"));
  };
  auto add_experiment = [&](CLI::App* sub) {
    add_data(sub);
    add_cart(sub);
    add_matching(sub);
    settings.Bind("n", sub->add_option("--n", f.n,
                                       "Generate n CE-like records instead of --orig"));
    settings.Bind("seed", sub->add_option("--seed", f.seed, "RNG seed"));
    settings.Bind("m", sub->add_option("--m", f.m, "Synthetic replicates"));
    settings.Bind("known", sub->add_option("--known", f.known,
                                           "Intruder-known variables")
                               ->delimiter(','));
    settings.Bind("known_radius",
                  sub->add_option("--known-radius", f.known_radius,
                                  "Radius for continuous known variables, or "
                                  "'swept' (default 0.1)"));
    settings.Bind("scenarios", sub->add_option("--scenarios,--scenario",
                                               f.scenarios, "S1..S4 or all")
                                   ->delimiter(','));
    settings.Bind("svg", sub->add_flag("--svg", f.svg, "Also write SVG figures"));
  };

  std::map<std::string, Command> commands;

  auto* evaluate = app.add_subcommand("evaluate", "Identification risk of synthetic files");
  add_common(evaluate);
  add_data(evaluate);
  add_matching(evaluate);
  settings.Bind("syn", evaluate->add_option("--syn", f.syn,
                                            "Synthetic CSVs: paths, globs or a directory"));
  settings.Bind("known", evaluate->add_option("--known", f.known, "Known variables")
                             ->delimiter(','));
  settings.Bind("synvars",
                evaluate->add_option("--synvars", f.synvars, "Synthesized variables")
                    ->delimiter(','));
  settings.Bind("r", evaluate->add_option("--r", f.r,
                                          "One radius for every continuous variable"));
  settings.Bind("radius", evaluate->add_option("--radius", f.radius,
                                               "Per-variable radius NAME=VALUE")
                              ->delimiter(','));
  settings.Bind("no_utility", evaluate->add_flag("--no-utility", f.no_utility,
                                                 "Skip the propensity utility"));
  commands["evaluate"] = {evaluate, RunEvaluate};

  auto* synthesize = app.add_subcommand("synthesize", "Sequential CART synthesis");
  add_common(synthesize);
  add_data(synthesize);
  add_cart(synthesize);
  settings.Bind("visit", synthesize->add_option("--visit", f.visit,
                                                "Visit sequence")
                             ->delimiter(','));
  settings.Bind("m", synthesize->add_option("--m", f.m, "Replicates"));
  settings.Bind("seed", synthesize->add_option("--seed", f.seed, "RNG seed"));
  commands["synthesize"] = {synthesize, RunSynthesize};

  auto* sweep = app.add_subcommand("sweep", "Radius sweep per scenario");
  add_common(sweep);
  add_experiment(sweep);
  settings.Bind("radii", sweep->add_option("--radii", f.radii, "Radius grid")
                             ->delimiter(','));
  commands["sweep"] = {sweep, RunSweep};

  auto* scenarios = app.add_subcommand("scenarios", "Scenario utility-risk study");
  add_common(scenarios);
  add_experiment(scenarios);
  settings.Bind("radii", scenarios->add_option("--radii", f.radii,
                                               "Grid for the maximizing radius")
                             ->delimiter(','));
  settings.Bind("radius", scenarios->add_option("--radius", f.radius_fixed,
                                                "Fixed radius instead of the grid"));
  commands["scenarios"] = {scenarios, RunScenarios};

  auto* mstudy = app.add_subcommand("mstudy", "Effect of the number of replicates m");
  add_common(mstudy);
  add_experiment(mstudy);
  settings.Bind("m_values", mstudy->add_option("--m-values", f.m_values,
                                               "Values of m")
                                ->delimiter(','));
  settings.Bind("repetitions", mstudy->add_option("--repetitions", f.repetitions,
                                                  "Repetitions per m"));
  settings.Bind("radius", mstudy->add_option("--radius", f.radius_fixed,
                                             "Matching radius (default 0.1)"));
  settings.Bind("no_utility", mstudy->add_flag("--no-utility", f.no_utility,
                                               "Skip the propensity utility"));
  commands["mstudy"] = {mstudy, RunMStudy};

  auto* generate = app.add_subcommand("generate", "Write a CE-like dataset");
  add_common(generate);
  settings.Bind("n", generate->add_option("--n", f.n, "Records"));
  settings.Bind("seed", generate->add_option("--seed", f.seed, "RNG seed"));
  commands["generate"] = {generate, RunGenerate};

  for (auto& [name, cmd] : commands) {
    cmd.app->add_option("--config", f.config, "JSON config; flags override it");
  }

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1),
                                argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return 2;
  }

  try {
    if (!f.config.empty()) settings.LoadConfig(f.config);
    const Command* command = nullptr;
    for (auto& [name, cmd] : commands) {
      if (cmd.app->parsed()) command = &cmd;
    }
    if (!command) {
      const std::string from_config =
          settings.config().is_object() ? settings.config().value("command", "")
                                        : "";
      if (from_config.empty() || config_opt->count() == 0) {
        throw UsageError("no command given (evaluate, synthesize, sweep, "
                         "scenarios, mstudy, generate)");
      }
      if (!commands.count(from_config)) {
        throw UsageError("config field 'command': unknown command '" +
                         from_config + "'");
      }
      return Run({argv.empty() ? "idrisk" : argv.front(), from_config,
                  "--config", f.config},
                 out, err);
    }
    return command->run(settings, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return 2;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace idrisk::cli
