#include "commands.hpp"

#include "comoga/aggregator.hpp"
#include "comoga/metrics.hpp"
#include "comoga/random.hpp"
#include "comoga/tabular_cmomdp.hpp"
#include "comoga/toy_bench.hpp"
#include "comoga/verification.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>

namespace comoga::cli {

using io::InputError;
using io::Json;

namespace {

// ---------------------------------------------------------------------------
// Defaults

Json toy_defaults() {
  return Json{
      {"methods", {"comoga"}},
      {"starts", {{-10.0, 0.0}, {-10.0, 7.5}, {0.0, 7.5}, {10.0, 10.0}}},
      {"preference", {0.5, 0.5}},
      {"epsilon", 0.05},
      {"epsilon_final", 0.001},
      {"steps", 20000},
      {"feasibility_tolerance", 1e-9},
      {"lr", 0.01},
      {"multiplier_lr", 0.1},
      {"oracle_resolution", 1001},
      {"reach_distance", 0.5},
      {"reach_constraint", 1e-3},
      {"front_preferences", 20},
      {"seed", 1},
  };
}

Json tabular_defaults() {
  return Json{
      {"model", nullptr},
      {"random_n_states", 3},
      {"random_n_actions", 2},
      {"preferences", 10},
      {"grid_convention", "one_norm"},
      {"epsilon_0", 0.5},
      {"power", 0.6},
      {"g_min", 1e-2},
      {"g_max", 10.0},
      {"lambda_max", 1e6},
      {"max_steps", 200000},
      {"stop_tolerance", 1e-8},
      {"stop_patience", 100},
      {"record_every", 1000},
      {"mixture_levels", 11},
      {"oracle_cap", tabular::kOracleEnumerationCap},
      {"distance_tolerance", 2e-2},
      {"slack_tolerance", 1e-3},
      {"seed", 1},
  };
}

Json metrics_defaults() {
  return Json{
      {"archives", Json::array()},
      {"reference", nullptr},
      {"seed", 1},
  };
}

Json selftest_defaults() {
  return Json{
      {"qp_instances", 1000},
      {"transformation_instances", 1000},
      {"toy_gradient_points", 500},
      {"tabular_gradient_points", 500},
      {"hv_archives", 50},
      {"hv_samples", 1000000},
      {"seed", 1},
  };
}

// ---------------------------------------------------------------------------
// Typed access with key-naming diagnostics

[[noreturn]] void bad_key(const std::string& key, const std::string& message) {
  throw InputError("config key '" + key + "': " + message);
}

class ConfigView {
 public:
  explicit ConfigView(const Json& j) : j_(j) {}

  const Json& raw(const std::string& key) const { return j_.at(key); }

  double number(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_number()) bad_key(key, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) bad_key(key, "must be finite");
    return x;
  }

  double positive(const std::string& key) const {
    const double x = number(key);
    if (!(x > 0.0)) bad_key(key, "must be positive");
    return x;
  }

  double nonnegative(const std::string& key) const {
    const double x = number(key);
    if (!(x >= 0.0)) bad_key(key, "must be nonnegative");
    return x;
  }

  std::optional<double> optional_positive(const std::string& key) const {
    if (raw(key).is_null()) return std::nullopt;
    return positive(key);
  }

  std::uint64_t integer(const std::string& key, std::uint64_t min) const {
    const Json& v = raw(key);
    // Accept integral floating values such as 1e6 from the command line.
    if (v.is_number_float()) {
      const double x = v.get<double>();
      if (!(x >= static_cast<double>(min)) || x != std::floor(x) || x > 9.0e15) {
        bad_key(key, "must be an integer >= " + std::to_string(min));
      }
      return static_cast<std::uint64_t>(x);
    }
    if (!v.is_number_integer()) bad_key(key, "must be an integer >= " + std::to_string(min));
    if (v.is_number_unsigned()) {
      const auto x = v.get<std::uint64_t>();
      if (x < min) bad_key(key, "must be an integer >= " + std::to_string(min));
      return x;
    }
    const auto x = v.get<std::int64_t>();
    if (x < 0 || static_cast<std::uint64_t>(x) < min) bad_key(key, "must be an integer >= " + std::to_string(min));
    return static_cast<std::uint64_t>(x);
  }

  std::size_t count(const std::string& key, std::size_t min = 1) const {
    return static_cast<std::size_t>(integer(key, min));
  }

  std::string choice(const std::string& key, const std::set<std::string>& allowed) const {
    const Json& v = raw(key);
    if (!v.is_string() || !allowed.count(v.get<std::string>())) bad_key(key, "must be one of " + join(allowed));
    return v.get<std::string>();
  }

  /// Array of strings, or one comma-separated string.
  std::vector<std::string> strings(const std::string& key) const {
    const Json& v = raw(key);
    std::vector<std::string> out;
    if (v.is_string()) {
      std::string item;
      for (char c : v.get<std::string>() + ",") {
        if (c == ',') {
          if (!item.empty()) out.push_back(item);
          item.clear();
        } else if (c != ' ') {
          item += c;
        }
      }
      return out;
    }
    if (!v.is_array()) bad_key(key, "must be a list of strings");
    for (const auto& e : v) {
      if (!e.is_string()) bad_key(key, "must be a list of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  Vector vector(const std::string& key) const {
    try {
      return io::vector_from_json(raw(key), key);
    } catch (const InputError&) {
      bad_key(key, "must be a list of numbers");
    }
  }

 private:
  static std::string join(const std::set<std::string>& items) {
    std::string s;
    for (const auto& i : items) s += (s.empty() ? "" : ", ") + i;
    return s;
  }

  const Json& j_;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

Json point_json(const toy::ToyPoint& p) { return Json::array({p.x1, p.x2}); }

// Reports are written once per command and contain only deterministic values
// unless timing was requested.
void finish_report(Json& report, const Invocation& inv, const Json& config,
                   std::chrono::steady_clock::time_point start) {
  report["config"] = config;
  report["rng"] = Rng::kName;
  if (inv.timing) {
    report["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
}

// ---------------------------------------------------------------------------
// toy

struct ToyConfig {
  std::vector<toy::ToyMethod> methods;
  std::vector<std::string> method_names;
  std::vector<toy::ToyPoint> starts;
  Preference preference = Preference(Vector::Ones(2));
  AggregatorConfig aggregator;
  std::optional<double> epsilon_final;
  std::size_t steps = 0;
  double lr = 0.0;
  double multiplier_lr = 0.0;
  std::size_t oracle_resolution = 0;
  double reach_distance = 0.0;
  double reach_constraint = 0.0;
  std::size_t front_preferences = 0;
};

Preference preference_from(const ConfigView& view, const std::string& key, Eigen::Index size) {
  const Vector w = view.vector(key);
  if (w.size() != size) bad_key(key, "must have " + std::to_string(size) + " entries");
  try {
    return Preference::normalized(w);
  } catch (const std::invalid_argument& e) {
    bad_key(key, e.what());
  }
}

ToyConfig parse_toy(const Json& config) {
  const ConfigView view(config);
  ToyConfig c;
  for (const auto& name : view.strings("methods")) {
    if (name == "comoga") {
      c.methods.push_back(toy::ToyMethod::kComoga);
    } else if (name == "ls") {
      c.methods.push_back(toy::ToyMethod::kLinearScalarization);
    } else if (name == "lagrangian") {
      c.methods.push_back(toy::ToyMethod::kLagrangian);
    } else {
      bad_key("methods", "unknown method '" + name + "' (expected comoga, ls or lagrangian)");
    }
    c.method_names.push_back(name);
  }
  if (c.methods.empty()) bad_key("methods", "must name at least one method");

  const Json& starts = view.raw("starts");
  if (!starts.is_array() || starts.empty()) bad_key("starts", "must be a non-empty list of [x1, x2] pairs");
  for (const auto& s : starts) {
    if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number()) {
      bad_key("starts", "must be a non-empty list of [x1, x2] pairs");
    }
    const toy::ToyPoint p{s[0].get<double>(), s[1].get<double>()};
    if (!std::isfinite(p.x1) || !std::isfinite(p.x2)) bad_key("starts", "coordinates must be finite");
    c.starts.push_back(p);
  }
  c.preference = preference_from(view, "preference", 2);
  c.aggregator.epsilon = view.positive("epsilon");
  c.aggregator.feasibility_tolerance = view.nonnegative("feasibility_tolerance");
  c.epsilon_final = view.optional_positive("epsilon_final");
  c.steps = view.count("steps");
  c.lr = view.positive("lr");
  c.multiplier_lr = view.positive("multiplier_lr");
  c.oracle_resolution = view.count("oracle_resolution", 100);
  c.reach_distance = view.positive("reach_distance");
  c.reach_constraint = view.nonnegative("reach_constraint");
  c.front_preferences = view.count("front_preferences", 0);
  if (c.front_preferences == 1) bad_key("front_preferences", "must be 0 (off) or at least 2");
  view.integer("seed", 0);
  return c;
}

toy::Trajectory run_toy_method(const ToyConfig& c, toy::ToyMethod method, const toy::ToyPoint& start,
                               const Preference& preference) {
  switch (method) {
    case toy::ToyMethod::kComoga:
      return toy::run_comoga_toy(start, preference, c.aggregator, c.steps, c.epsilon_final);
    case toy::ToyMethod::kLinearScalarization:
      return toy::run_ls_toy(start, preference, c.lr, std::nullopt, c.steps);
    case toy::ToyMethod::kLagrangian: {
      toy::LagrangianState state;
      state.multiplier_lr = c.multiplier_lr;
      return toy::run_ls_toy(start, preference, c.lr, state, c.steps);
    }
  }
  throw std::logic_error("unhandled toy method");
}

int cmd_toy(const Invocation& inv, const Json& config, std::ostream& out) {
  const auto start_time = std::chrono::steady_clock::now();
  const ToyConfig c = parse_toy(config);
  std::filesystem::create_directories(inv.out_dir);

  const auto cp_set = toy::cp_front_oracle_toy(c.oracle_resolution);
  Json runs = Json::array();
  std::size_t reached = 0;
  for (std::size_t m = 0; m < c.methods.size(); ++m) {
    for (std::size_t i = 0; i < c.starts.size(); ++i) {
      const toy::Trajectory tr = run_toy_method(c, c.methods[m], c.starts[i], c.preference);
      const std::string csv = "toy_" + c.method_names[m] + "_" + std::to_string(i) + ".csv";
      {
        std::ofstream f(inv.out_dir / csv, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write '" + (inv.out_dir / csv).string() + "'");
        toy::write_trajectory_csv(f, tr);
      }
      const toy::ToyValues& v = tr.values.back();
      const double distance = toy::distance_to_cp_set(tr.final_point(), cp_set);
      const bool feasible = v.c <= c.reach_constraint;
      const bool hit = feasible && distance <= c.reach_distance;
      reached += hit;
      Json run{
          {"method", c.method_names[m]},
          {"start", point_json(c.starts[i])},
          {"preference", io::vector_to_json(c.preference.weights())},
          {"steps", tr.points.size() - 1},
          {"final_point", point_json(tr.final_point())},
          {"final_values", {{"L1", v.l1}, {"L2", v.l2}, {"C", v.c}}},
          {"distance_to_cp_set", distance},
          {"constraint_satisfied", feasible},
          {"reached_cp_set", hit},
          {"conflict_violations", tr.conflict_violations},
          {"trajectory_csv", csv},
      };
      if (tr.final_multiplier) run["final_multiplier"] = *tr.final_multiplier;
      runs.push_back(std::move(run));
      out << c.method_names[m] << " start (" << fmt(c.starts[i].x1) << ", " << fmt(c.starts[i].x2) << ") -> ("
          << fmt(tr.final_point().x1) << ", " << fmt(tr.final_point().x2) << ")  C=" << fmt(v.c)
          << "  distance=" << fmt(distance) << "  " << (hit ? "reached CP set" : "not reached") << '\n';
    }
  }

  Json report{
      {"cp_set", {{"grid_resolution", c.oracle_resolution}, {"points", cp_set.size()}}},
      {"runs", runs},
      {"summary", {{"runs", runs.size()}, {"reached_cp_set", reached}}},
  };

  if (c.front_preferences > 0) {
    // Objectives are negated so the archive is in maximization form.
    std::vector<metrics::Evaluation> evals;
    for (const auto& w : preference_grid(2, c.front_preferences)) {
      const toy::Trajectory tr = toy::run_comoga_toy(c.starts.front(), w, c.aggregator, c.steps, c.epsilon_final);
      const toy::ToyValues& v = tr.values.back();
      evals.push_back({w, Eigen::Vector2d(-v.l1, -v.l2), Vector::Constant(1, v.c)});
    }
    const metrics::ParetoArchive front = metrics::build_front(evals, Vector::Constant(1, c.reach_constraint));
    Json block{{"start", point_json(c.starts.front())},
               {"preferences", c.front_preferences},
               {"feasibility_threshold", c.reach_constraint},
               {"archive", io::archive_to_json(front)}};
    if (!front.empty()) {
      const Vector reference = metrics::reference_point({front});
      block["metrics"] = io::metric_report(front, reference);
    }
    report["front"] = std::move(block);
    out << "front sweep: " << front.size() << " non-dominated points from " << c.front_preferences << " preferences\n";
  }

  finish_report(report, inv, config, start_time);
  io::write_json_file(inv.out_dir / "toy_report.json", report);
  out << reached << " of " << runs.size() << " runs reached the CP set\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// tabular

Json history_json(const std::vector<tabular::HistoryEntry>& history) {
  Json out = Json::array();
  for (const auto& h : history) {
    out.push_back({{"step", h.step},
                   {"objective_returns", io::vector_to_json(h.objective_returns)},
                   {"constraint_returns", io::vector_to_json(h.constraint_returns)},
                   {"step_norm", h.step_norm}});
  }
  return out;
}

int cmd_tabular(const Invocation& inv, const Json& config, std::ostream& out) {
  const auto start_time = std::chrono::steady_clock::now();
  const ConfigView view(config);

  AggregatorConfig agg;
  agg.variant = AggregatorVariant::kModified;
  agg.g_min = view.positive("g_min");
  agg.g_max = view.positive("g_max");
  if (agg.g_max < agg.g_min) bad_key("g_max", "must be at least g_min");
  agg.lambda_max = view.positive("lambda_max");
  tabular::TrainingOptions options;
  options.epsilon_0 = view.positive("epsilon_0");
  options.power = view.number("power");
  if (!(options.power > 0.5 && options.power <= 1.0)) bad_key("power", "must lie in (0.5, 1]");
  options.max_steps = view.count("max_steps");
  options.stop_tolerance = view.nonnegative("stop_tolerance");
  options.stop_patience = view.count("stop_patience");
  options.record_every = view.count("record_every");
  const std::size_t n_preferences = view.count("preferences");
  const GridConvention convention = view.choice("grid_convention", {"one_norm", "max_norm_face"}) == "one_norm"
                                        ? GridConvention::kOneNormSimplex
                                        : GridConvention::kMaxNormFace;
  const std::size_t mixture_levels = view.count("mixture_levels", 0);
  const std::uint64_t oracle_cap = view.integer("oracle_cap", 1);
  const double distance_tol = view.positive("distance_tolerance");
  const double slack_tol = view.nonnegative("slack_tolerance");
  const std::uint64_t seed = view.integer("seed", 0);

  tabular::TabularCMOMDP mdp;
  Json model_info;
  if (view.raw("model").is_null()) {
    tabular::RandomModelSpec spec;
    spec.n_states = static_cast<Eigen::Index>(view.count("random_n_states"));
    spec.n_actions = static_cast<Eigen::Index>(view.count("random_n_actions"));
    mdp = tabular::random_cmomdp(spec, seed).mdp;
    model_info["source"] = "random";
  } else {
    if (!view.raw("model").is_string()) bad_key("model", "must be a file path or null");
    const std::string path = view.raw("model").get<std::string>();
    try {
      mdp = io::load_cmomdp(path);
    } catch (const InputError& e) {
      bad_key("model", e.what());
    }
    model_info["source"] = path;
  }
  model_info["n_states"] = mdp.n_states;
  model_info["n_actions"] = mdp.n_actions;
  model_info["n_objectives"] = mdp.n_objectives();
  model_info["n_constraints"] = mdp.n_constraints();
  model_info["gamma"] = mdp.gamma;
  model_info["thresholds"] = io::vector_to_json(mdp.thresholds);

  const tabular::OracleFront oracle = tabular::cp_front_oracle(mdp, mixture_levels, oracle_cap);
  std::filesystem::create_directories(inv.out_dir);

  const auto grid = preference_grid(mdp.n_objectives(), n_preferences, convention);
  Json runs = Json::array();
  std::vector<metrics::Evaluation> evals;
  std::size_t ok_count = 0;
  std::size_t conflicts = 0;
  for (const auto& w : grid) {
    const tabular::TrainingResult r = tabular::train_comoga_tabular(mdp, w, agg, options);
    const std::optional<double> distance =
        oracle.points.empty() ? std::nullopt : std::optional<double>(tabular::front_distance(oracle, r.objective_returns));
    const std::optional<double> slack =
        mdp.n_constraints() > 0 ? std::optional<double>((mdp.thresholds - r.constraint_returns).minCoeff()) : std::nullopt;
    const bool ok = distance && *distance <= distance_tol && (!slack || *slack >= -slack_tol);
    ok_count += ok;
    conflicts += r.conflict_violations;
    evals.push_back({w, r.objective_returns, r.constraint_returns});
    runs.push_back({
        {"preference", io::vector_to_json(w.weights())},
        {"objective_returns", io::vector_to_json(r.objective_returns)},
        {"constraint_returns", io::vector_to_json(r.constraint_returns)},
        {"constraint_slack", slack ? Json(*slack) : Json(nullptr)},
        {"distance_to_oracle_front", distance ? Json(*distance) : Json(nullptr)},
        {"within_tolerance", ok},
        {"steps", r.steps},
        {"converged", r.converged},
        {"modes", {{"normal", r.normal_steps}, {"recovery", r.recovery_steps}, {"zero", r.zero_steps}}},
        {"conflict_violations", r.conflict_violations},
        {"nu_weight_oscillation", r.nu_weight_oscillation ? Json(*r.nu_weight_oscillation) : Json(nullptr)},
        {"history", history_json(r.history)},
    });
    out << "preference (" << fmt(w[0]);
    for (Eigen::Index i = 1; i < w.size(); ++i) out << ", " << fmt(w[i]);
    out << ")  distance=" << (distance ? fmt(*distance) : "n/a") << "  slack=" << (slack ? fmt(*slack) : "n/a")
        << "  steps=" << r.steps << (ok ? "  ok" : "  FAILED") << '\n';
  }

  const metrics::ParetoArchive front = metrics::build_front(evals, mdp.thresholds);
  std::vector<metrics::FrontPoint> oracle_points;
  for (const auto& p : oracle.points) oracle_points.push_back({p, true, std::nullopt});
  const metrics::ParetoArchive oracle_archive = metrics::pareto_filter(oracle_points);

  Json oracle_json{{"exact", oracle.exact},
                   {"mixture_levels", mixture_levels},
                   {"vertices", Json::array()},
                   {"n_points", oracle.points.size()}};
  for (const auto& v : oracle.vertices) oracle_json["vertices"].push_back(io::vector_to_json(v));

  Json report{
      {"model", model_info},
      {"oracle", oracle_json},
      {"runs", runs},
      {"front", io::archive_to_json(front)},
      {"summary", {{"runs", runs.size()}, {"within_tolerance", ok_count}, {"conflict_violations", conflicts}}},
  };
  if (!front.empty() && mdp.n_objectives() <= 3) {
    std::vector<metrics::ParetoArchive> both{front};
    if (!oracle_archive.empty()) both.push_back(oracle_archive);
    const Vector reference = metrics::reference_point(both);
    report["metrics"] = {{"reference", io::vector_to_json(reference)},
                         {"comoga", io::metric_report(front, reference)}};
    if (!oracle_archive.empty()) report["metrics"]["oracle"] = io::metric_report(oracle_archive, reference);
  }
  finish_report(report, inv, config, start_time);
  io::write_json_file(inv.out_dir / "tabular_report.json", report);
  out << ok_count << " of " << runs.size() << " preferences within tolerance\n";
  return ok_count == runs.size() ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// metrics

int cmd_metrics(const Invocation& inv, const Json& config, std::ostream& out) {
  const auto start_time = std::chrono::steady_clock::now();
  const ConfigView view(config);
  view.integer("seed", 0);
  const std::vector<std::string> files = view.strings("archives");
  if (files.empty()) bad_key("archives", "at least one archive file is required");

  std::vector<metrics::ParetoArchive> archives;
  Eigen::Index dim = 0;
  for (const auto& f : files) {
    archives.push_back(io::load_archive(f));
    const Eigen::Index n = archives.back().n_objectives();
    if (n > 0 && dim > 0 && n != dim) throw InputError(f + ": objective count differs from the other archives");
    if (n > 0) dim = n;
  }

  Vector reference;
  std::string source;
  if (!view.raw("reference").is_null()) {
    reference = view.vector("reference");
    if (dim > 0 && reference.size() != dim) bad_key("reference", "must have " + std::to_string(dim) + " entries");
    source = "given";
  } else {
    bool any = false;
    for (const auto& a : archives) any = any || !a.empty();
    if (!any) bad_key("reference", "required when every archive is empty");
    reference = metrics::reference_point(archives);
    source = "joint_front";
  }
  if (reference.size() > 3) bad_key("reference", "exact hypervolume supports at most 3 objectives");

  Json results = Json::array();
  for (std::size_t i = 0; i < archives.size(); ++i) {
    Json entry = io::metric_report(archives[i], reference);
    entry["file"] = files[i];
    results.push_back(entry);
    const auto sp = metrics::normalized_sparsity(archives[i]);
    out << files[i] << "  points=" << archives[i].size()
        << "  hypervolume=" << fmt(metrics::hypervolume(archives[i], reference))
        << "  normalized_sparsity=" << (sp ? fmt(*sp) : "absent") << '\n';
  }
  Json report{{"reference", io::vector_to_json(reference)}, {"reference_source", source}, {"archives", results}};
  finish_report(report, inv, config, start_time);
  std::filesystem::create_directories(inv.out_dir);
  io::write_json_file(inv.out_dir / "metrics_report.json", report);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// selftest

int cmd_selftest(const Invocation& inv, const Json& config, std::ostream& out) {
  const auto start_time = std::chrono::steady_clock::now();
  const ConfigView view(config);
  const std::size_t qp = view.count("qp_instances");
  const std::size_t transform = view.count("transformation_instances");
  const std::size_t toy_points = view.count("toy_gradient_points");
  const std::size_t tab_points = view.count("tabular_gradient_points");
  const std::size_t hv_archives = view.count("hv_archives");
  const std::size_t hv_samples = view.count("hv_samples", 10000);
  const std::uint64_t seed = view.integer("seed", 0);

  const std::vector<verification::SuiteResult> suites{
      verification::qp_oracle_suite(qp, seed),
      verification::transformation_suite(transform, seed),
      verification::toy_gradient_suite(toy_points, seed),
      verification::tabular_gradient_suite(tab_points, seed),
      verification::hypervolume_mc_suite(hv_archives, hv_samples, seed),
  };

  bool all = true;
  Json rows = Json::array();
  char line[256];
  std::snprintf(line, sizeof(line), "%-28s %9s %9s %12s %12s  %s\n", "suite", "instances", "failures", "worst", "bound",
                "result");
  out << line;
  for (const auto& s : suites) {
    all = all && s.passed();
    Json row{{"suite", s.name},
             {"instances", s.instances},
             {"failures", s.failures},
             {"worst", s.worst},
             {"bound", s.tolerance},
             {"passed", s.passed()}};
    if (inv.timing) row["seconds"] = s.seconds;
    rows.push_back(std::move(row));
    std::snprintf(line, sizeof(line), "%-28s %9zu %9zu %12.4g %12.4g  %s", s.name.c_str(), s.instances, s.failures,
                  s.worst, s.tolerance, s.passed() ? "PASS" : "FAIL");
    out << line;
    if (inv.timing) out << "  " << fmt(s.seconds) << " s";
    out << '\n';
  }
  Json report{{"suites", rows}, {"passed", all}};
  finish_report(report, inv, config, start_time);
  std::filesystem::create_directories(inv.out_dir);
  io::write_json_file(inv.out_dir / "selftest_report.json", report);
  return all ? kExitOk : kExitFailure;
}

}  // namespace

std::vector<std::string> command_names() { return {"toy", "tabular", "metrics", "selftest"}; }

std::string command_description(const std::string& command) {
  if (command == "toy") return "Run the two-objective toy benchmark from its start points";
  if (command == "tabular") return "Train modified aggregation on a tabular model and compare with the exact front";
  if (command == "metrics") return "Hypervolume and normalized sparsity of Pareto archive files";
  if (command == "selftest") return "Randomized oracle suites for the solver, gradients and metrics";
  throw std::invalid_argument("unknown command '" + command + "'");
}

const Json& command_defaults(const std::string& command) {
  static const Json toy = toy_defaults();
  static const Json tab = tabular_defaults();
  static const Json met = metrics_defaults();
  static const Json self = selftest_defaults();
  if (command == "toy") return toy;
  if (command == "tabular") return tab;
  if (command == "metrics") return met;
  if (command == "selftest") return self;
  throw std::invalid_argument("unknown command '" + command + "'");
}

Json resolve_config(const Invocation& inv) {
  Json config = command_defaults(inv.command);
  if (inv.config_path) {
    const Json file = io::read_json_file(*inv.config_path);
    if (!file.is_object()) throw InputError("config file must hold a JSON object");
    for (const auto& [key, value] : file.items()) {
      if (!config.contains(key)) throw InputError("unknown config key '" + key + "' for '" + inv.command + "'");
      config[key] = value;
    }
  }
  for (const auto& [key, text] : inv.overrides) {
    if (!config.contains(key)) throw InputError("unknown config key '" + key + "' for '" + inv.command + "'");
    Json value = Json::parse(text, nullptr, false);
    config[key] = value.is_discarded() ? Json(text) : value;
  }
  if (inv.seed) config["seed"] = *inv.seed;
  return config;
}

int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    const Json config = resolve_config(inv);
    if (inv.command == "toy") return cmd_toy(inv, config, out);
    if (inv.command == "tabular") return cmd_tabular(inv, config, out);
    if (inv.command == "metrics") return cmd_metrics(inv, config, out);
    if (inv.command == "selftest") return cmd_selftest(inv, config, out);
    err << "error: unknown command '" << inv.command << "'\n";
    return kExitValidation;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ResourceCapError& e) {
    err << "error: resource cap exceeded: " << e.what() << '\n';
    return kExitResourceCap;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace comoga::cli
