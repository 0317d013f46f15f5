#include "comoga/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace comoga::io {

namespace {

const Json& require(const Json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key)) throw InputError("missing key '" + key + "'");
  return j.at(key);
}

double number(const Json& j, const std::string& key) {
  if (!j.is_number()) throw InputError("'" + key + "' must be a number");
  return j.get<double>();
}

Eigen::Index positive_int(const Json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<long long>() < 1) throw InputError("'" + key + "' must be a positive integer");
  return static_cast<Eigen::Index>(j.get<long long>());
}

// Reads a [S][A][S'] array into the (S * A) x S' layout.
Matrix read_sas(const Json& j, Eigen::Index S, Eigen::Index A, const std::string& key) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != S) {
    throw InputError("'" + key + "' must have " + std::to_string(S) + " state entries");
  }
  Matrix out(S * A, S);
  for (Eigen::Index s = 0; s < S; ++s) {
    const Json& row = j[static_cast<std::size_t>(s)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != A) {
      throw InputError("'" + key + "[" + std::to_string(s) + "]' must have " + std::to_string(A) + " action entries");
    }
    for (Eigen::Index a = 0; a < A; ++a) {
      const std::string at = key + "[" + std::to_string(s) + "][" + std::to_string(a) + "]";
      const Vector next = vector_from_json(row[static_cast<std::size_t>(a)], at);
      if (next.size() != S) throw InputError("'" + at + "' must have " + std::to_string(S) + " entries");
      out.row(s * A + a) = next.transpose();
    }
  }
  return out;
}

Json write_sas(const Matrix& m, Eigen::Index S, Eigen::Index A) {
  Json out = Json::array();
  for (Eigen::Index s = 0; s < S; ++s) {
    Json row = Json::array();
    for (Eigen::Index a = 0; a < A; ++a) row.push_back(vector_to_json(m.row(s * A + a).transpose()));
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<Matrix> read_sas_list(const Json& j, Eigen::Index S, Eigen::Index A, const std::string& key) {
  if (!j.is_array()) throw InputError("'" + key + "' must be an array");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_sas(j[i], S, A, key + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& value) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << value.dump(2) << '\n';
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const Json& j, const std::string& key) {
  if (!j.is_array()) throw InputError("'" + key + "' must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], key);
  return v;
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
  return out;
}

tabular::TabularCMOMDP cmomdp_from_json(const Json& j) {
  tabular::TabularCMOMDP mdp;
  mdp.n_states = positive_int(require(j, "n_states"), "n_states");
  mdp.n_actions = positive_int(require(j, "n_actions"), "n_actions");
  mdp.gamma = number(require(j, "gamma"), "gamma");
  mdp.rho = vector_from_json(require(j, "rho"), "rho");
  mdp.thresholds = vector_from_json(require(j, "thresholds"), "thresholds");
  mdp.transition = read_sas(require(j, "P"), mdp.n_states, mdp.n_actions, "P");
  mdp.rewards = read_sas_list(require(j, "R"), mdp.n_states, mdp.n_actions, "R");
  mdp.costs = read_sas_list(require(j, "C"), mdp.n_states, mdp.n_actions, "C");
  if (j.contains("reward_bound")) mdp.reward_bound = number(j.at("reward_bound"), "reward_bound");
  try {
    mdp.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return mdp;
}

Json cmomdp_to_json(const tabular::TabularCMOMDP& mdp) {
  Json j;
  j["n_states"] = mdp.n_states;
  j["n_actions"] = mdp.n_actions;
  j["gamma"] = mdp.gamma;
  j["rho"] = vector_to_json(mdp.rho);
  j["thresholds"] = vector_to_json(mdp.thresholds);
  j["P"] = write_sas(mdp.transition, mdp.n_states, mdp.n_actions);
  j["R"] = Json::array();
  for (const auto& r : mdp.rewards) j["R"].push_back(write_sas(r, mdp.n_states, mdp.n_actions));
  j["C"] = Json::array();
  for (const auto& c : mdp.costs) j["C"].push_back(write_sas(c, mdp.n_states, mdp.n_actions));
  if (std::isfinite(mdp.reward_bound)) j["reward_bound"] = mdp.reward_bound;
  return j;
}

tabular::TabularCMOMDP load_cmomdp(const std::filesystem::path& path) { return cmomdp_from_json(read_json_file(path)); }

metrics::ParetoArchive archive_from_json(const Json& j) {
  const Json& pts = require(j, "points");
  if (!pts.is_array()) throw InputError("'points' must be an array");
  std::vector<metrics::FrontPoint> points;
  Eigen::Index dim = -1;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::string at = "points[" + std::to_string(i) + "]";
    metrics::FrontPoint p;
    p.objectives = vector_from_json(require(pts[i], "objectives"), at + ".objectives");
    if (p.objectives.size() == 0 || !p.objectives.allFinite()) {
      throw InputError("'" + at + ".objectives' must be a non-empty list of finite numbers");
    }
    if (dim >= 0 && p.objectives.size() != dim) throw InputError("'" + at + ".objectives' has the wrong length");
    dim = p.objectives.size();
    if (pts[i].contains("feasible")) {
      if (!pts[i]["feasible"].is_boolean()) throw InputError("'" + at + ".feasible' must be a boolean");
      p.feasible = pts[i]["feasible"].get<bool>();
    }
    if (pts[i].contains("preference") && !pts[i]["preference"].is_null()) {
      try {
        p.preference = Preference(vector_from_json(pts[i]["preference"], at + ".preference"));
      } catch (const std::invalid_argument& e) {
        throw InputError("'" + at + ".preference': " + e.what());
      }
    }
    points.push_back(std::move(p));
  }
  metrics::ParetoArchive archive = metrics::pareto_filter(points);
  if (j.contains("reference") && !j["reference"].is_null()) {
    archive.reference = vector_from_json(j["reference"], "reference");
    if (dim >= 0 && archive.reference->size() != dim) throw InputError("'reference' has the wrong length");
  }
  return archive;
}

Json archive_to_json(const metrics::ParetoArchive& archive) {
  Json j;
  j["points"] = Json::array();
  for (const auto& p : archive.points) {
    Json e;
    e["objectives"] = vector_to_json(p.objectives);
    e["feasible"] = p.feasible;
    e["preference"] = p.preference ? vector_to_json(p.preference->weights()) : Json(nullptr);
    j["points"].push_back(std::move(e));
  }
  j["reference"] = archive.reference ? vector_to_json(*archive.reference) : Json(nullptr);
  return j;
}

metrics::ParetoArchive load_archive(const std::filesystem::path& path) {
  try {
    return archive_from_json(read_json_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

Json metric_report(const metrics::ParetoArchive& archive, const Vector& reference) {
  Json j;
  j["hypervolume"] = metrics::hypervolume(archive, reference);
  const auto sp = metrics::normalized_sparsity(archive);
  j["normalized_sparsity"] = sp ? Json(*sp) : Json(nullptr);
  j["n_points"] = archive.size();
  j["reference"] = vector_to_json(reference);
  return j;
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace comoga::io
