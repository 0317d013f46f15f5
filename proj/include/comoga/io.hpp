#pragma once

// JSON and CSV serialization for models, archives and reports.

#include "comoga/metrics.hpp"
#include "comoga/tabular_cmomdp.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace comoga::io {

using Json = nlohmann::json;

/// Malformed or unreadable input; the message names the offending key or path.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json read_json_file(const std::filesystem::path& path);
/// Writes `value.dump(2)` plus a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& value);

/// {n_states, n_actions, gamma, rho, thresholds, P[s][a][s'], R[i][s][a][s'], C[k][s][a][s']}.
/// An optional "reward_bound" entry sets the declared |R|, |C| bound.
tabular::TabularCMOMDP cmomdp_from_json(const Json& j);
Json cmomdp_to_json(const tabular::TabularCMOMDP& mdp);
tabular::TabularCMOMDP load_cmomdp(const std::filesystem::path& path);

/// {points: [{objectives, feasible, preference}], reference}. Missing
/// "feasible" means true; "preference" and "reference" may be absent or null.
metrics::ParetoArchive archive_from_json(const Json& j);
Json archive_to_json(const metrics::ParetoArchive& archive);
metrics::ParetoArchive load_archive(const std::filesystem::path& path);

/// {hypervolume, normalized_sparsity (null when absent), n_points, reference}.
Json metric_report(const metrics::ParetoArchive& archive, const Vector& reference);

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, const std::string& key);
Json matrix_to_json(const Matrix& m);

/// 17 significant digits with a '.' separator; reads back to the same double.
std::string format_double(double value);

}  // namespace comoga::io
