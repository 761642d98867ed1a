#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "c2mab/environments.hpp"
#include "c2mab/graphs.hpp"
#include "c2mab/model.hpp"

namespace c2mab {

/// Raised for malformed input files and configs; the CLI maps it to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Serializes any bundled environment, ground truth included. For linear
/// environments the derived means are written as well and checked on load.
nlohmann::json env_to_json(const Environment& env);
std::unique_ptr<Environment> env_from_json(const nlohmann::json& j);

std::unique_ptr<Environment> load_env_file(const std::filesystem::path& path);
void save_env_file(const Environment& env, const std::filesystem::path& path);

/// Small fixed instances for the check/contract subcommands: "disjunctive",
/// "conjunctive", "pmc", "oim", "rating-matrix".
std::vector<std::string> builtin_env_names();
std::unique_ptr<Environment> make_builtin_env(const std::string& name);

/// `--env` argument: a builtin name or a JSON file path.
std::unique_ptr<Environment> resolve_env(const std::string& spec);

/// Bipartite graph file: header line `L=<n> V=<n>`, then one `src dst` edge
/// per line with src in [0, L) and dst in [0, V). '#' starts a comment.
BipartiteGraph read_bipartite_graph(const std::filesystem::path& path);
/// Directed graph file: one `src dst` edge per line; nodes are [0, max id].
DirectedGraph read_directed_graph(const std::filesystem::path& path);

/// Feature CSV with header `item_id,f1,...,fd` and one row per item id in
/// [0, m). Rows with norm above 1 are scaled to unit norm and reported on
/// `warn`.
FeatureContext read_features(const std::filesystem::path& path, std::ostream& warn);

/// Rating CSV of `item_id,user_id` pairs (presence = positive rating), with
/// an optional header. Returns ratings[item][user] for `num_items` items;
/// the user count is the largest user id + 1 unless `num_users` > 0.
std::vector<std::vector<unsigned char>> read_ratings(const std::filesystem::path& path, int num_items,
                                                     int num_users = 0);

}  // namespace c2mab
