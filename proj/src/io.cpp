#include "c2mab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace c2mab {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw InputError(std::string(what) + " must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InputError(std::string(what) + " rows must all have the same length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json linear_part(const LinearEnvironment& env) {
  Eigen::MatrixXd theta = env.truth().theta_star.transpose();
  return {{"theta_star", matrix_to_json(theta).front()},
          {"norm_relaxed", env.truth().norm_relaxed},
          {"features", matrix_to_json(env.features().features)},
          {"means", env.base_means()}};
}

std::pair<LinearGroundTruth, FeatureContext> linear_from_json(const json& j) {
  LinearGroundTruth truth;
  const auto theta = j.at("theta_star").get<std::vector<double>>();
  truth.theta_star = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
  truth.norm_relaxed = j.value("norm_relaxed", false);
  FeatureContext ctx{matrix_from_json(j.at("features"), "features")};
  return {std::move(truth), std::move(ctx)};
}

void check_stored_means(const LinearEnvironment& env, const json& j) {
  if (!j.contains("means")) return;
  const auto stored = j.at("means").get<std::vector<double>>();
  const auto& mu = env.base_means();
  if (stored.size() != mu.size()) throw InputError("stored means have the wrong length");
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (std::abs(stored[i] - mu[i]) > 1e-9) {
      throw InputError("stored mean of arm " + std::to_string(i) + " disagrees with theta* and features");
    }
  }
}

json edges_to_json(const std::vector<std::pair<int, int>>& edges) {
  json out = json::array();
  for (const auto& [u, v] : edges) out.push_back({u, v});
  return out;
}

std::vector<std::pair<int, int>> edges_from_json(const json& j) {
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) throw InputError("edges must be [src, dst] pairs");
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return edges;
}

std::unique_ptr<Environment> build_env(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "disjunctive-cascade" || kind == "conjunctive-cascade") {
    auto [truth, ctx] = linear_from_json(j);
    const auto form = kind == "disjunctive-cascade" ? CascadeForm::disjunctive : CascadeForm::conjunctive;
    auto env = std::make_unique<CascadeEnv>(form, j.at("slate_size").get<int>(), std::move(truth), std::move(ctx));
    check_stored_means(*env, j);
    return env;
  }
  if (kind == "pmc") {
    BipartiteGraph g;
    g.num_sources = j.at("num_sources").get<int>();
    g.num_targets = j.at("num_targets").get<int>();
    g.edges = edges_from_json(j.at("edges"));
    auto [truth, ctx] = linear_from_json(j);
    auto env = std::make_unique<PmcEnv>(std::move(g), j.at("budget").get<int>(), std::move(truth), std::move(ctx));
    check_stored_means(*env, j);
    return env;
  }
  if (kind == "oim") {
    DirectedGraph g;
    g.num_nodes = j.at("num_nodes").get<int>();
    g.edges = edges_from_json(j.at("edges"));
    auto [truth, ctx] = linear_from_json(j);
    auto env = std::make_unique<OimEnv>(std::move(g), j.at("budget").get<int>(), std::move(truth), std::move(ctx),
                                        j.value("mc_samples", 2000));
    check_stored_means(*env, j);
    return env;
  }
  if (kind == "rating-matrix") {
    FeatureContext ctx{matrix_from_json(j.at("features"), "features")};
    const int users = j.at("num_users").get<int>();
    if (users < 1) throw InputError("num_users must be >= 1");
    std::vector<std::vector<unsigned char>> ratings(static_cast<std::size_t>(ctx.num_arms()),
                                                    std::vector<unsigned char>(static_cast<std::size_t>(users), 0));
    for (const auto& [item, user] : edges_from_json(j.at("positives"))) {
      if (item < 0 || item >= ctx.num_arms() || user < 0 || user >= users) {
        throw InputError("rating entry out of range");
      }
      ratings[static_cast<std::size_t>(item)][static_cast<std::size_t>(user)] = 1;
    }
    return std::make_unique<RatingMatrixCascadeEnv>(std::move(ctx), std::move(ratings), j.at("slate_size").get<int>());
  }
  throw InputError("unknown environment kind '" + kind + "'");
}

}  // namespace

json env_to_json(const Environment& env) {
  if (const auto* c = dynamic_cast<const CascadeEnv*>(&env)) {
    json j = linear_part(*c);
    j["kind"] = c->kind();
    j["slate_size"] = c->slate_size();
    return j;
  }
  if (const auto* p = dynamic_cast<const PmcEnv*>(&env)) {
    json j = linear_part(*p);
    j["kind"] = "pmc";
    j["num_sources"] = p->graph().num_sources;
    j["num_targets"] = p->graph().num_targets;
    j["edges"] = edges_to_json(p->graph().edges);
    j["budget"] = p->budget();
    return j;
  }
  if (const auto* o = dynamic_cast<const OimEnv*>(&env)) {
    json j = linear_part(*o);
    j["kind"] = "oim";
    j["num_nodes"] = o->graph().num_nodes;
    j["edges"] = edges_to_json(o->graph().edges);
    j["budget"] = o->budget();
    j["mc_samples"] = o->mc_samples();
    return j;
  }
  if (const auto* r = dynamic_cast<const RatingMatrixCascadeEnv*>(&env)) {
    json positives = json::array();
    for (int i = 0; i < r->num_arms(); ++i) {
      for (int u = 0; u < r->num_users(); ++u) {
        if (r->rating(i, u)) positives.push_back({i, u});
      }
    }
    return {{"kind", "rating-matrix"},
            {"slate_size", r->action_size()},
            {"features", matrix_to_json(r->features().features)},
            {"num_users", r->num_users()},
            {"positives", std::move(positives)}};
  }
  throw std::invalid_argument("environment kind '" + env.kind() + "' cannot be serialized");
}

std::unique_ptr<Environment> env_from_json(const json& j) {
  try {
    return build_env(j);
  } catch (const json::exception& e) {
    throw InputError(std::string("environment JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("environment JSON: ") + e.what());
  } catch (const std::domain_error& e) {
    throw InputError(std::string("environment JSON: ") + e.what());
  }
}

std::unique_ptr<Environment> load_env_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return env_from_json(j);
}

void save_env_file(const Environment& env, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << env_to_json(env).dump(2) << '\n';
}

// ---------------------------------------------------------------------------

std::vector<std::string> builtin_env_names() {
  return {"disjunctive", "conjunctive", "pmc", "oim", "rating-matrix"};
}

std::unique_ptr<Environment> make_builtin_env(const std::string& name) {
  if (name == "disjunctive" || name == "conjunctive") {
    const std::vector<double> mu{0.3, 0.5, 0.2, 0.6, 0.4, 0.1};
    auto [truth, ctx] = one_hot_lift(mu);
    const auto form = name == "disjunctive" ? CascadeForm::disjunctive : CascadeForm::conjunctive;
    return std::make_unique<CascadeEnv>(form, 3, std::move(truth), std::move(ctx));
  }
  if (name == "pmc") {
    BipartiteGraph g;
    g.num_sources = 4;
    g.num_targets = 4;
    g.edges = {{0, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 2}, {2, 3}, {3, 0}, {3, 3}, {0, 3}};
    const std::vector<double> mu{0.2, 0.4, 0.6, 0.3, 0.5, 0.7, 0.1, 0.35, 0.25};
    auto [truth, ctx] = one_hot_lift(mu);
    return std::make_unique<PmcEnv>(std::move(g), 2, std::move(truth), std::move(ctx));
  }
  if (name == "oim") {
    DirectedGraph g;
    g.num_nodes = 5;
    g.edges = {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}, {3, 4}, {2, 4}, {4, 0}};
    const std::vector<double> mu{0.5, 0.3, 0.4, 0.6, 0.2, 0.7, 0.35, 0.25};
    auto [truth, ctx] = one_hot_lift(mu);
    return std::make_unique<OimEnv>(std::move(g), 2, std::move(truth), std::move(ctx));
  }
  if (name == "rating-matrix") {
    // Users enumerate every bit pattern of the four items, weighted so that
    // item i is liked by a fraction q_i of users independently of the others.
    const std::vector<int> numer{1, 1, 3, 1};  // q = (1/2, 1/4, 3/4, 1/2)
    const std::vector<int> denom{2, 4, 4, 2};
    int users = 1;
    for (int q : denom) users *= q;
    std::vector<std::vector<unsigned char>> ratings(4, std::vector<unsigned char>(static_cast<std::size_t>(users), 0));
    for (int u = 0; u < users; ++u) {
      int rest = u;
      for (std::size_t i = 0; i < 4; ++i) {
        const int digit = rest % denom[i];
        rest /= denom[i];
        ratings[i][static_cast<std::size_t>(u)] = digit < numer[i] ? 1 : 0;
      }
    }
    Eigen::MatrixXd feats = Eigen::MatrixXd::Identity(4, 4);
    return std::make_unique<RatingMatrixCascadeEnv>(FeatureContext{feats}, std::move(ratings), 2);
  }
  throw InputError("unknown builtin environment '" + name + "'");
}

std::unique_ptr<Environment> resolve_env(const std::string& spec) {
  const auto names = builtin_env_names();
  if (std::find(names.begin(), names.end(), spec) != names.end()) return make_builtin_env(spec);
  return load_env_file(spec);
}

// ---------------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(const std::string& line) { return trim(line.substr(0, line.find('#'))); }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string where(const std::filesystem::path& path, long line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

}  // namespace

BipartiteGraph read_bipartite_graph(const std::filesystem::path& path) {
  auto in = open_input(path);
  BipartiteGraph g;
  bool have_header = false;
  long lineno = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++lineno;
    const auto line = strip_comment(raw);
    if (line.empty()) continue;
    const auto tok = split_ws(line);
    if (!have_header) {
      if (tok.size() != 2 || tok[0].rfind("L=", 0) != 0 || tok[1].rfind("V=", 0) != 0 ||
          !parse_number(tok[0].substr(2), g.num_sources) || !parse_number(tok[1].substr(2), g.num_targets) ||
          g.num_sources < 1 || g.num_targets < 1) {
        throw InputError(where(path, lineno) + "expected header 'L=<n> V=<n>'");
      }
      have_header = true;
      continue;
    }
    int u = 0;
    int v = 0;
    if (tok.size() != 2 || !parse_number(tok[0], u) || !parse_number(tok[1], v)) {
      throw InputError(where(path, lineno) + "expected 'src dst'");
    }
    if (u < 0 || u >= g.num_sources || v < 0 || v >= g.num_targets) {
      throw InputError(where(path, lineno) + "edge endpoint out of range");
    }
    g.edges.emplace_back(u, v);
  }
  if (!have_header) throw InputError(path.string() + ": empty graph file");
  if (g.edges.empty()) throw InputError(path.string() + ": graph has no edges");
  g.finalize();
  return g;
}

DirectedGraph read_directed_graph(const std::filesystem::path& path) {
  auto in = open_input(path);
  DirectedGraph g;
  long lineno = 0;
  int max_id = -1;
  for (std::string raw; std::getline(in, raw);) {
    ++lineno;
    const auto line = strip_comment(raw);
    if (line.empty()) continue;
    const auto tok = split_ws(line);
    int u = 0;
    int v = 0;
    if (tok.size() != 2 || !parse_number(tok[0], u) || !parse_number(tok[1], v) || u < 0 || v < 0) {
      throw InputError(where(path, lineno) + "expected 'src dst' with non-negative ids");
    }
    g.edges.emplace_back(u, v);
    max_id = std::max({max_id, u, v});
  }
  if (g.edges.empty()) throw InputError(path.string() + ": graph has no edges");
  g.num_nodes = max_id + 1;
  g.finalize();
  return g;
}

FeatureContext read_features(const std::filesystem::path& path, std::ostream& warn) {
  auto in = open_input(path);
  std::string raw;
  if (!std::getline(in, raw)) throw InputError(path.string() + ": empty feature file");
  const auto header = split(trim(raw), ',');
  if (header.size() < 2 || header[0] != "item_id") {
    throw InputError(path.string() + ": header must be 'item_id,f1,...,fd'");
  }
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  std::vector<std::pair<int, Eigen::VectorXd>> rows;
  long lineno = 1;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (static_cast<Eigen::Index>(fields.size()) != d + 1) {
      throw InputError(where(path, lineno) + "expected " + std::to_string(d + 1) + " fields");
    }
    int id = 0;
    if (!parse_number(fields[0], id) || id < 0) throw InputError(where(path, lineno) + "bad item_id");
    Eigen::VectorXd phi(d);
    for (Eigen::Index c = 0; c < d; ++c) {
      double x = 0.0;
      if (!parse_number(fields[static_cast<std::size_t>(c + 1)], x) || !std::isfinite(x)) {
        throw InputError(where(path, lineno) + "bad feature value");
      }
      phi[c] = x;
    }
    rows.emplace_back(id, std::move(phi));
  }
  if (rows.empty()) throw InputError(path.string() + ": no feature rows");
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd feats(m, d);
  std::vector<bool> seen(rows.size(), false);
  int rescaled = 0;
  for (auto& [id, phi] : rows) {
    if (id >= m || seen[static_cast<std::size_t>(id)]) {
      throw InputError(path.string() + ": item ids must be exactly 0.." + std::to_string(m - 1));
    }
    seen[static_cast<std::size_t>(id)] = true;
    const double norm = phi.norm();
    if (norm > 1.0) {
      phi /= norm;
      ++rescaled;
    }
    feats.row(id) = phi.transpose();
  }
  if (rescaled > 0) {
    warn << "warning: " << path.string() << ": " << rescaled << " feature row(s) had norm above 1 and were "
         << "scaled to unit norm\n";
  }
  return FeatureContext{std::move(feats)};
}

std::vector<std::vector<unsigned char>> read_ratings(const std::filesystem::path& path, int num_items,
                                                     int num_users) {
  if (num_items < 1) throw InputError("rating matrix needs at least one item");
  auto in = open_input(path);
  std::vector<std::pair<int, int>> pairs;
  long lineno = 0;
  int max_user = -1;
  for (std::string raw; std::getline(in, raw);) {
    ++lineno;
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    int item = 0;
    int user = 0;
    const bool numeric = fields.size() == 2 && parse_number(fields[0], item) && parse_number(fields[1], user);
    if (!numeric) {
      if (lineno == 1 && pairs.empty()) continue;  // header
      throw InputError(where(path, lineno) + "expected 'item_id,user_id'");
    }
    if (item < 0 || item >= num_items || user < 0) throw InputError(where(path, lineno) + "id out of range");
    pairs.emplace_back(item, user);
    max_user = std::max(max_user, user);
  }
  if (pairs.empty()) throw InputError(path.string() + ": no ratings");
  const int users = num_users > 0 ? num_users : max_user + 1;
  if (max_user >= users) throw InputError(path.string() + ": user id exceeds the declared user count");
  std::vector<std::vector<unsigned char>> ratings(static_cast<std::size_t>(num_items),
                                                  std::vector<unsigned char>(static_cast<std::size_t>(users), 0));
  for (const auto& [item, user] : pairs) ratings[static_cast<std::size_t>(item)][static_cast<std::size_t>(user)] = 1;
  return ratings;
}

}  // namespace c2mab
