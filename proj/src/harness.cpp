#include "c2mab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "toml.hpp"

#include "c2mab/environments.hpp"
#include "c2mab/io.hpp"
#include "c2mab/oracles.hpp"
#include "c2mab/rng.hpp"

namespace c2mab {

namespace {

// Stream ids passed to derive_seed in place of a policy index.
constexpr std::uint64_t kInstanceStream = 0xFFFF'FFFF'0000'0001ULL;
constexpr std::uint64_t kContractStream = 0xFFFF'FFFF'0000'0002ULL;

}  // namespace

std::string to_string(RegretReference ref) {
  switch (ref) {
    case RegretReference::automatic: return "auto";
    case RegretReference::brute_force: return "brute-force";
    case RegretReference::greedy_on_true: return "greedy-on-true-means";
  }
  return "unknown";
}

RegretReference parse_regret_reference(const std::string& name) {
  if (name == "auto") return RegretReference::automatic;
  if (name == "brute-force") return RegretReference::brute_force;
  if (name == "greedy-on-true-means") return RegretReference::greedy_on_true;
  throw InputError("regret_reference must be auto, brute-force or greedy-on-true-means, got '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (!make_env) throw InputError("config has no environment");
  if (horizon < 1) throw InputError("horizon must be >= 1");
  if (seeds.empty()) throw InputError("at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw InputError("seeds must be distinct");
  }
  if (policies.empty()) throw InputError("at least one policy is required");
  std::set<std::string> ids;
  for (const auto& p : policies) {
    if (p.id.empty() || p.id.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-") !=
                            std::string::npos) {
      throw InputError("policy id '" + p.id + "' must be non-empty and use only [A-Za-z0-9_.-]");
    }
    if (!ids.insert(p.id).second) throw InputError("duplicate policy id '" + p.id + "'; set distinct ids");
  }
}

// ---------------------------------------------------------------------------
// TOML config

namespace {

class TableReader {
 public:
  TableReader(const toml::table& table, std::string where, std::set<std::string> allowed)
      : table_(table), where_(std::move(where)) {
    for (auto&& [key, node] : table_) {
      if (!allowed.count(std::string(key.str()))) {
        throw InputError(where_ + ": unknown key '" + std::string(key.str()) + "'");
      }
    }
  }

  bool has(const std::string& key) const { return table_.contains(key); }

  std::string str(const std::string& key) const {
    if (auto v = table_[key].value<std::string>()) return *v;
    throw missing(key, "a string");
  }
  std::int64_t integer(const std::string& key) const {
    if (auto v = table_[key].value<std::int64_t>()) return *v;
    throw missing(key, "an integer");
  }
  double real(const std::string& key) const {
    if (const auto* n = table_[key].as_floating_point()) return n->get();
    if (const auto* n = table_[key].as_integer()) return static_cast<double>(n->get());
    throw missing(key, "a number");
  }
  bool boolean(const std::string& key) const {
    if (auto v = table_[key].value<bool>()) return *v;
    throw missing(key, "a boolean");
  }
  std::vector<double> reals(const std::string& key) const {
    const auto* arr = table_[key].as_array();
    if (!arr) throw missing(key, "an array of numbers");
    std::vector<double> out;
    for (const auto& el : *arr) {
      if (const auto* f = el.as_floating_point()) {
        out.push_back(f->get());
      } else if (const auto* i = el.as_integer()) {
        out.push_back(static_cast<double>(i->get()));
      } else {
        throw missing(key, "an array of numbers");
      }
    }
    return out;
  }
  const std::string& where() const { return where_; }

 private:
  InputError missing(const std::string& key, const char* type) const {
    return InputError(where_ + ": key '" + key + "' must be " + type);
  }

  const toml::table& table_;
  std::string where_;
};

int positive_int(const TableReader& r, const std::string& key) {
  const auto v = r.integer(key);
  if (v < 1 || v > 1'000'000'000) throw InputError(r.where() + ": '" + key + "' must be a positive integer");
  return static_cast<int>(v);
}

std::filesystem::path data_path(const TableReader& r, const std::string& key, const std::filesystem::path& base) {
  std::filesystem::path p = r.str(key);
  if (p.is_relative()) p = base / p;
  if (!std::filesystem::exists(p)) throw InputError(r.where() + ": file '" + p.string() + "' does not exist");
  return p;
}

// Ground truth for graph environments: either per-edge means (one-hot lift)
// or an edge feature file with theta*.
std::pair<LinearGroundTruth, FeatureContext> edge_truth(const TableReader& r, const std::filesystem::path& base,
                                                        int num_edges) {
  if (r.has("edge_means") == (r.has("features") || r.has("theta"))) {
    throw InputError(r.where() + ": give either 'edge_means' or both 'features' and 'theta'");
  }
  if (r.has("edge_means")) {
    const auto mu = r.reals("edge_means");
    if (static_cast<int>(mu.size()) != num_edges) throw InputError(r.where() + ": need one edge mean per edge");
    for (double x : mu) {
      if (!(x >= 0.0 && x <= 1.0)) throw InputError(r.where() + ": edge means must lie in [0, 1]");
    }
    return one_hot_lift(mu);
  }
  FeatureContext ctx = read_features(data_path(r, "features", base), std::cerr);
  const auto theta = r.reals("theta");
  LinearGroundTruth truth;
  truth.theta_star = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
  return {std::move(truth), std::move(ctx)};
}

EnvFactory fixed_factory(const Environment& prototype) {
  auto j = std::make_shared<const nlohmann::json>(env_to_json(prototype));
  return [j](std::uint64_t) { return env_from_json(*j); };
}

EnvFactory parse_env(const toml::table& t, const std::filesystem::path& base, std::string& kind_out) {
  const auto* kind_node = t["kind"].as_string();
  if (!kind_node) throw InputError("[env]: key 'kind' must be a string");
  const std::string kind = kind_node->get();
  kind_out = kind;
  const std::string where = "[env] (" + kind + ")";

  if (kind == "cascade-synthetic") {
    TableReader r(t, where, {"kind", "m", "k", "d", "instance_seed"});
    const int m = positive_int(r, "m");
    const int k = positive_int(r, "k");
    const int d = positive_int(r, "d");
    std::optional<std::uint64_t> fixed;
    if (r.has("instance_seed")) fixed = static_cast<std::uint64_t>(r.integer("instance_seed"));
    if (d < 2 || k > m) throw InputError(where + ": needs d >= 2 and k <= m");
    return [m, k, d, fixed](std::uint64_t seed) -> std::unique_ptr<Environment> {
      Rng rng(derive_seed(fixed.value_or(seed), kInstanceStream, 0));
      return std::move(gen_synthetic_cascade(m, k, d, rng).env);
    };
  }

  std::unique_ptr<Environment> proto;
  try {
    if (kind == "file") {
      TableReader r(t, where, {"kind", "path"});
      proto = load_env_file(data_path(r, "path", base));
    } else if (kind == "pmc") {
      TableReader r(t, where, {"kind", "graph", "budget", "edge_means", "features", "theta"});
      BipartiteGraph g = read_bipartite_graph(data_path(r, "graph", base));
      auto [truth, ctx] = edge_truth(r, base, g.num_edges());
      proto = std::make_unique<PmcEnv>(std::move(g), positive_int(r, "budget"), std::move(truth), std::move(ctx));
    } else if (kind == "oim") {
      TableReader r(t, where, {"kind", "graph", "budget", "edge_means", "features", "theta", "mc_samples"});
      DirectedGraph g = read_directed_graph(data_path(r, "graph", base));
      auto [truth, ctx] = edge_truth(r, base, g.num_edges());
      const int samples = r.has("mc_samples") ? positive_int(r, "mc_samples") : 2000;
      proto = std::make_unique<OimEnv>(std::move(g), positive_int(r, "budget"), std::move(truth), std::move(ctx),
                                       samples);
    } else if (kind == "rating-matrix") {
      TableReader r(t, where, {"kind", "features", "ratings", "k", "num_users"});
      FeatureContext ctx = read_features(data_path(r, "features", base), std::cerr);
      auto ratings = read_ratings(data_path(r, "ratings", base), ctx.num_arms(),
                                  r.has("num_users") ? positive_int(r, "num_users") : 0);
      proto = std::make_unique<RatingMatrixCascadeEnv>(std::move(ctx), std::move(ratings), positive_int(r, "k"));
    } else {
      throw InputError("[env]: unknown kind '" + kind +
                       "' (expected cascade-synthetic, file, pmc, oim or rating-matrix)");
    }
  } catch (const std::invalid_argument& e) {
    throw InputError(where + ": " + e.what());
  } catch (const std::domain_error& e) {
    throw InputError(where + ": " + e.what());
  }
  return fixed_factory(*proto);
}

PolicySpec parse_policy(const toml::table& t, std::size_t index) {
  TableReader r(t, "[[policies]] #" + std::to_string(index + 1), {"kind", "id", "gamma", "delta", "exploration_scale"});
  PolicySpec p;
  try {
    p.kind = parse_policy_kind(r.str("kind"));
  } catch (const std::invalid_argument& e) {
    throw InputError(r.where() + ": " + e.what());
  }
  p.id = r.has("id") ? r.str("id") : to_string(p.kind);
  if (r.has("gamma")) p.gamma = r.real("gamma");
  if (r.has("delta")) p.delta = r.real("delta");
  if (r.has("exploration_scale")) p.exploration_scale = r.real("exploration_scale");
  return p;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& toml_text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config: " << e.description() << " at line " << e.source().begin.line;
    throw InputError(msg.str());
  }
  TableReader r(root, "config",
                {"env", "policies", "horizon", "seeds", "regret_reference", "output_directory", "mc_contract_checks"});
  ExperimentConfig cfg;
  cfg.horizon = r.integer("horizon");

  const auto* seeds = root["seeds"].as_array();
  if (!seeds) throw InputError("config: key 'seeds' must be an array of integers");
  for (const auto& s : *seeds) {
    const auto* v = s.as_integer();
    if (!v || v->get() < 0) throw InputError("config: seeds must be non-negative integers");
    cfg.seeds.push_back(static_cast<std::uint64_t>(v->get()));
  }

  if (r.has("regret_reference")) cfg.regret_reference = parse_regret_reference(r.str("regret_reference"));
  if (r.has("output_directory")) cfg.output_directory = r.str("output_directory");
  if (r.has("mc_contract_checks")) cfg.mc_contract_checks = r.boolean("mc_contract_checks");

  const auto* env = root["env"].as_table();
  if (!env) throw InputError("config: missing [env] table");
  cfg.make_env = parse_env(*env, base_dir, cfg.env_kind);

  const auto* policies = root["policies"].as_array();
  if (!policies) throw InputError("config: missing [[policies]] entries");
  for (std::size_t i = 0; i < policies->size(); ++i) {
    const auto* t = (*policies)[i].as_table();
    if (!t) throw InputError("config: every policies entry must be a table");
    cfg.policies.push_back(parse_policy(*t, i));
  }
  cfg.validate();
  // Resolve every policy config up front so bad gamma/delta values fail at load time.
  const auto probe = cfg.make_env(cfg.seeds.front());
  for (const auto& p : cfg.policies) {
    PolicyConfig pc{p.gamma, p.delta, cfg.horizon, probe->batch_size(), probe->dim(), p.exploration_scale};
    try {
      (void)pc.resolved(p.kind);
    } catch (const std::invalid_argument& e) {
      throw InputError("policy '" + p.id + "': " + e.what());
    }
  }
  if (cfg.regret_reference == RegretReference::brute_force &&
      binomial(probe->action_pool(), probe->action_size()) > kBruteForceLimit) {
    throw InputError("brute-force regret reference is infeasible for this action space");
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment_config(text.str(), path.parent_path());
}

// ---------------------------------------------------------------------------
// Runs

double reference_value(const Environment& env, std::span<const double> mu, RegretReference ref) {
  const OracleSpec spec = env.oracle_spec();
  const double ab = spec.alpha * spec.beta;
  const bool feasible = binomial(env.action_pool(), env.action_size()) <= kBruteForceLimit;
  if (ref == RegretReference::brute_force || (ref == RegretReference::automatic && feasible)) {
    return ab * brute_force_best(env, mu).value;
  }
  return ab * env.expected_reward(env.oracle(mu), mu);
}

RegretTrace run_single(const ExperimentConfig& cfg, std::size_t policy_index, std::size_t run_index) {
  const auto start = std::chrono::steady_clock::now();
  const PolicySpec& spec = cfg.policies.at(policy_index);
  const std::uint64_t seed = cfg.seeds.at(run_index);
  const auto env = cfg.make_env(seed);
  Rng rng(derive_seed(seed, policy_index, run_index));

  PolicyConfig pc{spec.gamma, spec.delta, cfg.horizon, env->batch_size(), env->dim(), spec.exploration_scale};
  const Environment* e = env.get();
  auto policy = make_policy(spec.kind, pc, env->num_arms(), [e](std::span<const double> s) { return e->oracle(s); });

  RegretTrace trace;
  trace.policy = spec.id;
  trace.seed = seed;
  const auto T = static_cast<std::size_t>(cfg.horizon);
  trace.inst_regret.reserve(T);
  trace.cum_regret.reserve(T);
  trace.actions.reserve(T);
  trace.realized_reward.reserve(T);

  std::map<std::vector<double>, double> reference_cache;
  double cum = 0.0;
  for (long t = 1; t <= cfg.horizon; ++t) {
    const FeatureContext ctx = env->context(t, rng);
    const std::vector<double> mu = env->means(ctx);
    const Action action = policy->select(t, ctx);
    env->validate_action(action);
    const Feedback fb = env->play(action, mu, rng);
    policy->update(ctx, fb);

    auto it = reference_cache.find(mu);
    if (it == reference_cache.end()) it = reference_cache.emplace(mu, reference_value(*env, mu, cfg.regret_reference)).first;
    const double inst = it->second - env->expected_reward(action, mu);
    cum += std::max(inst, 0.0);
    trace.inst_regret.push_back(inst);
    trace.cum_regret.push_back(cum);
    trace.actions.push_back(action.to_string());
    trace.realized_reward.push_back(fb.realized_reward);
  }
  trace.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

SummaryRow summarize(const std::string& policy, const std::vector<const RegretTrace*>& runs) {
  SummaryRow row;
  row.policy = policy;
  if (runs.empty()) return row;
  const std::size_t T = runs.front()->cum_regret.size();
  const double n = static_cast<double>(runs.size());
  row.mean_cum.assign(T, 0.0);
  row.std_cum.assign(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0.0;
    for (const auto* r : runs) sum += r->cum_regret.at(t);
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto* r : runs) ss += (r->cum_regret[t] - mean) * (r->cum_regret[t] - mean);
    row.mean_cum[t] = mean;
    row.std_cum[t] = runs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }
  return row;
}

namespace {

std::vector<ContractReport> run_contract_checks(const ExperimentConfig& cfg) {
  constexpr int kActionsPerInstance = 3;
  constexpr long kPlays = 20000;
  std::vector<ContractReport> out;
  for (std::size_t r = 0; r < cfg.seeds.size(); ++r) {
    const auto env = cfg.make_env(cfg.seeds[r]);
    // Monte-Carlo analytic values cannot be checked against more Monte Carlo.
    if (!env->analytic_exact()) continue;
    Rng rng(derive_seed(cfg.seeds[r], kContractStream, r));
    const auto mu = env->means(env->context(1, rng));
    for (int a = 0; a < kActionsPerInstance; ++a) {
      out.push_back(contract_check(*env, env->random_action(rng), mu, kPlays, rng));
    }
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers) {
  cfg.validate();
  ExperimentResult result;
  if (cfg.mc_contract_checks) {
    result.contracts = run_contract_checks(cfg);
    result.contracts_pass = std::all_of(result.contracts.begin(), result.contracts.end(),
                                        [](const ContractReport& c) { return c.pass; });
  }

  const std::size_t P = cfg.policies.size();
  const std::size_t S = cfg.seeds.size();
  const std::size_t jobs = P * S;
  std::vector<RegretTrace> traces(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      try {
        traces[j] = run_single(cfg, j / S, j % S);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  const auto n_threads = static_cast<std::size_t>(std::clamp<long>(workers, 1, static_cast<long>(jobs)));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }

  std::sort(traces.begin(), traces.end(), [](const RegretTrace& a, const RegretTrace& b) {
    return std::tie(a.policy, a.seed) < std::tie(b.policy, b.seed);
  });
  std::map<std::string, std::vector<const RegretTrace*>> by_policy;
  for (const auto& t : traces) by_policy[t.policy].push_back(&t);
  for (const auto& [id, runs] : by_policy) result.summary.push_back(summarize(id, runs));
  result.traces = std::move(traces);
  return result;
}

// ---------------------------------------------------------------------------
// Output

std::string format_double(double x) {
  if (x == 0.0) return "0";  // also folds -0
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

std::string trace_csv(const RegretTrace& trace) {
  std::string out = "round,inst_regret,cum_regret,action\n";
  for (std::size_t t = 0; t < trace.inst_regret.size(); ++t) {
    out += std::to_string(t + 1);
    out += ',';
    out += format_double(trace.inst_regret[t]);
    out += ',';
    out += format_double(trace.cum_regret[t]);
    out += ',';
    out += trace.actions[t];
    out += '\n';
  }
  return out;
}

nlohmann::json summary_json(const std::vector<SummaryRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows) {
    std::vector<long> rounds(row.mean_cum.size());
    for (std::size_t t = 0; t < rounds.size(); ++t) rounds[t] = static_cast<long>(t + 1);
    out.push_back({{"policy", row.policy}, {"rounds", rounds}, {"mean_cum", row.mean_cum}, {"std_cum", row.std_cum}});
  }
  return out;
}

std::string trace_file_name(const RegretTrace& trace) {
  return trace.policy + "_seed" + std::to_string(trace.seed) + ".csv";
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("write failed for " + path.string());
}

}  // namespace

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
  for (const auto& trace : result.traces) write_text(dir / trace_file_name(trace), trace_csv(trace));
  write_text(dir / "summary.json", summary_json(result.summary).dump() + "\n");
  if (!result.contracts.empty()) {
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& c : result.contracts) reports.push_back(to_json(c));
    write_text(dir / "contracts.json", reports.dump(2) + "\n");
  }
}

}  // namespace c2mab
