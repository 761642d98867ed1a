#include "c2mab/smoothness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace c2mab {

std::string to_string(ConditionKind kind) {
  switch (kind) {
    case ConditionKind::monotonicity: return "mono";
    case ConditionKind::tpm: return "tpm";
    case ConditionKind::vm: return "vm";
    case ConditionKind::tpvm: return "tpvm";
    case ConditionKind::tp_smoothness: return "tp-smooth";
  }
  return "unknown";
}

ConditionKind parse_condition_kind(const std::string& name) {
  if (name == "mono") return ConditionKind::monotonicity;
  if (name == "tpm") return ConditionKind::tpm;
  if (name == "vm") return ConditionKind::vm;
  if (name == "tpvm") return ConditionKind::tpvm;
  if (name == "tp-smooth") return ConditionKind::tp_smoothness;
  throw std::invalid_argument("unknown condition '" + name + "'");
}

namespace {

// Quantities shared by every decomposition of one (S, mu, mu') trial.
struct TrialValues {
  double r_mu = 0.0;
  double r_mu_prime = 0.0;
  std::vector<double> p_mu;
  std::vector<double> p_mu_prime;  // only for tp-smoothness
  std::vector<int> support;        // S-tilde
};

TrialValues trial_values(const Environment& env, ConditionKind kind, const ConditionInstance& inst) {
  TrialValues v;
  if (kind == ConditionKind::tp_smoothness) {
    v.p_mu = env.triggering_probs(inst.action, inst.mu);
    v.p_mu_prime = env.triggering_probs(inst.action, inst.mu_prime);
  } else {
    v.r_mu = env.expected_reward(inst.action, inst.mu);
    v.r_mu_prime = env.expected_reward(inst.action, inst.mu_prime);
    if (kind == ConditionKind::tpm || kind == ConditionKind::tpvm) {
      v.p_mu = env.triggering_probs(inst.action, inst.mu);
    }
  }
  v.support = env.triggerable(inst.action);
  return v;
}

Sides sides_from(ConditionKind kind, const Coefficients& c, const ConditionInstance& inst,
                 const TrialValues& v) {
  Sides s;
  switch (kind) {
    case ConditionKind::monotonicity:
      s.lhs = v.r_mu;
      s.rhs = v.r_mu_prime + 1e-12;
      break;
    case ConditionKind::tpm: {
      double sum = 0.0;
      for (std::size_t i = 0; i < inst.mu.size(); ++i) sum += v.p_mu[i] * std::abs(inst.mu[i] - inst.mu_prime[i]);
      s.lhs = std::abs(v.r_mu_prime - v.r_mu);
      s.rhs = c.b1 * sum;
      break;
    }
    case ConditionKind::vm:
    case ConditionKind::tpvm: {
      const bool modulated = kind == ConditionKind::tpvm;
      double quad = 0.0;
      double lin = 0.0;
      for (int a : v.support) {
        const auto i = static_cast<std::size_t>(a);
        const double var = (1.0 - inst.mu[i]) * inst.mu[i];
        const double p = modulated ? v.p_mu[i] : 1.0;
        const double pl = modulated ? std::pow(p, c.lambda) : 1.0;
        quad += pl * inst.zeta[i] * inst.zeta[i] / var;
        lin += p * std::abs(inst.eta[i]);
      }
      s.lhs = std::abs(v.r_mu_prime - v.r_mu);
      s.rhs = c.bv * std::sqrt(quad) + c.b1 * lin;
      break;
    }
    case ConditionKind::tp_smoothness: {
      double sum = 0.0;
      for (std::size_t j = 0; j < inst.mu.size(); ++j) sum += v.p_mu[j] * std::abs(inst.mu[j] - inst.mu_prime[j]);
      const auto i = static_cast<std::size_t>(inst.arm);
      s.lhs = std::abs(v.p_mu_prime[i] - v.p_mu[i]);
      s.rhs = c.bp * sum;
      break;
    }
  }
  return s;
}

// Means in [lo, hi]; on the full range some coordinates are pinned to 0 or 1.
std::vector<double> sample_means(int m, double lo, double hi, bool allow_extremes, Rng& rng) {
  std::vector<double> mu(static_cast<std::size_t>(m));
  for (auto& x : mu) {
    x = rng.uniform(lo, hi);
    if (allow_extremes && rng.bernoulli(0.1)) x = rng.bernoulli(0.5) ? 1.0 : 0.0;
  }
  return mu;
}

// Coordinates to perturb: all of S-tilde, one member, or a random subset.
std::vector<int> perturbed_coordinates(const std::vector<int>& support, Rng& rng) {
  if (support.empty()) return {};
  switch (rng.below(3)) {
    case 0: return support;
    case 1: return {support[rng.below(support.size())]};
    default: {
      std::vector<int> out;
      for (int a : support) {
        if (rng.bernoulli(0.5)) out.push_back(a);
      }
      return out;
    }
  }
}

class ReportBuilder {
 public:
  ReportBuilder(ConditionKind kind, const Coefficients& c, long trials) {
    report_.kind = kind;
    report_.coeffs = c;
    report_.trials = trials;
  }

  void record(const Sides& s, const ConditionInstance& inst) {
    ++report_.evaluations;
    const double ratio = violation_ratio(s);
    if (ratio > report_.worst_ratio) {
      report_.worst_ratio = ratio;
      if (ratio > 1.0) {
        report_.pass = false;
        report_.counterexample = inst;
      }
    }
  }

  ConditionReport finish() { return std::move(report_); }

 private:
  ConditionReport report_;
};

void require_interior(const CheckOptions& opt) {
  if (!(opt.interior_lo > 0.0 && opt.interior_hi < 1.0 && opt.interior_lo < opt.interior_hi)) {
    throw std::invalid_argument("VM/TPVM mean range must lie inside (0, 1)");
  }
}

ConditionReport check_decomposed(const Environment& env, ConditionKind kind, const Coefficients& c,
                                 const CheckOptions& opt, Rng& rng) {
  require_interior(opt);
  const int m = env.num_arms();
  ReportBuilder out(kind, c, opt.trials);
  for (long trial = 0; trial < opt.trials; ++trial) {
    ConditionInstance inst;
    inst.action = env.random_action(rng);
    inst.mu = sample_means(m, opt.interior_lo, opt.interior_hi, false, rng);
    inst.mu_prime = inst.mu;
    for (int a : perturbed_coordinates(env.triggerable(inst.action), rng)) {
      inst.mu_prime[static_cast<std::size_t>(a)] = rng.uniform(opt.interior_lo, opt.interior_hi);
    }
    const TrialValues v = trial_values(env, kind, inst);
    inst.zeta.assign(static_cast<std::size_t>(m), 0.0);
    inst.eta.assign(static_cast<std::size_t>(m), 0.0);
    for (int split = 0; split < opt.decomps_per_trial + 2; ++split) {
      for (std::size_t i = 0; i < inst.mu.size(); ++i) {
        // split 0: all zeta, split 1: all eta, then random per-coordinate shares.
        const double share = split == 0 ? 1.0 : split == 1 ? 0.0 : rng.uniform();
        const double diff = inst.mu_prime[i] - inst.mu[i];
        inst.zeta[i] = share * diff;
        inst.eta[i] = diff - inst.zeta[i];
      }
      out.record(sides_from(kind, c, inst, v), inst);
    }
  }
  return out.finish();
}

}  // namespace

Sides evaluate_condition(const Environment& env, ConditionKind kind, const Coefficients& coeffs,
                         const ConditionInstance& instance) {
  const auto m = static_cast<std::size_t>(env.num_arms());
  if (instance.mu.size() != m || instance.mu_prime.size() != m) {
    throw std::invalid_argument("condition instance has the wrong number of arms");
  }
  if ((kind == ConditionKind::vm || kind == ConditionKind::tpvm) &&
      (instance.zeta.size() != m || instance.eta.size() != m)) {
    throw std::invalid_argument("VM/TPVM instance needs zeta and eta");
  }
  if (kind == ConditionKind::tp_smoothness && (instance.arm < 0 || instance.arm >= env.num_arms())) {
    throw std::invalid_argument("tp-smoothness instance needs an arm");
  }
  return sides_from(kind, coeffs, instance, trial_values(env, kind, instance));
}

double violation_ratio(const Sides& sides) {
  return sides.lhs / std::max(sides.rhs * (1.0 + 1e-9), 1e-12);
}

ConditionReport check_monotonicity(const Environment& env, const CheckOptions& opt, Rng& rng) {
  ReportBuilder out(ConditionKind::monotonicity, {}, opt.trials);
  for (long trial = 0; trial < opt.trials; ++trial) {
    ConditionInstance inst;
    inst.action = env.random_action(rng);
    inst.mu = sample_means(env.num_arms(), 0.0, 1.0, true, rng);
    inst.mu_prime = inst.mu;
    for (int a : perturbed_coordinates(env.triggerable(inst.action), rng)) {
      auto& x = inst.mu_prime[static_cast<std::size_t>(a)];
      x += rng.uniform() * (1.0 - x);
    }
    const TrialValues v = trial_values(env, ConditionKind::monotonicity, inst);
    out.record(sides_from(ConditionKind::monotonicity, {}, inst, v), inst);
  }
  return out.finish();
}

ConditionReport check_tpm(const Environment& env, double b1, const CheckOptions& opt, Rng& rng) {
  Coefficients c;
  c.b1 = b1;
  ReportBuilder out(ConditionKind::tpm, c, opt.trials);
  for (long trial = 0; trial < opt.trials; ++trial) {
    ConditionInstance inst;
    inst.action = env.random_action(rng);
    inst.mu = sample_means(env.num_arms(), 0.0, 1.0, true, rng);
    inst.mu_prime = inst.mu;
    for (int a : perturbed_coordinates(env.triggerable(inst.action), rng)) {
      inst.mu_prime[static_cast<std::size_t>(a)] = rng.bernoulli(0.1) ? static_cast<double>(rng.below(2)) : rng.uniform();
    }
    const TrialValues v = trial_values(env, ConditionKind::tpm, inst);
    out.record(sides_from(ConditionKind::tpm, c, inst, v), inst);
  }
  return out.finish();
}

ConditionReport check_vm(const Environment& env, double bv, double b1, const CheckOptions& opt, Rng& rng) {
  Coefficients c;
  c.bv = bv;
  c.b1 = b1;
  return check_decomposed(env, ConditionKind::vm, c, opt, rng);
}

ConditionReport check_tpvm(const Environment& env, double bv, double b1, double lambda,
                           const CheckOptions& opt, Rng& rng) {
  Coefficients c;
  c.bv = bv;
  c.b1 = b1;
  c.lambda = lambda;
  return check_decomposed(env, ConditionKind::tpvm, c, opt, rng);
}

ConditionReport check_tp_smoothness(const Environment& env, double bp, const CheckOptions& opt, Rng& rng) {
  Coefficients c;
  c.bp = bp;
  ReportBuilder out(ConditionKind::tp_smoothness, c, opt.trials);
  for (long trial = 0; trial < opt.trials; ++trial) {
    ConditionInstance inst;
    inst.action = env.random_action(rng);
    inst.mu = sample_means(env.num_arms(), 0.0, 1.0, true, rng);
    inst.mu_prime = inst.mu;
    const auto support = env.triggerable(inst.action);
    for (int a : perturbed_coordinates(support, rng)) {
      inst.mu_prime[static_cast<std::size_t>(a)] = rng.uniform();
    }
    const TrialValues v = trial_values(env, ConditionKind::tp_smoothness, inst);
    // Every triggerable arm is checked against the same (S, mu, mu').
    for (int a : support) {
      inst.arm = a;
      out.record(sides_from(ConditionKind::tp_smoothness, c, inst, v), inst);
    }
  }
  return out.finish();
}

ConditionReport check_condition(const Environment& env, ConditionKind kind, const Coefficients& coeffs,
                                const CheckOptions& opt, Rng& rng) {
  switch (kind) {
    case ConditionKind::monotonicity: return check_monotonicity(env, opt, rng);
    case ConditionKind::tpm: return check_tpm(env, coeffs.b1, opt, rng);
    case ConditionKind::vm: return check_vm(env, coeffs.bv, coeffs.b1, opt, rng);
    case ConditionKind::tpvm: return check_tpvm(env, coeffs.bv, coeffs.b1, coeffs.lambda, opt, rng);
    case ConditionKind::tp_smoothness: return check_tp_smoothness(env, coeffs.bp, opt, rng);
  }
  throw std::invalid_argument("unknown condition");
}

nlohmann::json to_json(const ConditionReport& report) {
  nlohmann::json j;
  j["condition"] = to_string(report.kind);
  j["coefficients"] = {{"b1", report.coeffs.b1},
                       {"bv", report.coeffs.bv},
                       {"lambda", report.coeffs.lambda},
                       {"bp", report.coeffs.bp}};
  j["trials"] = report.trials;
  j["evaluations"] = report.evaluations;
  j["verdict"] = report.pass ? "pass" : "counterexample";
  j["worst_ratio"] = report.worst_ratio;
  if (report.counterexample) {
    const auto& ce = *report.counterexample;
    nlohmann::json c;
    c["action"] = ce.action.arms;
    c["mu"] = ce.mu;
    c["mu_prime"] = ce.mu_prime;
    if (!ce.zeta.empty()) {
      c["zeta"] = ce.zeta;
      c["eta"] = ce.eta;
    }
    if (ce.arm >= 0) c["arm"] = ce.arm;
    j["counterexample"] = c;
  } else {
    j["counterexample"] = nullptr;
  }
  return j;
}

// ---------------------------------------------------------------------------

McEstimate mc_expected_reward(const Environment& env, const Action& action, std::span<const double> mu,
                              long n, Rng& rng) {
  if (n < 2) throw std::invalid_argument("need at least two plays");
  double mean = 0.0;
  double m2 = 0.0;
  for (long k = 1; k <= n; ++k) {
    const double x = env.play(action, mu, rng).realized_reward;
    const double delta = x - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (x - mean);
  }
  const double var = m2 / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

std::vector<McEstimate> mc_triggering_freq(const Environment& env, const Action& action,
                                           std::span<const double> mu, long n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("need at least one play");
  std::vector<long> hits(static_cast<std::size_t>(env.num_arms()), 0);
  for (long k = 0; k < n; ++k) {
    for (int a : env.play(action, mu, rng).triggered) ++hits[static_cast<std::size_t>(a)];
  }
  std::vector<McEstimate> out;
  out.reserve(hits.size());
  for (long h : hits) {
    const double p = static_cast<double>(h) / static_cast<double>(n);
    out.push_back({p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))});
  }
  return out;
}

ContractReport contract_check(const Environment& env, const Action& action, std::span<const double> mu,
                              long n, Rng& rng, double z) {
  if (n < 2) throw std::invalid_argument("need at least two plays");
  env.validate_action(action);
  ContractReport rep;
  rep.action = action;
  rep.samples = n;

  const auto m = static_cast<std::size_t>(env.num_arms());
  std::vector<long> hits(m, 0);
  double mean = 0.0;
  double m2 = 0.0;
  for (long k = 1; k <= n; ++k) {
    const Feedback fb = env.play(action, mu, rng);
    for (int a : fb.triggered) ++hits[static_cast<std::size_t>(a)];
    const double delta = fb.realized_reward - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (fb.realized_reward - mean);
  }
  const double nn = static_cast<double>(n);

  ContractLine reward;
  reward.quantity = "reward";
  reward.analytic = env.expected_reward(action, mu);
  reward.estimate = mean;
  reward.std_error = std::sqrt(m2 / (nn - 1.0) / nn);
  reward.pass = std::abs(reward.estimate - reward.analytic) <= z * reward.std_error + 1e-9;
  rep.lines.push_back(reward);

  const auto probs = env.triggering_probs(action, mu);
  for (std::size_t i = 0; i < m; ++i) {
    ContractLine line;
    line.quantity = "trigger[" + std::to_string(i) + "]";
    line.analytic = probs[i];
    line.estimate = static_cast<double>(hits[i]) / nn;
    line.std_error = std::sqrt(std::max(0.0, probs[i] * (1.0 - probs[i])) / nn);
    line.pass = std::abs(line.estimate - line.analytic) <= z * line.std_error + 1e-12;
    rep.lines.push_back(line);
  }
  rep.pass = std::all_of(rep.lines.begin(), rep.lines.end(), [](const ContractLine& l) { return l.pass; });
  return rep;
}

nlohmann::json to_json(const ContractReport& report) {
  nlohmann::json j;
  j["action"] = report.action.arms;
  j["samples"] = report.samples;
  j["verdict"] = report.pass ? "pass" : "fail";
  auto& lines = j["lines"] = nlohmann::json::array();
  for (const auto& l : report.lines) {
    lines.push_back({{"quantity", l.quantity},
                     {"analytic", l.analytic},
                     {"estimate", l.estimate},
                     {"std_error", l.std_error},
                     {"pass", l.pass}});
  }
  return j;
}

}  // namespace c2mab
