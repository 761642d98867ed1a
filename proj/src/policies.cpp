#include "c2mab/policies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace c2mab {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::c2ucbt: return "c2ucbt";
    case PolicyKind::vac2ucb: return "vac2ucb";
    case PolicyKind::cucb: return "cucb";
    case PolicyKind::bcucbt: return "bcucbt";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(const std::string& name) {
  if (name == "c2ucbt") return PolicyKind::c2ucbt;
  if (name == "vac2ucb") return PolicyKind::vac2ucb;
  if (name == "cucb") return PolicyKind::cucb;
  if (name == "bcucbt") return PolicyKind::bcucbt;
  throw std::invalid_argument("unknown policy kind '" + name + "'");
}

PolicyConfig PolicyConfig::resolved(PolicyKind kind) const {
  PolicyConfig out = *this;
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (batch < 1) throw std::invalid_argument("batch size must be >= 1");
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!out.gamma) {
    out.gamma = kind == PolicyKind::vac2ucb ? 4.0 * batch : std::max(1.0, static_cast<double>(batch));
  }
  if (!out.delta) out.delta = 1.0 / static_cast<double>(horizon);
  if (!(*out.gamma > 0.0) || !std::isfinite(*out.gamma)) throw std::invalid_argument("gamma must be > 0");
  // delta = 1 is admitted so that 1/T stays valid at T = 1.
  if (!(*out.delta > 0.0 && *out.delta <= 1.0)) throw std::invalid_argument("delta must lie in (0, 1]");
  if (!(exploration_scale > 0.0) || !std::isfinite(exploration_scale)) {
    throw std::invalid_argument("exploration_scale must be > 0");
  }
  return out;
}

double c2ucbt_radius(const PolicyConfig& cfg) {
  const double gamma = cfg.gamma_value();
  const double d = cfg.dim;
  const double kt = static_cast<double>(cfg.batch) * static_cast<double>(cfg.horizon);
  const double inner = d * std::log1p(kt / (d * gamma)) - 2.0 * std::log(cfg.delta_value());
  return cfg.exploration_scale * (std::sqrt(inner) + std::sqrt(gamma));
}

double vac2ucb_radius(const PolicyConfig& cfg) {
  const double d = cfg.dim;
  const double log_n = d * (std::log(4.0) + 2.0 * std::log(d) + 4.0 * std::log(static_cast<double>(cfg.batch)) +
                            4.0 * std::log(static_cast<double>(cfg.horizon)));
  const double log_t = std::log(static_cast<double>(cfg.horizon));
  const double log_delta = std::log(cfg.delta_value());
  const double log6 = std::log(6.0) + log_t + log_n - log_delta;  // log(6TN/delta)
  const double log3 = std::log(3.0) + log_t + log_n - log_delta;  // log(3TN/delta)
  const double inner = log6 + std::log(log3);
  return cfg.exploration_scale * (1.0 + std::sqrt(cfg.gamma_value()) + 4.0 * std::sqrt(inner));
}

double optimistic_variance(double lcb, double ucb) {
  if (ucb <= 0.5) return (1.0 - ucb) * ucb;
  if (lcb >= 0.5) return (1.0 - lcb) * lcb;
  return 0.25;
}

void Policy::check_feedback(const Feedback& fb, int num_arms) const {
  if (fb.outcomes.size() != fb.triggered.size()) {
    throw std::invalid_argument("feedback outcomes do not match the triggered set");
  }
  for (int a : fb.triggered) {
    if (a < 0 || a >= num_arms) throw std::out_of_range("feedback references arm " + std::to_string(a));
  }
}

namespace {

void resize_estimates(ArmEstimates& est, int m) {
  const auto n = static_cast<std::size_t>(m);
  est.ucb.assign(n, 0.0);
  est.lcb.assign(n, 0.0);
  est.opt_var.assign(n, 0.25);
  est.width.assign(n, 0.0);
}

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

// Fills estimates for center +/- half_width * ||phi||_{G^-1}.
void linear_estimates(const RegressionState& state, const FeatureContext& ctx, double half_width,
                      ArmEstimates& est) {
  if (ctx.dim() != state.dim()) throw std::invalid_argument("context dimension mismatch");
  resize_estimates(est, ctx.num_arms());
  const Eigen::VectorXd center = ctx.features * state.theta();
  for (int i = 0; i < ctx.num_arms(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double w = state.ellipsoid_norm(ctx.features.row(i).transpose());
    est.width[k] = w;
    est.ucb[k] = clip01(center[i] + half_width * w);
    est.lcb[k] = clip01(center[i] - half_width * w);
    est.opt_var[k] = std::max(optimistic_variance(est.lcb[k], est.ucb[k]), kVarianceFloor);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

C2UcbT::C2UcbT(const PolicyConfig& cfg, Oracle oracle)
    : Policy(std::move(oracle)),
      cfg_(cfg.resolved(PolicyKind::c2ucbt)),
      radius_(c2ucbt_radius(cfg_)),
      state_(cfg_.dim, cfg_.gamma_value()) {}

Action C2UcbT::select(long, const FeatureContext& ctx) {
  linear_estimates(state_, ctx, radius_, est_);
  return oracle_(est_.ucb);
}

void C2UcbT::update(const FeatureContext& ctx, const Feedback& fb) {
  check_feedback(fb, ctx.num_arms());
  for (std::size_t j = 0; j < fb.triggered.size(); ++j) {
    state_.update(ctx.features.row(fb.triggered[j]).transpose(), fb.outcomes[j], 1.0);
  }
}

// ---------------------------------------------------------------------------

Vac2Ucb::Vac2Ucb(const PolicyConfig& cfg, Oracle oracle)
    : Policy(std::move(oracle)),
      cfg_(cfg.resolved(PolicyKind::vac2ucb)),
      radius_(vac2ucb_radius(cfg_)),
      state_(cfg_.dim, cfg_.gamma_value()) {}

Action Vac2Ucb::select(long, const FeatureContext& ctx) {
  linear_estimates(state_, ctx, 2.0 * radius_, est_);
  return oracle_(est_.ucb);
}

void Vac2Ucb::update(const FeatureContext& ctx, const Feedback& fb) {
  check_feedback(fb, ctx.num_arms());
  if (est_.opt_var.size() != static_cast<std::size_t>(ctx.num_arms())) {
    throw std::logic_error("update called before select");
  }
  for (std::size_t j = 0; j < fb.triggered.size(); ++j) {
    const int arm = fb.triggered[j];
    const double weight = 1.0 / est_.opt_var[static_cast<std::size_t>(arm)];
    state_.update(ctx.features.row(arm).transpose(), fb.outcomes[j], weight);
  }
}

// ---------------------------------------------------------------------------

CounterState::CounterState(int num_arms)
    : count(static_cast<std::size_t>(num_arms), 0),
      mean(static_cast<std::size_t>(num_arms), 0.0),
      m2(static_cast<std::size_t>(num_arms), 0.0) {}

void CounterState::observe(int arm, double x) {
  const auto k = static_cast<std::size_t>(arm);
  ++count[k];
  const double delta = x - mean[k];
  mean[k] += delta / static_cast<double>(count[k]);
  m2[k] += delta * (x - mean[k]);
}

double CounterState::variance(int arm) const {
  const auto k = static_cast<std::size_t>(arm);
  return count[k] > 0 ? std::max(0.0, m2[k] / static_cast<double>(count[k])) : 0.0;
}

namespace {

void counter_estimates(const CounterState& c, double scale, const std::function<double(int)>& bonus,
                       ArmEstimates& est) {
  const int m = static_cast<int>(c.count.size());
  resize_estimates(est, m);
  for (int i = 0; i < m; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (c.count[k] == 0) {
      est.ucb[k] = 1.0;
      est.lcb[k] = 0.0;
      est.width[k] = 1.0;
    } else {
      const double b = scale * bonus(i);
      est.width[k] = b;
      est.ucb[k] = clip01(c.mean[k] + b);
      est.lcb[k] = clip01(c.mean[k] - b);
    }
    est.opt_var[k] = std::max(optimistic_variance(est.lcb[k], est.ucb[k]), kVarianceFloor);
  }
}

void counter_update(CounterState& c, const Feedback& fb) {
  for (std::size_t j = 0; j < fb.triggered.size(); ++j) c.observe(fb.triggered[j], fb.outcomes[j]);
}

}  // namespace

Cucb::Cucb(int num_arms, const PolicyConfig& cfg, Oracle oracle)
    : Policy(std::move(oracle)), scale_(cfg.resolved(PolicyKind::cucb).exploration_scale), counters_(num_arms) {}

double Cucb::bonus(double round, long count) {
  return std::sqrt(3.0 * std::log(round) / (2.0 * static_cast<double>(count)));
}

Action Cucb::select(long round, const FeatureContext&) {
  counters_.round = round;
  counter_estimates(counters_, scale_, [&](int i) { return bonus(static_cast<double>(round), counters_.count[static_cast<std::size_t>(i)]); },
                    est_);
  return oracle_(est_.ucb);
}

void Cucb::update(const FeatureContext&, const Feedback& fb) {
  check_feedback(fb, static_cast<int>(counters_.count.size()));
  counter_update(counters_, fb);
}

BcucbT::BcucbT(int num_arms, const PolicyConfig& cfg, Oracle oracle)
    : Policy(std::move(oracle)), scale_(cfg.resolved(PolicyKind::bcucbt).exploration_scale), counters_(num_arms) {}

double BcucbT::bonus(double round, long count, double variance) {
  const double log_t = std::log(round);
  const double n = static_cast<double>(count);
  return std::sqrt(6.0 * variance * log_t / n) + 9.0 * log_t / n;
}

Action BcucbT::select(long round, const FeatureContext&) {
  counters_.round = round;
  counter_estimates(
      counters_, scale_,
      [&](int i) { return bonus(static_cast<double>(round), counters_.count[static_cast<std::size_t>(i)], counters_.variance(i)); },
      est_);
  return oracle_(est_.ucb);
}

void BcucbT::update(const FeatureContext&, const Feedback& fb) {
  check_feedback(fb, static_cast<int>(counters_.count.size()));
  counter_update(counters_, fb);
}

std::unique_ptr<Policy> make_policy(PolicyKind kind, const PolicyConfig& cfg, int num_arms,
                                    Oracle oracle) {
  switch (kind) {
    case PolicyKind::c2ucbt: return std::make_unique<C2UcbT>(cfg, std::move(oracle));
    case PolicyKind::vac2ucb: return std::make_unique<Vac2Ucb>(cfg, std::move(oracle));
    case PolicyKind::cucb: return std::make_unique<Cucb>(num_arms, cfg, std::move(oracle));
    case PolicyKind::bcucbt: return std::make_unique<BcucbT>(num_arms, cfg, std::move(oracle));
  }
  throw std::invalid_argument("unknown policy kind");
}

}  // namespace c2mab
