#include "sliceorch/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace sliceorch {

using nlohmann::json;

namespace {
constexpr double kPi = 3.14159265358979323846;

void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& context) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw ConfigError("unknown key \"" + it.key() + "\" in " + context);
    }
  }
}

double require_number(const json& obj, const std::string& key, const std::string& context) {
  if (!obj.contains(key)) throw ConfigError("missing key \"" + key + "\" in " + context);
  if (!obj[key].is_number()) throw ConfigError("key \"" + key + "\" in " + context + " must be a number");
  return obj[key].get<double>();
}
}  // namespace

const char* domain_name(Domain d) {
  switch (d) {
    case Domain::RAN: return "RAN";
    case Domain::TN: return "TN";
    case Domain::CN: return "CN";
    case Domain::EDGE: return "EDGE";
  }
  return "?";
}

Domain domain_from_name(const std::string& name) {
  if (name == "RAN") return Domain::RAN;
  if (name == "TN") return Domain::TN;
  if (name == "CN") return Domain::CN;
  if (name == "EDGE") return Domain::EDGE;
  throw ConfigError("unknown domain \"" + name + "\" (expected RAN, TN, CN or EDGE)");
}

void ScenarioConfig::apply_defaults() {
  if (weights.empty()) weights.assign(domains.size(), 1.0);
  if (decomp_weights.empty()) decomp_weights.assign(domains.size(), 1.0);
}

void ScenarioConfig::validate() const {
  if (slices.empty()) throw ConfigError("scenario needs at least one slice");
  if (domains.empty() || domains.size() > 4)
    throw ConfigError("scenario needs between 1 and 4 domains");
  for (size_t i = 0; i < domains.size(); ++i) {
    const auto& d = domains[i];
    if (d.capacity <= 0.0)
      throw ConfigError(std::string("domain ") + domain_name(d.id) + ": capacity must be > 0");
    if (d.service_rate <= 0.0)
      throw ConfigError(std::string("domain ") + domain_name(d.id) + ": service_rate must be > 0");
    if (i > 0 && static_cast<int>(d.id) <= static_cast<int>(domains[i - 1].id))
      throw ConfigError("domains must be distinct and listed in chain order RAN, TN, CN, EDGE");
  }
  for (const auto& s : slices) {
    std::string ctx = "slice " + std::to_string(s.id);
    if (s.latency_bound <= 0.0) throw ConfigError(ctx + ": latency_bound must be > 0");
    if (s.min_throughput < 0.0) throw ConfigError(ctx + ": min_throughput must be >= 0");
    if (s.traffic.base_rate < 0.0) throw ConfigError(ctx + ": traffic.base_rate must be >= 0");
    if (s.traffic.amplitude < 0.0) throw ConfigError(ctx + ": traffic.amplitude must be >= 0");
    if (s.traffic.period <= 0.0) throw ConfigError(ctx + ": traffic.period must be > 0");
    if (s.traffic.noise_std < 0.0) throw ConfigError(ctx + ": traffic.noise_std must be >= 0");
  }
  if (weights.size() != domains.size())
    throw ConfigError("weights must have one entry per domain");
  for (double w : weights)
    if (w <= 0.0) throw ConfigError("weights must be > 0");
  if (decomp_weights.size() != domains.size())
    throw ConfigError("decomp_weights must have one entry per domain");
  for (double w : decomp_weights)
    if (w <= 0.0) throw ConfigError("decomp_weights must be > 0");
  if (!assignments.empty()) {
    std::vector<int> seen(domains.size(), 0);
    for (const auto& group : assignments) {
      if (group.empty()) throw ConfigError("assignment groups must be non-empty");
      for (int d : group) {
        if (d < 0 || d >= static_cast<int>(domains.size()))
          throw ConfigError("assignment references domain index " + std::to_string(d) +
                            " outside the scenario");
        ++seen[d];
      }
    }
    for (size_t d = 0; d < seen.size(); ++d)
      if (seen[d] != 1)
        throw ConfigError(std::string("assignments must partition the domains; ") +
                          domain_name(domains[d].id) + " is covered " +
                          std::to_string(seen[d]) + " times");
  }
  if (l_max <= 0.0) throw ConfigError("l_max must be > 0");
  if (headroom <= 1.0) throw ConfigError("headroom must be > 1");
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario parse error: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("scenario root must be a JSON object");
  reject_unknown_keys(root,
                      {"domains", "slices", "l_max", "headroom", "weights",
                       "decomp_weights", "assignments"},
                      "scenario");

  ScenarioConfig cfg;
  if (!root.contains("domains") || !root["domains"].is_array())
    throw ConfigError("scenario requires a \"domains\" array");
  for (const auto& jd : root["domains"]) {
    std::string ctx = "domains[" + std::to_string(cfg.domains.size()) + "]";
    reject_unknown_keys(jd, {"id", "capacity", "service_rate"}, ctx);
    DomainSpec d;
    if (!jd.contains("id") || !jd["id"].is_string())
      throw ConfigError(ctx + " requires a string \"id\"");
    d.id = domain_from_name(jd["id"].get<std::string>());
    d.capacity = require_number(jd, "capacity", ctx);
    d.service_rate = require_number(jd, "service_rate", ctx);
    cfg.domains.push_back(d);
  }
  if (!root.contains("slices") || !root["slices"].is_array())
    throw ConfigError("scenario requires a \"slices\" array");
  for (const auto& js : root["slices"]) {
    std::string ctx = "slices[" + std::to_string(cfg.slices.size()) + "]";
    reject_unknown_keys(js, {"id", "latency_bound", "min_throughput", "traffic"}, ctx);
    SliceSpec s;
    s.id = static_cast<int>(require_number(js, "id", ctx));
    s.latency_bound = require_number(js, "latency_bound", ctx);
    s.min_throughput = require_number(js, "min_throughput", ctx);
    if (!js.contains("traffic") || !js["traffic"].is_object())
      throw ConfigError(ctx + " requires a \"traffic\" object");
    const auto& jt = js["traffic"];
    reject_unknown_keys(jt, {"base_rate", "amplitude", "period", "noise_std"}, ctx + ".traffic");
    s.traffic.base_rate = require_number(jt, "base_rate", ctx + ".traffic");
    s.traffic.amplitude = require_number(jt, "amplitude", ctx + ".traffic");
    s.traffic.period = require_number(jt, "period", ctx + ".traffic");
    s.traffic.noise_std = require_number(jt, "noise_std", ctx + ".traffic");
    cfg.slices.push_back(s);
  }
  if (root.contains("l_max")) cfg.l_max = require_number(root, "l_max", "scenario");
  if (root.contains("headroom")) cfg.headroom = require_number(root, "headroom", "scenario");
  if (root.contains("weights")) {
    if (!root["weights"].is_array()) throw ConfigError("\"weights\" must be an array");
    for (const auto& w : root["weights"]) cfg.weights.push_back(w.get<double>());
  } else {
    cfg.weights.assign(cfg.domains.size(), 1.0);
  }
  if (root.contains("decomp_weights")) {
    if (!root["decomp_weights"].is_array())
      throw ConfigError("\"decomp_weights\" must be an array");
    for (const auto& w : root["decomp_weights"]) cfg.decomp_weights.push_back(w.get<double>());
  } else {
    cfg.decomp_weights.assign(cfg.domains.size(), 1.0);
  }
  if (root.contains("assignments")) {
    if (!root["assignments"].is_array()) throw ConfigError("\"assignments\" must be an array");
    for (const auto& group : root["assignments"]) {
      if (!group.is_array()) throw ConfigError("each assignment must be an array of domain names");
      std::vector<int> cols;
      for (const auto& name : group) {
        Domain id = domain_from_name(name.get<std::string>());
        int col = -1;
        for (size_t d = 0; d < cfg.domains.size(); ++d)
          if (cfg.domains[d].id == id) col = static_cast<int>(d);
        if (col < 0)
          throw ConfigError("assignment names domain " + name.get<std::string>() +
                            " which is not in the scenario");
        cols.push_back(col);
      }
      cfg.assignments.push_back(std::move(cols));
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_json_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string ScenarioConfig::to_json_text() const {
  json root;
  root["domains"] = json::array();
  for (const auto& d : domains) {
    root["domains"].push_back(
        {{"id", domain_name(d.id)}, {"capacity", d.capacity}, {"service_rate", d.service_rate}});
  }
  root["slices"] = json::array();
  for (const auto& s : slices) {
    root["slices"].push_back({{"id", s.id},
                              {"latency_bound", s.latency_bound},
                              {"min_throughput", s.min_throughput},
                              {"traffic",
                               {{"base_rate", s.traffic.base_rate},
                                {"amplitude", s.traffic.amplitude},
                                {"period", s.traffic.period},
                                {"noise_std", s.traffic.noise_std}}}});
  }
  root["l_max"] = l_max;
  root["headroom"] = headroom;
  root["weights"] = weights;
  root["decomp_weights"] = decomp_weights;
  if (!assignments.empty()) {
    json ja = json::array();
    for (const auto& group : assignments) {
      json jg = json::array();
      for (int d : group) jg.push_back(domain_name(domains[d].id));
      ja.push_back(jg);
    }
    root["assignments"] = ja;
  }
  return root.dump(2);
}

std::uint64_t ScenarioConfig::hash() const {
  // FNV-1a over the canonical JSON text
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : to_json_text()) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::vector<double> NetworkState::observation() const {
  std::vector<double> obs;
  obs.reserve(rates.data().size() + backlogs.data().size());
  obs.insert(obs.end(), rates.data().begin(), rates.data().end());
  obs.insert(obs.end(), backlogs.data().begin(), backlogs.data().end());
  return obs;
}

bool AllocationAction::feasible(double tol) const {
  for (double v : shares.data())
    if (!std::isfinite(v) || v < -tol || v > 1.0 + tol) return false;
  for (int d = 0; d < shares.cols(); ++d) {
    double sum = 0.0;
    for (int k = 0; k < shares.rows(); ++k) sum += shares(k, d);
    if (sum > 1.0 + tol) return false;
  }
  return true;
}

double reward_fn(const AllocationAction& action, const std::vector<double>& weights) {
  if (static_cast<int>(weights.size()) != action.shares.cols())
    throw DimensionError("reward_fn: one weight per domain required");
  double usage = 0.0;
  for (int d = 0; d < action.shares.cols(); ++d) {
    double col = 0.0;
    for (int k = 0; k < action.shares.rows(); ++k) col += action.shares(k, d);
    usage += weights[d] * col;
  }
  return -usage;
}

double cost_fn(const std::vector<double>& latencies,
               const std::vector<double>& throughputs,
               const std::vector<SliceSpec>& specs) {
  if (latencies.size() != specs.size() || throughputs.size() != specs.size())
    throw DimensionError("cost_fn: one latency/throughput entry per slice required");
  double worst = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < specs.size(); ++k) {
    double lat_margin = (latencies[k] - specs[k].latency_bound) / specs[k].latency_bound;
    double tp_margin = (specs[k].min_throughput - throughputs[k]) /
                       std::max(specs[k].min_throughput, kThroughputEps);
    worst = std::max(worst, std::max(lat_margin, tp_margin));
  }
  return worst;
}

SliceEnv::SliceEnv(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.apply_defaults();
  cfg_.validate();
  state_.rates = Matrix(cfg_.num_slices(), cfg_.num_domains());
  state_.backlogs = Matrix(cfg_.num_slices(), cfg_.num_domains());
}

void SliceEnv::sample_rates(NetworkState& s) const {
  for (int k = 0; k < cfg_.num_slices(); ++k) {
    const TrafficModel& tm = cfg_.slices[k].traffic;
    double rate = tm.base_rate + tm.amplitude * std::sin(2.0 * kPi * s.t / tm.period);
    if (tm.noise_std > 0.0) rate += tm.noise_std * rng_.normal();
    rate = std::max(0.0, rate);
    for (int d = 0; d < cfg_.num_domains(); ++d) s.rates(k, d) = rate;
  }
}

NetworkState SliceEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  state_.t = 0;
  state_.rates = Matrix(cfg_.num_slices(), cfg_.num_domains());
  state_.backlogs = Matrix(cfg_.num_slices(), cfg_.num_domains());
  sample_rates(state_);
  return state_;
}

double SliceEnv::effective_arrival(const NetworkState& s, int k, int d) const {
  double eff = s.rates(k, d) + s.backlogs(k, d) / kSlotSeconds;
  return std::min(eff, cfg_.domains[d].full_rate());
}

StepOutcome SliceEnv::step(const AllocationAction& action) {
  const int K = cfg_.num_slices();
  const int D = cfg_.num_domains();
  if (action.shares.rows() != K || action.shares.cols() != D)
    throw DimensionError("step: action shape does not match scenario");
  if (!action.feasible())
    throw FeasibilityError("step: action violates capacity constraints");

  StepOutcome out;
  out.domain_latency = Matrix(K, D);
  out.per_slice_latency.assign(K, 0.0);
  out.per_slice_throughput.assign(K, 0.0);

  NetworkState next = state_;
  for (int k = 0; k < K; ++k) {
    double tp = std::numeric_limits<double>::infinity();
    for (int d = 0; d < D; ++d) {
      double eff = effective_arrival(state_, k, d);
      double mu = cfg_.domains[d].full_rate() * action.shares(k, d);
      double lat = (mu > eff) ? std::min(1.0 / (mu - eff), cfg_.l_max) : cfg_.l_max;
      double served = std::min(eff, mu);
      out.domain_latency(k, d) = lat;
      out.per_slice_latency[k] += lat;
      tp = std::min(tp, served);
      next.backlogs(k, d) =
          std::max(0.0, state_.backlogs(k, d) + (state_.rates(k, d) - served) * kSlotSeconds);
    }
    out.per_slice_throughput[k] = tp;
  }
  next.t = state_.t + 1;
  sample_rates(next);

  out.reward = reward_fn(action, cfg_.weights);
  out.cost = cost_fn(out.per_slice_latency, out.per_slice_throughput, cfg_.slices);
  out.sla_violated = out.cost >= 0.0;
  out.next_state = next;
  state_ = next;
  return out;
}

BaselineResult SliceEnv::baseline_policy(const NetworkState& state) const {
  const int K = cfg_.num_slices();
  const int D = cfg_.num_domains();
  BaselineResult res;
  res.action.shares = Matrix(K, D);
  for (int k = 0; k < K; ++k) {
    double budget = cfg_.slices[k].latency_bound / D;  // even per-domain split
    for (int d = 0; d < D; ++d) {
      double full = cfg_.domains[d].full_rate();
      double lam = std::max(effective_arrival(state, k, d), cfg_.slices[k].min_throughput);
      double raw = (1.0 / budget + lam) / full;
      res.action.shares(k, d) = std::min(1.0, cfg_.headroom * raw);
    }
  }
  for (int d = 0; d < D; ++d) {
    double sum = 0.0;
    for (int k = 0; k < K; ++k) sum += res.action.shares(k, d);
    if (sum > 1.0) {
      res.saturated = true;
      for (int k = 0; k < K; ++k) res.action.shares(k, d) /= sum;
    }
  }
  return res;
}

}  // namespace sliceorch
