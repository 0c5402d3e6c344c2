#include "sliceorch/neural.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace sliceorch {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;  // ln(2*pi)

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

ParamFunction::ParamFunction(std::vector<int> layer_sizes)
    : layer_sizes_(std::move(layer_sizes)) {
  if (layer_sizes_.size() < 2) throw ConfigError("ParamFunction needs >= 2 layer sizes");
  for (int s : layer_sizes_)
    if (s <= 0) throw ConfigError("ParamFunction layer sizes must be > 0");
  params_.assign(param_count(layer_sizes_), 0.0);
}

int ParamFunction::param_count(const std::vector<int>& layer_sizes) {
  int n = 0;
  for (size_t l = 0; l + 1 < layer_sizes.size(); ++l)
    n += (layer_sizes[l] + 1) * layer_sizes[l + 1];
  return n;
}

void ParamFunction::init(Rng& rng) {
  size_t p = 0;
  for (size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    int fan_in = layer_sizes_[l];
    int fan_out = layer_sizes_[l + 1];
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (int i = 0; i < fan_in * fan_out; ++i) params_[p++] = rng.uniform(-bound, bound);
    for (int i = 0; i < fan_out; ++i) params_[p++] = 0.0;
  }
}

std::vector<double> ParamFunction::forward(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != input_dim())
    throw DimensionError("forward: input has size " + std::to_string(x.size()) +
                         ", expected " + std::to_string(input_dim()));
  std::vector<double> act = x;
  size_t p = 0;
  for (size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    int in = layer_sizes_[l];
    int out = layer_sizes_[l + 1];
    std::vector<double> next(out);
    for (int o = 0; o < out; ++o) {
      double z = params_[p + static_cast<size_t>(in) * out + o];  // bias
      const double* w = &params_[p + static_cast<size_t>(o) * in];
      for (int i = 0; i < in; ++i) z += w[i] * act[i];
      next[o] = (l + 2 < layer_sizes_.size()) ? std::tanh(z) : z;
    }
    p += static_cast<size_t>(in + 1) * out;
    act = std::move(next);
  }
  return act;
}

std::vector<double> ParamFunction::backward(const std::vector<double>& x,
                                            const std::vector<double>& upstream) const {
  if (static_cast<int>(x.size()) != input_dim())
    throw DimensionError("backward: input dimension mismatch");
  if (static_cast<int>(upstream.size()) != output_dim())
    throw DimensionError("backward: upstream dimension mismatch");

  const size_t n_layers = layer_sizes_.size() - 1;
  // forward pass, keeping post-activation values per layer
  std::vector<std::vector<double>> acts(n_layers + 1);
  acts[0] = x;
  std::vector<size_t> offsets(n_layers);
  size_t p = 0;
  for (size_t l = 0; l < n_layers; ++l) {
    offsets[l] = p;
    int in = layer_sizes_[l];
    int out = layer_sizes_[l + 1];
    acts[l + 1].resize(out);
    for (int o = 0; o < out; ++o) {
      double z = params_[p + static_cast<size_t>(in) * out + o];
      const double* w = &params_[p + static_cast<size_t>(o) * in];
      for (int i = 0; i < in; ++i) z += w[i] * acts[l][i];
      acts[l + 1][o] = (l + 1 < n_layers) ? std::tanh(z) : z;
    }
    p += static_cast<size_t>(in + 1) * out;
  }

  std::vector<double> grads(params_.size(), 0.0);
  std::vector<double> delta = upstream;  // d<upstream,out>/d(pre-activation)
  for (size_t l = n_layers; l-- > 0;) {
    int in = layer_sizes_[l];
    int out = layer_sizes_[l + 1];
    size_t off = offsets[l];
    // on hidden layers delta arrives in post-activation terms
    if (l + 1 < n_layers) {
      for (int o = 0; o < out; ++o) {
        double a = acts[l + 1][o];
        delta[o] *= (1.0 - a * a);
      }
    }
    for (int o = 0; o < out; ++o) {
      double* gw = &grads[off + static_cast<size_t>(o) * in];
      for (int i = 0; i < in; ++i) gw[i] = delta[o] * acts[l][i];
      grads[off + static_cast<size_t>(in) * out + o] = delta[o];  // bias
    }
    if (l > 0) {
      std::vector<double> prev(in, 0.0);
      for (int o = 0; o < out; ++o) {
        const double* w = &params_[off + static_cast<size_t>(o) * in];
        for (int i = 0; i < in; ++i) prev[i] += delta[o] * w[i];
      }
      delta = std::move(prev);
    }
  }
  return grads;
}

GaussianPolicy::GaussianPolicy(std::vector<int> layer_sizes, double init_log_std, Rng& rng)
    : mean_net(std::move(layer_sizes)), log_std(mean_net.output_dim(), init_log_std) {
  mean_net.init(rng);
  clamp_log_std();
}

std::vector<double> GaussianPolicy::mean(const std::vector<double>& state_vec) const {
  return mean_net.forward(state_vec);
}

std::vector<double> GaussianPolicy::stds() const {
  std::vector<double> s(log_std.size());
  for (size_t i = 0; i < log_std.size(); ++i)
    s[i] = std::exp(clamp(log_std[i], kLogStdMin, kLogStdMax));
  return s;
}

void GaussianPolicy::clamp_log_std() {
  for (double& v : log_std) v = clamp(v, kLogStdMin, kLogStdMax);
}

SampledAction sample_action(const GaussianPolicy& policy,
                            const std::vector<double>& state_vec, Rng& rng) {
  SampledAction sa;
  std::vector<double> mu = policy.mean(state_vec);
  std::vector<double> sd = policy.stds();
  sa.raw.resize(mu.size());
  sa.noise.resize(mu.size());
  for (size_t i = 0; i < mu.size(); ++i) {
    sa.noise[i] = sd[i] * rng.normal();
    sa.raw[i] = mu[i] + sa.noise[i];
  }
  sa.logp = gaussian_logp(sa.raw, mu, sd);
  return sa;
}

double gaussian_logp(const std::vector<double>& raw, const std::vector<double>& mean,
                     const std::vector<double>& stds) {
  if (raw.size() != mean.size() || raw.size() != stds.size())
    throw DimensionError("gaussian_logp: dimension mismatch");
  double lp = 0.0;
  for (size_t i = 0; i < raw.size(); ++i) {
    double z = (raw[i] - mean[i]) / stds[i];
    lp += -0.5 * z * z - std::log(stds[i]) - 0.5 * kLog2Pi;
  }
  return lp;
}

std::vector<double> gaussian_logp_grad_mean(const std::vector<double>& raw,
                                            const std::vector<double>& mean,
                                            const std::vector<double>& stds) {
  std::vector<double> g(raw.size());
  for (size_t i = 0; i < raw.size(); ++i)
    g[i] = (raw[i] - mean[i]) / (stds[i] * stds[i]);
  return g;
}

std::vector<double> gaussian_logp_grad_log_std(const std::vector<double>& raw,
                                               const std::vector<double>& mean,
                                               const std::vector<double>& stds) {
  std::vector<double> g(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    double z = (raw[i] - mean[i]) / stds[i];
    g[i] = z * z - 1.0;
  }
  return g;
}

std::vector<double> clip_exploration(const std::vector<double>& base,
                                     const std::vector<double>& noise,
                                     const ExplorationConfig& cfg) {
  if (base.size() != noise.size())
    throw DimensionError("clip_exploration: dimension mismatch");
  cfg.validate();
  std::vector<double> out(base.size());
  for (size_t i = 0; i < base.size(); ++i)
    out[i] = base[i] + clamp(noise[i], -cfg.H, cfg.H);
  return out;
}

Matrix project_action(const std::vector<double>& raw, int num_slices, int num_domains) {
  if (static_cast<int>(raw.size()) != num_slices * num_domains)
    throw DimensionError("project_action: raw vector length must be slices * domains");
  Matrix shares(num_slices, num_domains);
  for (int k = 0; k < num_slices; ++k)
    for (int d = 0; d < num_domains; ++d)
      shares(k, d) = sigmoid(raw[static_cast<size_t>(k) * num_domains + d]);
  for (int d = 0; d < num_domains; ++d) {
    double sum = 0.0;
    for (int k = 0; k < num_slices; ++k) sum += shares(k, d);
    if (sum > 1.0)
      for (int k = 0; k < num_slices; ++k) shares(k, d) /= sum;
  }
  return shares;
}

std::vector<double> project_action_backward(const std::vector<double>& raw,
                                            const std::vector<double>& grad_shares,
                                            int num_slices, int num_domains) {
  if (raw.size() != grad_shares.size() ||
      static_cast<int>(raw.size()) != num_slices * num_domains)
    throw DimensionError("project_action_backward: dimension mismatch");
  std::vector<double> grad_raw(raw.size(), 0.0);
  for (int d = 0; d < num_domains; ++d) {
    std::vector<double> s(num_slices), ds(num_slices);
    double sum = 0.0;
    for (int k = 0; k < num_slices; ++k) {
      double v = sigmoid(raw[static_cast<size_t>(k) * num_domains + d]);
      s[k] = v;
      ds[k] = v * (1.0 - v);  // d sigmoid / d raw
      sum += v;
    }
    for (int k = 0; k < num_slices; ++k) {
      double g = 0.0;
      if (sum > 1.0) {
        // a_i = s_i / sum; da_i/ds_k = delta_ik/sum - s_i/sum^2
        for (int i = 0; i < num_slices; ++i) {
          double jac = (i == k ? 1.0 / sum : 0.0) - s[i] / (sum * sum);
          g += grad_shares[static_cast<size_t>(i) * num_domains + d] * jac;
        }
      } else {
        g = grad_shares[static_cast<size_t>(k) * num_domains + d];
      }
      grad_raw[static_cast<size_t>(k) * num_domains + d] = g * ds[k];
    }
  }
  return grad_raw;
}

bool grad_step(std::vector<double>& params, const std::vector<double>& grads,
               OptimizerState& state, double lr, OptKind kind) {
  if (params.size() != grads.size())
    throw DimensionError("grad_step: parameter/gradient length mismatch");
  if (!all_finite(grads)) return false;

  if (kind == OptKind::Sgd) {
    for (size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
    ++state.step;
    return true;
  }

  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.step = 0;
  }
  ++state.step;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grads[i] * grads[i];
    double mhat = state.m[i] / bc1;
    double vhat = state.v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
  return true;
}

namespace {
constexpr char kMagic[4] = {'S', 'L', 'C', 'H'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ConfigError("checkpoint: truncated file");
  return v;
}
}  // namespace

void save_checkpoint(const std::string& path, const ParamFunction& f,
                     const std::vector<double>& extra) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open checkpoint for writing: " + path);
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint32_t>(f.layer_sizes().size()));
  for (int s : f.layer_sizes()) write_pod(out, static_cast<std::uint32_t>(s));
  write_pod(out, static_cast<std::uint64_t>(f.params().size()));
  for (double v : f.params()) write_pod(out, v);
  write_pod(out, static_cast<std::uint64_t>(extra.size()));
  for (double v : extra) write_pod(out, v);
}

void load_checkpoint(const std::string& path, ParamFunction& f, std::vector<double>& extra) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw ConfigError(path + ": not a sliceorch checkpoint");
  if (read_pod<std::uint32_t>(in) != kVersion)
    throw ConfigError(path + ": unsupported checkpoint version");
  auto n_sizes = read_pod<std::uint32_t>(in);
  std::vector<int> sizes(n_sizes);
  for (auto& s : sizes) s = static_cast<int>(read_pod<std::uint32_t>(in));
  if (!f.layer_sizes().empty() && f.layer_sizes() != sizes)
    throw ConfigError(path + ": checkpoint layer sizes do not match the target network");
  ParamFunction loaded(sizes);
  auto n_params = read_pod<std::uint64_t>(in);
  if (n_params != loaded.params().size())
    throw ConfigError(path + ": parameter count does not match layer sizes");
  for (auto& v : loaded.params()) v = read_pod<double>(in);
  auto n_extra = read_pod<std::uint64_t>(in);
  extra.resize(n_extra);
  for (auto& v : extra) v = read_pod<double>(in);
  f = std::move(loaded);
}

void save_policy(const std::string& path, const GaussianPolicy& policy) {
  save_checkpoint(path, policy.mean_net, policy.log_std);
}

GaussianPolicy load_policy(const std::string& path) {
  GaussianPolicy p;
  load_checkpoint(path, p.mean_net, p.log_std);
  if (static_cast<int>(p.log_std.size()) != p.mean_net.output_dim())
    throw ConfigError(path + ": log_std length does not match the action dimension");
  p.clamp_log_std();
  return p;
}

}  // namespace sliceorch
