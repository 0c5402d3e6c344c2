#ifndef SLICEORCH_NEURAL_HPP_
#define SLICEORCH_NEURAL_HPP_

#include <string>
#include <vector>

#include "sliceorch/common.hpp"

namespace sliceorch {

// Fully-connected network with tanh hidden layers and a linear output
// layer. Parameters live in one flat vector: per layer, weights row-major
// [out][in] followed by biases [out].
class ParamFunction {
 public:
  ParamFunction() = default;
  explicit ParamFunction(std::vector<int> layer_sizes);

  static int param_count(const std::vector<int>& layer_sizes);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  int input_dim() const { return layer_sizes_.front(); }
  int output_dim() const { return layer_sizes_.back(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // Glorot-uniform weights, zero biases.
  void init(Rng& rng);

  std::vector<double> forward(const std::vector<double>& x) const;

  // Gradient of <upstream, output> with respect to the flat parameters.
  // Matches central finite differences to relative error < 1e-4.
  std::vector<double> backward(const std::vector<double>& x,
                               const std::vector<double>& upstream) const;

 private:
  std::vector<int> layer_sizes_;
  std::vector<double> params_;
};

// Diagonal Gaussian over raw (unconstrained) actions. Feasibility is
// enforced afterwards by project_action; logp refers to the raw action.
struct GaussianPolicy {
  ParamFunction mean_net;
  std::vector<double> log_std;

  static constexpr double kLogStdMin = -5.0;
  static constexpr double kLogStdMax = 2.0;

  GaussianPolicy() = default;
  GaussianPolicy(std::vector<int> layer_sizes, double init_log_std, Rng& rng);

  int action_dim() const { return mean_net.output_dim(); }
  std::vector<double> mean(const std::vector<double>& state_vec) const;
  std::vector<double> stds() const;
  void clamp_log_std();
};

struct ExplorationConfig {
  double sigma = 0.3;  // used when sampling without a learned std
  double H = 0.5;      // max allowed deviation, applied per dimension

  void validate() const {
    if (sigma < 0.0) throw ConfigError("exploration sigma must be >= 0");
    if (H <= 0.0) throw ConfigError("exploration H must be > 0");
  }
};

struct SampledAction {
  std::vector<double> raw;
  std::vector<double> noise;  // pre-clip Gaussian perturbation
  double logp = 0.0;
};

// raw = mean + sigma * z with z ~ N(0, I); logp is the exact Gaussian
// log-density of raw under (mean, sigma).
SampledAction sample_action(const GaussianPolicy& policy,
                            const std::vector<double>& state_vec, Rng& rng);

double gaussian_logp(const std::vector<double>& raw, const std::vector<double>& mean,
                     const std::vector<double>& stds);

// d logp / d mean_i = (raw_i - mean_i) / std_i^2
std::vector<double> gaussian_logp_grad_mean(const std::vector<double>& raw,
                                            const std::vector<double>& mean,
                                            const std::vector<double>& stds);

// d logp / d log_std_i = ((raw_i - mean_i) / std_i)^2 - 1
std::vector<double> gaussian_logp_grad_log_std(const std::vector<double>& raw,
                                               const std::vector<double>& mean,
                                               const std::vector<double>& stds);

// Elementwise base + clip(noise, -H, H).
std::vector<double> clip_exploration(const std::vector<double>& base,
                                     const std::vector<double>& noise,
                                     const ExplorationConfig& cfg);

// Logistic squash to [0,1], then per-domain column renormalization when a
// column sum exceeds 1. raw is slice-major, domain-minor.
Matrix project_action(const std::vector<double>& raw, int num_slices, int num_domains);

// Jacobian-vector product: given dL/d(shares) (flat, slice-major), return
// dL/d(raw) through the squash and conditional renormalization.
std::vector<double> project_action_backward(const std::vector<double>& raw,
                                            const std::vector<double>& grad_shares,
                                            int num_slices, int num_domains);

enum class OptKind { Adam, Sgd };

struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

// In-place parameter update. Returns false (and leaves params untouched)
// when the gradient contains non-finite entries.
bool grad_step(std::vector<double>& params, const std::vector<double>& grads,
               OptimizerState& state, double lr, OptKind kind = OptKind::Adam);

// Versioned little-endian binary checkpoint: magic, layer sizes, flat
// float64 parameters, one optional extra array (used for log_std).
void save_checkpoint(const std::string& path, const ParamFunction& f,
                     const std::vector<double>& extra = {});
void load_checkpoint(const std::string& path, ParamFunction& f, std::vector<double>& extra);

void save_policy(const std::string& path, const GaussianPolicy& policy);
GaussianPolicy load_policy(const std::string& path);

}  // namespace sliceorch

#endif  // SLICEORCH_NEURAL_HPP_
