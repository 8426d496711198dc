#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bidlab/nn/graph.hpp"
#include "bidlab/nn/params.hpp"
#include "bidlab/nn/tensor.hpp"
#include "bidlab/rng.hpp"

namespace bidlab::nn {

/// Minibatch of equal-length trajectories laid out step-major:
/// obs[(step * batch + row) * obs_dim + j].
struct UnrollBatch {
  int batch = 0;
  int steps = 0;
  int obs_dim = 0;
  int action_dim = 0;
  std::vector<double> obs;
  std::vector<double> actions;
  std::vector<double> scaled_budget;  ///< one head side-input per row

  double* obs_at(int step, int row) {
    return &obs[(static_cast<size_t>(step) * batch + row) * obs_dim];
  }
  double* action_at(int step, int row) {
    return &actions[(static_cast<size_t>(step) * batch + row) * action_dim];
  }
};

struct UnrollNodes {
  std::vector<int> logp;   ///< per step: (batch x 1)
  std::vector<int> value;  ///< per step: (batch x 1)
  int entropy = -1;        ///< (1 x 1)
  int log_sigma = -1;      ///< (1 x 1) leaf
  BoundParams bound;       ///< parameter leaves, in store order
};

/// Differentiable actor-critic evaluated over trajectory minibatches. The
/// same arithmetic backs the step-by-step rollout helpers, so log-densities
/// recomputed during training match the ones stored at collection time.
class TrainablePolicy {
 public:
  virtual ~TrainablePolicy() = default;
  virtual ParamStore& params() = 0;
  virtual const ParamStore& params() const = 0;
  virtual int obs_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual UnrollNodes unroll(Graph& graph, const UnrollBatch& batch) const = 0;
  virtual std::vector<std::pair<std::string, std::string>> checkpoint_meta() const = 0;
};

struct Heads {
  std::vector<double> mean;
  double sigma = 0.0;
  double log_sigma = 0.0;
  double value = 0.0;
};

/// Log-density of `action` under N(mean, sigma^2 I), given log sigma.
/// Matches the graph-side computation bit for bit.
double gaussian_log_prob(std::span<const double> action, std::span<const double> mean,
                         double log_sigma);

struct PolicySizes {
  int m = 6;               ///< action dimension = stage count
  int enc_out = 64;
  int gru_hidden = 128;
  int head_hidden = 64;
  double log_sigma_init = -0.6931471805599453;  // log 0.5
};

/// Recurrent budget-planner policy: a one-layer ReLU encoder feeds a GRU
/// whose hidden state summarizes all previous episodes; mean/value heads read
/// (hidden, scaled budget); log sigma is a single learnable scalar shared
/// across action components.
class PlannerPolicy final : public TrainablePolicy {
 public:
  PlannerPolicy(PolicySizes sizes, std::uint64_t init_seed);
  PlannerPolicy(PolicySizes sizes, ParamStore store);

  const PolicySizes& sizes() const { return sizes_; }
  ParamStore& params() override { return store_; }
  const ParamStore& params() const override { return store_; }
  int obs_dim() const override { return 3 * sizes_.m; }
  int action_dim() const override { return sizes_.m; }

  Tensor initial_hidden() const { return Tensor(1, sizes_.gru_hidden); }
  /// One GRU step over the features of the newest history entry.
  void advance(Tensor& hidden, std::span<const double> entry_features) const;
  Heads heads(const Tensor& hidden, double scaled_budget) const;

  UnrollNodes unroll(Graph& graph, const UnrollBatch& batch) const override;
  std::vector<std::pair<std::string, std::string>> checkpoint_meta() const override;

  static PolicySizes sizes_from_meta(
      const std::vector<std::pair<std::string, std::string>>& meta);

 private:
  struct Bound;
  Bound bind(Graph& g, BoundParams* bound_out = nullptr) const;
  int encode(Graph& g, const Bound& b, int obs) const;
  int gru_step(Graph& g, const Bound& b, int h, int x) const;
  int head(Graph& g, int hb, int w1, int b1, int w2, int b2) const;

  PolicySizes sizes_;
  ParamStore store_;
};

struct FeedforwardSizes {
  int obs_dim = 3;
  int action_dim = 1;
  int hidden = 64;
  double log_sigma_init = -0.6931471805599453;
};

/// Stateless MLP actor-critic (used by the per-stage baseline planner and
/// small synthetic tasks).
class FeedforwardPolicy final : public TrainablePolicy {
 public:
  FeedforwardPolicy(FeedforwardSizes sizes, std::uint64_t init_seed);
  FeedforwardPolicy(FeedforwardSizes sizes, ParamStore store);

  const FeedforwardSizes& sizes() const { return sizes_; }
  ParamStore& params() override { return store_; }
  const ParamStore& params() const override { return store_; }
  int obs_dim() const override { return sizes_.obs_dim; }
  int action_dim() const override { return sizes_.action_dim; }

  Heads heads(std::span<const double> obs) const;

  UnrollNodes unroll(Graph& graph, const UnrollBatch& batch) const override;
  std::vector<std::pair<std::string, std::string>> checkpoint_meta() const override;

  static FeedforwardSizes sizes_from_meta(
      const std::vector<std::pair<std::string, std::string>>& meta);

 private:
  struct Bound;
  Bound bind(Graph& g, BoundParams* bound_out = nullptr) const;

  FeedforwardSizes sizes_;
  ParamStore store_;
};

/// Builds the gaussian log-prob nodes shared by both policies.
int gaussian_logp_node(Graph& g, int mean, int log_sigma, int actions_const, int dim);
int gaussian_entropy_node(Graph& g, int log_sigma, int dim);

/// GRU cell shared by the planner policy and the per-stage value baselines:
/// update/reset gates with sigmoid, tanh candidate with the reset gate
/// applied to the hidden-to-candidate preactivation.
struct GruCellNodes {
  int wxz, wxr, wxn, whz, whr, whn;
  int bz, br, bn_in, bn_hid;
};
int gru_cell_node(Graph& g, const GruCellNodes& p, int h, int x);
/// Registers "<prefix>Wxz" ... "<prefix>bn_hid" (orthogonal recurrent
/// weights, fan-in uniform input weights, zero biases).
void add_gru_params(ParamStore& store, const std::string& prefix, int input, int hidden,
                    CounterRng rng);
GruCellNodes resolve_gru(const ParamStore& store, const BoundParams& bound,
                         const std::string& prefix);

}  // namespace bidlab::nn
