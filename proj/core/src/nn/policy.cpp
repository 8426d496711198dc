#include "bidlab/nn/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace bidlab::nn {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)

std::string meta_value(const std::vector<std::pair<std::string, std::string>>& meta,
                       const std::string& key) {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  throw std::runtime_error("checkpoint meta missing key: " + key);
}

}  // namespace

double gaussian_log_prob(std::span<const double> action, std::span<const double> mean,
                         double log_sigma) {
  if (action.size() != mean.size()) {
    throw std::invalid_argument("gaussian_log_prob: dimension mismatch");
  }
  const int m = static_cast<int>(action.size());
  // Mirrors gaussian_logp_node op for op so the two paths agree bitwise.
  const double inv_sigma = std::exp(log_sigma * -1.0);
  double ssum = 0.0;
  for (int j = 0; j < m; ++j) {
    const double d = (action[j] - mean[j]) * inv_sigma;
    ssum += d * d;
  }
  double lp = ssum * -0.5;
  lp += log_sigma * -static_cast<double>(m);
  lp += -0.5 * static_cast<double>(m) * kLog2Pi;
  return lp;
}

int gaussian_logp_node(Graph& g, int mean, int log_sigma, int actions_const, int dim) {
  const int diff = g.sub(actions_const, mean);
  const int inv_sigma = g.exp_op(g.scale(log_sigma, -1.0));
  const int z = g.scalar_mul(diff, inv_sigma);
  const int ssum = g.row_sum(g.square(z));
  const int half = g.scale(ssum, -0.5);
  const int pen = g.scale(log_sigma, -static_cast<double>(dim));
  return g.add_const(g.add_scalar_node(half, pen), -0.5 * dim * kLog2Pi);
}

int gaussian_entropy_node(Graph& g, int log_sigma, int dim) {
  return g.add_const(g.scale(log_sigma, static_cast<double>(dim)),
                     0.5 * dim * (1.0 + kLog2Pi));
}

int gru_cell_node(Graph& g, const GruCellNodes& p, int h, int x) {
  const int z = g.sigmoid(g.add_row(g.add(g.matmul(x, p.wxz), g.matmul(h, p.whz)), p.bz));
  const int r = g.sigmoid(g.add_row(g.add(g.matmul(x, p.wxr), g.matmul(h, p.whr)), p.br));
  const int cand_hid = g.add_row(g.matmul(h, p.whn), p.bn_hid);
  const int cand =
      g.tanh_op(g.add(g.add_row(g.matmul(x, p.wxn), p.bn_in), g.hadamard(r, cand_hid)));
  const int one_minus_z = g.add_const(g.scale(z, -1.0), 1.0);
  return g.add(g.hadamard(one_minus_z, cand), g.hadamard(z, h));
}

void add_gru_params(ParamStore& store, const std::string& prefix, int input, int hidden,
                    CounterRng rng) {
  CounterRng r0 = rng.split(0);
  store.add(prefix + "Wxz", init_uniform_fanin(input, hidden, r0));
  CounterRng r1 = rng.split(1);
  store.add(prefix + "Wxr", init_uniform_fanin(input, hidden, r1));
  CounterRng r2 = rng.split(2);
  store.add(prefix + "Wxn", init_uniform_fanin(input, hidden, r2));
  CounterRng r3 = rng.split(3);
  store.add(prefix + "Whz", init_orthogonal(hidden, hidden, r3));
  CounterRng r4 = rng.split(4);
  store.add(prefix + "Whr", init_orthogonal(hidden, hidden, r4));
  CounterRng r5 = rng.split(5);
  store.add(prefix + "Whn", init_orthogonal(hidden, hidden, r5));
  store.add(prefix + "bz", Tensor(1, hidden));
  store.add(prefix + "br", Tensor(1, hidden));
  store.add(prefix + "bn_in", Tensor(1, hidden));
  store.add(prefix + "bn_hid", Tensor(1, hidden));
}

GruCellNodes resolve_gru(const ParamStore& store, const BoundParams& bound,
                         const std::string& prefix) {
  auto id = [&](const char* name) { return bound.node_of[store.index_of(prefix + name)]; };
  GruCellNodes p{};
  p.wxz = id("Wxz");
  p.wxr = id("Wxr");
  p.wxn = id("Wxn");
  p.whz = id("Whz");
  p.whr = id("Whr");
  p.whn = id("Whn");
  p.bz = id("bz");
  p.br = id("br");
  p.bn_in = id("bn_in");
  p.bn_hid = id("bn_hid");
  return p;
}

// ---------------------------------------------------------------------------
// PlannerPolicy

struct PlannerPolicy::Bound {
  int encW, encB;
  int wxz, wxr, wxn, whz, whr, whn;
  int bz, br, bnIn, bnHid;
  int meanW1, meanB1, meanW2, meanB2;
  int valueW1, valueB1, valueW2, valueB2;
  int logSigma;
};

PlannerPolicy::PlannerPolicy(PolicySizes sizes, std::uint64_t init_seed) : sizes_(sizes) {
  if (sizes_.m < 1 || sizes_.enc_out < 1 || sizes_.gru_hidden < 1 || sizes_.head_hidden < 1) {
    throw std::invalid_argument("PlannerPolicy: sizes must be positive");
  }
  CounterRng rng(init_seed);
  const int in = obs_dim();
  const int e = sizes_.enc_out;
  const int h = sizes_.gru_hidden;
  const int hh = sizes_.head_hidden;
  CounterRng r0 = rng.split(0);
  store_.add("enc.W", init_uniform_fanin(in, e, r0));
  store_.add("enc.b", Tensor(1, e));
  add_gru_params(store_, "gru.", e, h, rng.split(1));
  CounterRng r7 = rng.split(7);
  store_.add("mean.W1", init_uniform_fanin(h + 1, hh, r7));
  store_.add("mean.b1", Tensor(1, hh));
  CounterRng r8 = rng.split(8);
  store_.add("mean.W2", init_uniform_fanin(hh, sizes_.m, r8));
  store_.add("mean.b2", Tensor(1, sizes_.m));
  CounterRng r9 = rng.split(9);
  store_.add("value.W1", init_uniform_fanin(h + 1, hh, r9));
  store_.add("value.b1", Tensor(1, hh));
  CounterRng r10 = rng.split(10);
  store_.add("value.W2", init_uniform_fanin(hh, 1, r10));
  store_.add("value.b2", Tensor(1, 1));
  store_.add("log_sigma", Tensor::scalar(sizes_.log_sigma_init));
}

PlannerPolicy::PlannerPolicy(PolicySizes sizes, ParamStore store)
    : sizes_(sizes), store_(std::move(store)) {
  const char* required[] = {"enc.W",   "gru.Wxz", "gru.Whz", "mean.W1",
                            "value.W1", "log_sigma"};
  for (const char* name : required) {
    if (store_.index_of(name) < 0) {
      throw std::runtime_error(std::string("PlannerPolicy: checkpoint missing ") + name);
    }
  }
  if (store_.value("enc.W").rows != obs_dim() ||
      store_.value("gru.Whz").rows != sizes_.gru_hidden ||
      store_.value("mean.W2").cols != sizes_.m) {
    throw std::runtime_error("PlannerPolicy: checkpoint shapes do not match sizes");
  }
}

PlannerPolicy::Bound PlannerPolicy::bind(Graph& g, BoundParams* bound_out) const {
  BoundParams all = bind_params(g, store_);
  auto put = [&](const char* name) { return all.node_of[store_.index_of(name)]; };
  Bound b{};
  b.encW = put("enc.W");
  b.encB = put("enc.b");
  b.wxz = put("gru.Wxz");
  b.wxr = put("gru.Wxr");
  b.wxn = put("gru.Wxn");
  b.whz = put("gru.Whz");
  b.whr = put("gru.Whr");
  b.whn = put("gru.Whn");
  b.bz = put("gru.bz");
  b.br = put("gru.br");
  b.bnIn = put("gru.bn_in");
  b.bnHid = put("gru.bn_hid");
  b.meanW1 = put("mean.W1");
  b.meanB1 = put("mean.b1");
  b.meanW2 = put("mean.W2");
  b.meanB2 = put("mean.b2");
  b.valueW1 = put("value.W1");
  b.valueB1 = put("value.b1");
  b.valueW2 = put("value.W2");
  b.valueB2 = put("value.b2");
  b.logSigma = put("log_sigma");
  if (bound_out) *bound_out = std::move(all);
  return b;
}

int PlannerPolicy::encode(Graph& g, const Bound& b, int obs) const {
  return g.relu(g.add_row(g.matmul(obs, b.encW), b.encB));
}

int PlannerPolicy::gru_step(Graph& g, const Bound& b, int h, int x) const {
  GruCellNodes p{b.wxz, b.wxr, b.wxn, b.whz, b.whr, b.whn, b.bz, b.br, b.bnIn, b.bnHid};
  return gru_cell_node(g, p, h, x);
}

int PlannerPolicy::head(Graph& g, int hb, int w1, int b1, int w2, int b2) const {
  const int l1 = g.relu(g.add_row(g.matmul(hb, w1), b1));
  return g.add_row(g.matmul(l1, w2), b2);
}

void PlannerPolicy::advance(Tensor& hidden, std::span<const double> entry_features) const {
  if (static_cast<int>(entry_features.size()) != obs_dim()) {
    throw std::invalid_argument("PlannerPolicy::advance: bad feature length");
  }
  Graph g(false);
  const Bound b = bind(g);
  const int h = g.leaf(hidden);
  const int x = g.constant_row(entry_features);
  const int h2 = gru_step(g, b, h, encode(g, b, x));
  hidden = g.value(h2);
}

Heads PlannerPolicy::heads(const Tensor& hidden, double scaled_budget) const {
  Graph g(false);
  const Bound b = bind(g);
  const int h = g.leaf(hidden);
  const int hb = g.concat_cols(h, g.constant_column(hidden.rows, scaled_budget));
  const int mu = head(g, hb, b.meanW1, b.meanB1, b.meanW2, b.meanB2);
  const int v = head(g, hb, b.valueW1, b.valueB1, b.valueW2, b.valueB2);
  Heads out;
  out.mean = g.value(mu).data;
  out.log_sigma = store_.value("log_sigma").data[0];
  out.sigma = std::exp(out.log_sigma);
  out.value = g.value(v).data[0];
  return out;
}

UnrollNodes PlannerPolicy::unroll(Graph& g, const UnrollBatch& batch) const {
  if (batch.obs_dim != obs_dim() || batch.action_dim != action_dim()) {
    throw std::invalid_argument("PlannerPolicy::unroll: batch dimensions mismatch");
  }
  UnrollNodes out;
  const Bound b = bind(g, &out.bound);
  out.log_sigma = b.logSigma;

  Tensor budget_col(batch.batch, 1);
  for (int i = 0; i < batch.batch; ++i) budget_col.at(i, 0) = batch.scaled_budget[i];
  const int budget_node = g.leaf(std::move(budget_col));

  int h = g.leaf(Tensor(batch.batch, sizes_.gru_hidden));
  for (int step = 0; step < batch.steps; ++step) {
    Tensor obs(batch.batch, batch.obs_dim);
    Tensor act(batch.batch, batch.action_dim);
    for (int row = 0; row < batch.batch; ++row) {
      const size_t ob = (static_cast<size_t>(step) * batch.batch + row) * batch.obs_dim;
      const size_t ab = (static_cast<size_t>(step) * batch.batch + row) * batch.action_dim;
      for (int j = 0; j < batch.obs_dim; ++j) obs.at(row, j) = batch.obs[ob + j];
      for (int j = 0; j < batch.action_dim; ++j) act.at(row, j) = batch.actions[ab + j];
    }
    const int x = g.leaf(std::move(obs));
    h = gru_step(g, b, h, encode(g, b, x));
    const int hb = g.concat_cols(h, budget_node);
    const int mu = head(g, hb, b.meanW1, b.meanB1, b.meanW2, b.meanB2);
    const int v = head(g, hb, b.valueW1, b.valueB1, b.valueW2, b.valueB2);
    const int a = g.leaf(std::move(act));
    out.logp.push_back(gaussian_logp_node(g, mu, b.logSigma, a, sizes_.m));
    out.value.push_back(v);
  }
  out.entropy = gaussian_entropy_node(g, b.logSigma, sizes_.m);
  return out;
}

std::vector<std::pair<std::string, std::string>> PlannerPolicy::checkpoint_meta() const {
  return {
      {"policy", "planner"},
      {"m", std::to_string(sizes_.m)},
      {"enc_out", std::to_string(sizes_.enc_out)},
      {"gru_hidden", std::to_string(sizes_.gru_hidden)},
      {"head_hidden", std::to_string(sizes_.head_hidden)},
  };
}

PolicySizes PlannerPolicy::sizes_from_meta(
    const std::vector<std::pair<std::string, std::string>>& meta) {
  PolicySizes s;
  s.m = std::stoi(meta_value(meta, "m"));
  s.enc_out = std::stoi(meta_value(meta, "enc_out"));
  s.gru_hidden = std::stoi(meta_value(meta, "gru_hidden"));
  s.head_hidden = std::stoi(meta_value(meta, "head_hidden"));
  return s;
}

// ---------------------------------------------------------------------------
// FeedforwardPolicy

struct FeedforwardPolicy::Bound {
  int meanW1, meanB1, meanW2, meanB2;
  int valueW1, valueB1, valueW2, valueB2;
  int logSigma;
};

FeedforwardPolicy::FeedforwardPolicy(FeedforwardSizes sizes, std::uint64_t init_seed)
    : sizes_(sizes) {
  if (sizes_.obs_dim < 1 || sizes_.action_dim < 1 || sizes_.hidden < 1) {
    throw std::invalid_argument("FeedforwardPolicy: sizes must be positive");
  }
  CounterRng rng(init_seed);
  CounterRng r0 = rng.split(0);
  store_.add("mean.W1", init_uniform_fanin(sizes_.obs_dim, sizes_.hidden, r0));
  store_.add("mean.b1", Tensor(1, sizes_.hidden));
  CounterRng r1 = rng.split(1);
  store_.add("mean.W2", init_uniform_fanin(sizes_.hidden, sizes_.action_dim, r1));
  store_.add("mean.b2", Tensor(1, sizes_.action_dim));
  CounterRng r2 = rng.split(2);
  store_.add("value.W1", init_uniform_fanin(sizes_.obs_dim, sizes_.hidden, r2));
  store_.add("value.b1", Tensor(1, sizes_.hidden));
  CounterRng r3 = rng.split(3);
  store_.add("value.W2", init_uniform_fanin(sizes_.hidden, 1, r3));
  store_.add("value.b2", Tensor(1, 1));
  store_.add("log_sigma", Tensor::scalar(sizes_.log_sigma_init));
}

FeedforwardPolicy::FeedforwardPolicy(FeedforwardSizes sizes, ParamStore store)
    : sizes_(sizes), store_(std::move(store)) {
  if (store_.index_of("mean.W1") < 0 || store_.index_of("log_sigma") < 0) {
    throw std::runtime_error("FeedforwardPolicy: incomplete checkpoint");
  }
  if (store_.value("mean.W1").rows != sizes_.obs_dim ||
      store_.value("mean.W2").cols != sizes_.action_dim) {
    throw std::runtime_error("FeedforwardPolicy: checkpoint shapes do not match sizes");
  }
}

FeedforwardPolicy::Bound FeedforwardPolicy::bind(Graph& g, BoundParams* bound_out) const {
  BoundParams all = bind_params(g, store_);
  auto put = [&](const char* name) { return all.node_of[store_.index_of(name)]; };
  Bound b{};
  b.meanW1 = put("mean.W1");
  b.meanB1 = put("mean.b1");
  b.meanW2 = put("mean.W2");
  b.meanB2 = put("mean.b2");
  b.valueW1 = put("value.W1");
  b.valueB1 = put("value.b1");
  b.valueW2 = put("value.W2");
  b.valueB2 = put("value.b2");
  b.logSigma = put("log_sigma");
  if (bound_out) *bound_out = std::move(all);
  return b;
}

Heads FeedforwardPolicy::heads(std::span<const double> obs) const {
  if (static_cast<int>(obs.size()) != sizes_.obs_dim) {
    throw std::invalid_argument("FeedforwardPolicy::heads: bad obs length");
  }
  Graph g(false);
  const Bound b = bind(g);
  const int x = g.constant_row(obs);
  const int mu = g.add_row(g.matmul(g.relu(g.add_row(g.matmul(x, b.meanW1), b.meanB1)),
                                    b.meanW2),
                           b.meanB2);
  const int v = g.add_row(g.matmul(g.relu(g.add_row(g.matmul(x, b.valueW1), b.valueB1)),
                                   b.valueW2),
                          b.valueB2);
  Heads out;
  out.mean = g.value(mu).data;
  out.log_sigma = store_.value("log_sigma").data[0];
  out.sigma = std::exp(out.log_sigma);
  out.value = g.value(v).data[0];
  return out;
}

UnrollNodes FeedforwardPolicy::unroll(Graph& g, const UnrollBatch& batch) const {
  if (batch.obs_dim != sizes_.obs_dim || batch.action_dim != sizes_.action_dim) {
    throw std::invalid_argument("FeedforwardPolicy::unroll: batch dimensions mismatch");
  }
  UnrollNodes out;
  const Bound b = bind(g, &out.bound);
  out.log_sigma = b.logSigma;
  for (int step = 0; step < batch.steps; ++step) {
    Tensor obs(batch.batch, batch.obs_dim);
    Tensor act(batch.batch, batch.action_dim);
    for (int row = 0; row < batch.batch; ++row) {
      const size_t ob = (static_cast<size_t>(step) * batch.batch + row) * batch.obs_dim;
      const size_t ab = (static_cast<size_t>(step) * batch.batch + row) * batch.action_dim;
      for (int j = 0; j < batch.obs_dim; ++j) obs.at(row, j) = batch.obs[ob + j];
      for (int j = 0; j < batch.action_dim; ++j) act.at(row, j) = batch.actions[ab + j];
    }
    const int x = g.leaf(std::move(obs));
    const int mu = g.add_row(g.matmul(g.relu(g.add_row(g.matmul(x, b.meanW1), b.meanB1)),
                                      b.meanW2),
                             b.meanB2);
    const int v = g.add_row(g.matmul(g.relu(g.add_row(g.matmul(x, b.valueW1), b.valueB1)),
                                     b.valueW2),
                            b.valueB2);
    const int a = g.leaf(std::move(act));
    out.logp.push_back(gaussian_logp_node(g, mu, b.logSigma, a, sizes_.action_dim));
    out.value.push_back(v);
  }
  out.entropy = gaussian_entropy_node(g, b.logSigma, sizes_.action_dim);
  return out;
}

std::vector<std::pair<std::string, std::string>> FeedforwardPolicy::checkpoint_meta() const {
  return {
      {"policy", "feedforward"},
      {"obs_dim", std::to_string(sizes_.obs_dim)},
      {"action_dim", std::to_string(sizes_.action_dim)},
      {"hidden", std::to_string(sizes_.hidden)},
  };
}

FeedforwardSizes FeedforwardPolicy::sizes_from_meta(
    const std::vector<std::pair<std::string, std::string>>& meta) {
  FeedforwardSizes s;
  s.obs_dim = std::stoi(meta_value(meta, "obs_dim"));
  s.action_dim = std::stoi(meta_value(meta, "action_dim"));
  s.hidden = std::stoi(meta_value(meta, "hidden"));
  return s;
}

}  // namespace bidlab::nn
