#include "bidlab/nn/params.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bidlab::nn {

int ParamStore::add(const std::string& name, Tensor init) {
  if (index_.count(name)) throw std::invalid_argument("ParamStore: duplicate name " + name);
  Entry e;
  e.name = name;
  e.grad = Tensor(init.rows, init.cols);
  e.adam_m = Tensor(init.rows, init.cols);
  e.adam_v = Tensor(init.rows, init.cols);
  e.value = std::move(init);
  entries_.push_back(std::move(e));
  const int id = static_cast<int>(entries_.size()) - 1;
  index_[name] = id;
  return id;
}

int ParamStore::index_of(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

Tensor& ParamStore::value(const std::string& name) {
  const int i = index_of(name);
  if (i < 0) throw std::invalid_argument("ParamStore: unknown name " + name);
  return entries_[i].value;
}

const Tensor& ParamStore::value(const std::string& name) const {
  const int i = index_of(name);
  if (i < 0) throw std::invalid_argument("ParamStore: unknown name " + name);
  return entries_[i].value;
}

void ParamStore::zero_grad() {
  for (Entry& e : entries_) {
    std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
  }
}

void ParamStore::adam_step(double lr, double beta1, double beta2, double eps) {
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
  for (Entry& e : entries_) {
    for (size_t i = 0; i < e.value.size(); ++i) {
      const double g = e.grad.data[i];
      e.adam_m.data[i] = beta1 * e.adam_m.data[i] + (1.0 - beta1) * g;
      e.adam_v.data[i] = beta2 * e.adam_v.data[i] + (1.0 - beta2) * g * g;
      const double mhat = e.adam_m.data[i] / bc1;
      const double vhat = e.adam_v.data[i] / bc2;
      e.value.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

double ParamStore::grad_max_abs() const {
  double mx = 0.0;
  for (const Entry& e : entries_) {
    for (double g : e.grad.data) mx = std::max(mx, std::fabs(g));
  }
  return mx;
}

size_t ParamStore::parameter_count() const {
  size_t n = 0;
  for (const Entry& e : entries_) n += e.value.size();
  return n;
}

void ParamStore::save(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& meta) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("ParamStore::save: cannot write " + path);
  out << "bidlab-checkpoint 1\n";
  for (const auto& [key, value] : meta) out << "meta " << key << ' ' << value << '\n';
  char buf[64];
  for (const Entry& e : entries_) {
    out << "param " << e.name << ' ' << e.value.rows << ' ' << e.value.cols << '\n';
    for (int r = 0; r < e.value.rows; ++r) {
      for (int c = 0; c < e.value.cols; ++c) {
        std::snprintf(buf, sizeof(buf), "%a", e.value.at(r, c));
        out << buf << (c + 1 == e.value.cols ? "" : " ");
      }
      out << '\n';
    }
  }
  out << "end\n";
  if (!out) throw std::runtime_error("ParamStore::save: write failed for " + path);
}

ParamStore ParamStore::load(const std::string& path,
                            std::vector<std::pair<std::string, std::string>>* meta) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ParamStore::load: cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != "bidlab-checkpoint 1") {
    throw std::runtime_error("ParamStore::load: bad header in " + path);
  }
  ParamStore store;
  while (std::getline(in, line)) {
    if (line == "end") return store;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "meta") {
      std::string key;
      ls >> key;
      std::string value;
      std::getline(ls, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      if (meta) meta->emplace_back(key, value);
    } else if (tag == "param") {
      std::string name;
      int rows = 0, cols = 0;
      ls >> name >> rows >> cols;
      if (name.empty() || rows <= 0 || cols <= 0) {
        throw std::runtime_error("ParamStore::load: bad param line in " + path);
      }
      Tensor t(rows, cols);
      for (int r = 0; r < rows; ++r) {
        if (!std::getline(in, line)) {
          throw std::runtime_error("ParamStore::load: truncated " + path);
        }
        const char* p = line.c_str();
        char* endp = nullptr;
        for (int c = 0; c < cols; ++c) {
          t.at(r, c) = std::strtod(p, &endp);
          if (endp == p) throw std::runtime_error("ParamStore::load: bad value in " + path);
          p = endp;
        }
      }
      store.add(name, std::move(t));
    } else {
      throw std::runtime_error("ParamStore::load: unexpected line in " + path);
    }
  }
  throw std::runtime_error("ParamStore::load: missing end marker in " + path);
}

BoundParams bind_params(Graph& graph, const ParamStore& store) {
  BoundParams bound;
  bound.node_of.reserve(store.count());
  for (int i = 0; i < store.count(); ++i) {
    bound.node_of.push_back(graph.leaf(store.entry(i).value, /*needs_grad=*/true));
  }
  return bound;
}

void harvest_grads(const Graph& graph, const BoundParams& bound, ParamStore& store) {
  for (int i = 0; i < store.count(); ++i) {
    const Tensor& g = graph.grad(bound.node_of[i]);
    Tensor& acc = store.entry(i).grad;
    if (g.size() == 0) continue;  // parameter unused by this graph
    for (size_t k = 0; k < acc.size(); ++k) acc.data[k] += g.data[k];
  }
}

Tensor init_uniform_fanin(int rows, int cols, CounterRng& rng) {
  Tensor t(rows, cols);
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  for (double& v : t.data) v = rng.uniform(-bound, bound);
  return t;
}

Tensor init_orthogonal(int rows, int cols, CounterRng& rng) {
  const bool wide = cols > rows;
  const int n = wide ? cols : rows;   // length of each basis vector
  const int k = wide ? rows : cols;   // number of vectors to orthonormalize
  std::vector<std::vector<double>> basis(k, std::vector<double>(n));
  for (auto& v : basis) {
    for (double& x : v) x = rng.normal(0.0, 1.0);
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < i; ++j) {
      double dot = 0.0;
      for (int t = 0; t < n; ++t) dot += basis[i][t] * basis[j][t];
      for (int t = 0; t < n; ++t) basis[i][t] -= dot * basis[j][t];
    }
    double norm = 0.0;
    for (double x : basis[i]) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
      // Degenerate draw; re-seed this vector deterministically.
      for (double& x : basis[i]) x = rng.normal(0.0, 1.0);
      --i;
      continue;
    }
    for (double& x : basis[i]) x /= norm;
  }
  Tensor t(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      t.at(r, c) = wide ? basis[r][c] : basis[c][r];
    }
  }
  return t;
}

}  // namespace bidlab::nn
