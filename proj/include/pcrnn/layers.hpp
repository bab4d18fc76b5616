#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pcrnn/gradcheck.hpp"
#include "pcrnn/rng.hpp"
#include "pcrnn/tensor.hpp"

namespace pcrnn {

// Glorot-style uniform init: range scales with fan-in/fan-out. Draw order is
// fixed, so a seed pins every weight bit-exactly.
template <typename S>
Tensor<S> glorot(std::vector<int> shape, int fan_in, int fan_out, Rng& rng) {
  Tensor<S> t = Tensor<S>::zeros(std::move(shape), true);
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (std::size_t i = 0; i < t.numel(); ++i)
    t.at(i) = static_cast<S>(rng.uniform(-limit, limit));
  return t;
}

// y = W·x + b
template <typename S>
struct Linear {
  Tensor<S> w;  // [out x in]
  Tensor<S> b;  // [out]

  static Linear init(int out, int in, Rng& rng) {
    Linear l;
    l.w = glorot<S>({out, in}, in, out, rng);
    l.b = Tensor<S>::zeros({out}, true);
    return l;
  }

  Tensor<S> apply(Graph<S>& g, const Tensor<S>& x) const { return g.add(g.matmul(w, x), b); }

  void collect(const std::string& prefix, NamedParams<S>& out) const {
    out.emplace_back(prefix + ".w", w);
    out.emplace_back(prefix + ".b", b);
  }
};

// Four-gate LSTM cell with the gate blocks stacked (i, f, g, o) inside one
// input matrix, one recurrent matrix and one bias, each of height 4d.
// The forget block of the bias starts at 1.
template <typename S>
struct LstmCell {
  Tensor<S> w_x;  // [4d x in]
  Tensor<S> w_h;  // [4d x d]
  Tensor<S> b;    // [4d]
  int hidden = 0;

  static LstmCell init(int hidden, int in, Rng& rng) {
    LstmCell c;
    c.hidden = hidden;
    c.w_x = glorot<S>({4 * hidden, in}, in, hidden, rng);
    c.w_h = glorot<S>({4 * hidden, hidden}, hidden, hidden, rng);
    c.b = Tensor<S>::zeros({4 * hidden}, true);
    for (int i = hidden; i < 2 * hidden; ++i) c.b.at(i) = S(1);
    return c;
  }

  // One gated update. h and c must be [d]; x must match w_x's input width.
  std::pair<Tensor<S>, Tensor<S>> step(Graph<S>& g, const Tensor<S>& x, const Tensor<S>& h,
                                       const Tensor<S>& c) const {
    const int d = hidden;
    auto pre = g.add(g.add(g.matmul(w_x, x), g.matmul(w_h, h)), b);
    auto gate_i = g.sigmoid(g.slice(pre, 0, d));
    auto gate_f = g.sigmoid(g.slice(pre, d, d));
    auto cand = g.tanh(g.slice(pre, 2 * d, d));
    auto gate_o = g.sigmoid(g.slice(pre, 3 * d, d));
    auto c_new = g.add(g.mul(gate_f, c), g.mul(gate_i, cand));
    auto h_new = g.mul(gate_o, g.tanh(c_new));
    return {h_new, c_new};
  }

  void collect(const std::string& prefix, NamedParams<S>& out) const {
    out.emplace_back(prefix + ".w_x", w_x);
    out.emplace_back(prefix + ".w_h", w_h);
    out.emplace_back(prefix + ".b", b);
  }
};

// Hidden/cell pair per layer.
template <typename S>
using LstmState = std::vector<std::pair<Tensor<S>, Tensor<S>>>;

// Unidirectional multi-layer LSTM, stepped one input at a time. Layer k+1
// consumes layer k's hidden state.
template <typename S>
struct LstmStack {
  std::vector<LstmCell<S>> layers;

  static LstmStack init(int hidden, int in, int depth, Rng& rng) {
    LstmStack s;
    for (int l = 0; l < depth; ++l)
      s.layers.push_back(LstmCell<S>::init(hidden, l == 0 ? in : hidden, rng));
    return s;
  }

  LstmState<S> zero_state(Graph<S>&) const {
    LstmState<S> st;
    for (const auto& cell : layers)
      st.emplace_back(Tensor<S>::zeros({cell.hidden}), Tensor<S>::zeros({cell.hidden}));
    return st;
  }

  // Returns the top layer's hidden state; `state` is replaced in place.
  Tensor<S> step(Graph<S>& g, const Tensor<S>& x, LstmState<S>& state) const {
    if (state.size() != layers.size())
      throw ShapeError("lstm stack: state has " + std::to_string(state.size()) + " layers, want " +
                       std::to_string(layers.size()));
    Tensor<S> input = x;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto [h, c] = layers[l].step(g, input, state[l].first, state[l].second);
      state[l] = {h, c};
      input = h;
    }
    return input;
  }

  void collect(const std::string& prefix, NamedParams<S>& out) const {
    for (std::size_t l = 0; l < layers.size(); ++l)
      layers[l].collect(prefix + ".l" + std::to_string(l), out);
  }
};

template <typename S>
struct BiLstmResult {
  std::vector<Tensor<S>> outputs;  // per step: forward + backward top-layer hidden
  LstmState<S> final_fwd;          // forward direction's last (h, c) per layer
  LstmState<S> final_bwd;
};

// Multi-layer bidirectional LSTM. Each layer runs both directions over the
// whole sequence and feeds the per-step sum of the two hidden states upward;
// the output sequence is the top layer's sum.
template <typename S>
struct BiLstm {
  std::vector<LstmCell<S>> fwd, bwd;

  static BiLstm init(int hidden, int in, int depth, Rng& rng) {
    BiLstm b;
    for (int l = 0; l < depth; ++l) {
      const int width = l == 0 ? in : hidden;
      b.fwd.push_back(LstmCell<S>::init(hidden, width, rng));
      b.bwd.push_back(LstmCell<S>::init(hidden, width, rng));
    }
    return b;
  }

  BiLstmResult<S> encode(Graph<S>& g, const std::vector<Tensor<S>>& inputs) const {
    if (inputs.empty()) throw ContractError("bilstm: empty input sequence");
    const std::size_t n = inputs.size();
    std::vector<Tensor<S>> layer_in = inputs;
    BiLstmResult<S> res;
    for (std::size_t l = 0; l < fwd.size(); ++l) {
      const int d = fwd[l].hidden;
      std::vector<Tensor<S>> hs_f(n), hs_b(n);
      Tensor<S> h = Tensor<S>::zeros({d}), c = Tensor<S>::zeros({d});
      for (std::size_t k = 0; k < n; ++k) {
        auto [h2, c2] = fwd[l].step(g, layer_in[k], h, c);
        h = h2;
        c = c2;
        hs_f[k] = h2;
      }
      res.final_fwd.emplace_back(h, c);
      h = Tensor<S>::zeros({d});
      c = Tensor<S>::zeros({d});
      for (std::size_t k = n; k-- > 0;) {
        auto [h2, c2] = bwd[l].step(g, layer_in[k], h, c);
        h = h2;
        c = c2;
        hs_b[k] = h2;
      }
      res.final_bwd.emplace_back(h, c);
      for (std::size_t k = 0; k < n; ++k) layer_in[k] = g.add(hs_f[k], hs_b[k]);
    }
    res.outputs = std::move(layer_in);
    return res;
  }

  void collect(const std::string& prefix, NamedParams<S>& out) const {
    for (std::size_t l = 0; l < fwd.size(); ++l) {
      fwd[l].collect(prefix + ".l" + std::to_string(l) + ".fwd", out);
      bwd[l].collect(prefix + ".l" + std::to_string(l) + ".bwd", out);
    }
  }
};

// Dense category representations, one row per id.
template <typename S>
struct Embedding {
  Tensor<S> table;  // [vocab x dim]

  static Embedding init(int vocab, int dim, Rng& rng) {
    Embedding e;
    e.table = glorot<S>({vocab, dim}, vocab, dim, rng);
    return e;
  }

  int vocab() const { return table.shape[0]; }

  Tensor<S> lookup(Graph<S>& g, int id) const {
    if (id < 0 || id >= vocab())
      throw VocabError("embedding: category " + std::to_string(id) + " outside vocabulary of " +
                       std::to_string(vocab()));
    return g.row(table, id);
  }

  void collect(const std::string& prefix, NamedParams<S>& out) const {
    out.emplace_back(prefix + ".table", table);
  }
};

// Point-wise feed-forward block: w2·relu(w1·h + b1) + b2.
template <typename S>
struct Pfn {
  Linear<S> inner, outer;

  static Pfn init(int dim, int hidden, Rng& rng) {
    Pfn p;
    p.inner = Linear<S>::init(hidden, dim, rng);
    p.outer = Linear<S>::init(dim, hidden, rng);
    return p;
  }

  Tensor<S> apply(Graph<S>& g, const Tensor<S>& h) const {
    return outer.apply(g, g.relu(inner.apply(g, h)));
  }

  void collect(const std::string& prefix, NamedParams<S>& out) const {
    inner.collect(prefix + ".inner", out);
    outer.collect(prefix + ".outer", out);
  }
};

}  // namespace pcrnn
