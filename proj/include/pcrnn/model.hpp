#pragma once

#include <array>
#include <algorithm>
#include <string>
#include <vector>

#include "pcrnn/data.hpp"
#include "pcrnn/layers.hpp"

namespace pcrnn {

struct ModelConfig {
  int d_p = 32;        // patent encoder and decoder hidden size
  int d_a = 16;        // assignee encoder hidden size
  int d_v = 16;        // inventor encoder hidden size
  int emb_dim = 16;    // category embedding width
  int attn_dim = 32;   // alignment space of the concat scoring
  int pfn_inner = 64;  // inner width of the prediction feed-forward block
  int stack = 2;       // layers in every encoder and the decoder
  int vocab = 7;       // 7 main or 37 sub categories
  int max_seq_len = 200;
  Task task = Task::main_category;

  void validate() const {
    auto positive = [](int v, const char* name) {
      if (v < 1) throw ConfigError(std::string("model config: ") + name + " must be positive");
    };
    positive(d_p, "d_p");
    positive(d_a, "d_a");
    positive(d_v, "d_v");
    positive(emb_dim, "emb_dim");
    positive(attn_dim, "attn_dim");
    positive(pfn_inner, "pfn_inner");
    positive(stack, "stack");
    positive(max_seq_len, "max_seq_len");
    if (vocab < 2) throw ConfigError("model config: vocab must be at least 2");
  }

  static ModelConfig standard(Task task) {
    ModelConfig c;
    c.task = task;
    c.vocab = task_vocab(task);
    return c;
  }

  // Small shapes for fast end-to-end gradient verification.
  static ModelConfig micro() {
    ModelConfig c;
    c.d_p = 4;
    c.d_a = 2;
    c.d_v = 2;
    c.emb_dim = 2;
    c.attn_dim = 3;
    c.pfn_inner = 4;
    c.stack = 2;
    c.vocab = 3;
    return c;
  }
};

// Concat-style alignment: score(h, o) = vᵀ tanh(W·[h; o]) with W split into
// a decoder-state block and a source block (the source block stored
// transposed so a whole output matrix scores in one matmul).
template <typename S>
struct AttentionHead {
  Tensor<S> w_state;   // [attn x d_state]
  Tensor<S> w_source;  // [d_source x attn]
  Tensor<S> v;         // [attn x 1]

  static AttentionHead init(int attn, int d_state, int d_source, Rng& rng) {
    AttentionHead h;
    h.w_state = glorot<S>({attn, d_state}, d_state, attn, rng);
    h.w_source = glorot<S>({d_source, attn}, d_source, attn, rng);
    h.v = glorot<S>({attn, 1}, attn, 1, rng);
    return h;
  }

  // Unnormalized alignment scores of every row of `outputs` against `state`.
  Tensor<S> scores(Graph<S>& g, const Tensor<S>& state, const Tensor<S>& outputs) const {
    auto shifted = g.add_row_bias(g.matmul(outputs, w_source), g.matmul(w_state, state));
    auto e = g.matmul(g.tanh(shifted), v);  // [len x 1]
    return g.reshape(e, {outputs.shape[0]});
  }

  void collect(const std::string& prefix, NamedParams<S>& out) const {
    out.emplace_back(prefix + ".w_state", w_state);
    out.emplace_back(prefix + ".w_source", w_source);
    out.emplace_back(prefix + ".v", v);
  }
};

// Per-encoder output matrices for one example, plus what the decoder needs
// to start. Masks are empty when every row is a real position.
template <typename S>
struct EncoderOutputs {
  Tensor<S> patent;    // [n x d_p]
  Tensor<S> assignee;  // [max(1, |ζ_a|) x d_a]
  Tensor<S> inventor;
  Mask mask_patent, mask_assignee, mask_inventor;
  LstmState<S> decoder_init;
};

template <typename S>
struct Prediction {
  Tensor<S> t_gap;  // [1], nonnegative
  Tensor<S> m;      // [vocab], sums to 1

  int category() const {
    return static_cast<int>(std::max_element(m.data->begin(), m.data->end()) - m.data->begin());
  }
};

// Attention weights actually used at each decode step, for inspection and
// contract tests.
struct AttentionTraceRow {
  std::vector<double> alpha_p, alpha_a, alpha_v;
  std::array<double, 3> beta{};
};
struct AttentionTrace {
  std::vector<AttentionTraceRow> rows;
};

enum class DecodeMode { teacher_forced, free_running };

struct TargetEvent {
  double gap = 0.0;
  int category = -1;
};

template <typename S>
struct LossParts {
  Tensor<S> total, time, category;
};

template <typename S>
struct ForecastResult {
  std::vector<Prediction<S>> predictions;
  AttentionTrace trace;
};

// The multi-sequence encoder/decoder citation model: three bidirectional
// encoders (patent chain with categories, assignee and inventor chains
// without), a unidirectional decoder primed from the patent encoder, a
// two-level attention block fusing the three encoded sequences, and
// feed-forward prediction heads for the next gap and category.
template <typename S>
class PcrnnModel {
 public:
  ModelConfig cfg;

  Embedding<S> emb;              // shared by encoder inputs and decoder feedback
  BiLstm<S> enc_p, enc_a, enc_v;
  Tensor<S> null_a, null_v;      // attendable stand-ins for empty aux chains
  LstmStack<S> dec;
  AttentionHead<S> attn_p, attn_a, attn_v;
  AttentionHead<S> beta_p, beta_a, beta_v;
  Tensor<S> v_c;                 // [d_p x (d_p + d_a + d_v + d_p)]
  Pfn<S> pfn;
  Linear<S> head_t, head_m;

  static PcrnnModel init(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    PcrnnModel m;
    m.cfg = cfg;
    const int in_p = 1 + cfg.emb_dim;
    m.emb = Embedding<S>::init(cfg.vocab, cfg.emb_dim, rng);
    m.enc_p = BiLstm<S>::init(cfg.d_p, in_p, cfg.stack, rng);
    m.enc_a = BiLstm<S>::init(cfg.d_a, 1, cfg.stack, rng);
    m.enc_v = BiLstm<S>::init(cfg.d_v, 1, cfg.stack, rng);
    m.null_a = glorot<S>({cfg.d_a}, cfg.d_a, 1, rng);
    m.null_v = glorot<S>({cfg.d_v}, cfg.d_v, 1, rng);
    m.dec = LstmStack<S>::init(cfg.d_p, in_p, cfg.stack, rng);
    m.attn_p = AttentionHead<S>::init(cfg.attn_dim, cfg.d_p, cfg.d_p, rng);
    m.attn_a = AttentionHead<S>::init(cfg.attn_dim, cfg.d_p, cfg.d_a, rng);
    m.attn_v = AttentionHead<S>::init(cfg.attn_dim, cfg.d_p, cfg.d_v, rng);
    m.beta_p = AttentionHead<S>::init(cfg.attn_dim, cfg.d_p, cfg.d_p, rng);
    m.beta_a = AttentionHead<S>::init(cfg.attn_dim, cfg.d_p, cfg.d_a, rng);
    m.beta_v = AttentionHead<S>::init(cfg.attn_dim, cfg.d_p, cfg.d_v, rng);
    const int fused = cfg.d_p + cfg.d_a + cfg.d_v;
    m.v_c = glorot<S>({cfg.d_p, fused + cfg.d_p}, fused + cfg.d_p, cfg.d_p, rng);
    m.pfn = Pfn<S>::init(cfg.d_p, cfg.pfn_inner, rng);
    // The gap head ends in a hard clamp at 0 and regresses targets (normalized
    // inter-event gaps, roughly span/length) that sit far below the hidden
    // activations. Random weights let the early L1 pull drive every
    // pre-activation through the clamp, after which the head is dead with an
    // exactly-zero gradient. Zero weights plus a bias at typical-gap scale
    // start every step at one live value already inside the target band, so
    // gradients stay balanced instead of ratcheting through the clamp.
    m.head_t = Linear<S>::init(1, cfg.d_p, rng);
    std::fill(m.head_t.w.data->begin(), m.head_t.w.data->end(), S(0));
    m.head_t.b.at(0) = S(0.02);
    m.head_m = Linear<S>::init(cfg.vocab, cfg.d_p, rng);
    return m;
  }

  NamedParams<S> parameters() const {
    NamedParams<S> p;
    emb.collect("emb", p);
    enc_p.collect("enc_p", p);
    enc_a.collect("enc_a", p);
    enc_v.collect("enc_v", p);
    p.emplace_back("null_a", null_a);
    p.emplace_back("null_v", null_v);
    dec.collect("dec", p);
    attn_p.collect("attn_p", p);
    attn_a.collect("attn_a", p);
    attn_v.collect("attn_v", p);
    beta_p.collect("beta_p", p);
    beta_a.collect("beta_a", p);
    beta_v.collect("beta_v", p);
    p.emplace_back("v_c", v_c);
    pfn.collect("pfn", p);
    head_t.collect("head_t", p);
    head_m.collect("head_m", p);
    return p;
  }

  void zero_grads() const {
    for (auto& [name, t] : parameters()) {
      Tensor<S> view = t;
      view.zero_grad();
    }
  }

  // ---- encoders ------------------------------------------------------------

  // Observed patent events -> [n x d_p] outputs plus decoder priming state.
  // Input at step k is [gap; embedding(category)].
  std::pair<Tensor<S>, LstmState<S>> encode_patent(Graph<S>& g,
                                                   const std::vector<CitationEvent>& observed) const {
    const int n = static_cast<int>(observed.size());
    if (n < 1) throw ContractError("patent encoder: need at least one observation");
    if (n > cfg.max_seq_len)
      throw ContractError("patent encoder: " + std::to_string(n) + " observations exceed limit " +
                          std::to_string(cfg.max_seq_len));
    std::vector<Tensor<S>> inputs;
    inputs.reserve(n);
    double prev = observed[0].t;
    for (int k = 0; k < n; ++k) {
      if (observed[k].t < prev)
        throw OrderingError("patent encoder: events out of order at step " + std::to_string(k));
      const double gap = k == 0 ? 0.0 : observed[k].t - prev;
      prev = observed[k].t;
      inputs.push_back(step_input(g, gap, observed[k].category(cfg.task)));
    }
    auto res = enc_p.encode(g, inputs);
    return {stack_rows(g, res.outputs), std::move(res.final_fwd)};
  }

  // Auxiliary timestamps -> [len x d] outputs; an empty chain becomes the
  // learned null vector as a single attendable position.
  Tensor<S> encode_aux(Graph<S>& g, const std::vector<double>& times, bool assignee) const {
    const Tensor<S>& null_vec = assignee ? null_a : null_v;
    const BiLstm<S>& enc = assignee ? enc_a : enc_v;
    if (times.empty()) return g.reshape(null_vec, {1, null_vec.shape[0]});
    std::vector<Tensor<S>> inputs;
    inputs.reserve(times.size());
    double prev = times[0];
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (times[k] < prev)
        throw OrderingError("auxiliary encoder: events out of order at step " + std::to_string(k));
      const double gap = k == 0 ? 0.0 : times[k] - prev;
      prev = times[k];
      inputs.push_back(Tensor<S>::from({1}, {static_cast<S>(gap)}));
    }
    return stack_rows(g, enc.encode(g, inputs).outputs);
  }

  EncoderOutputs<S> encode(Graph<S>& g, const TrainingExample& ex) const {
    EncoderOutputs<S> out;
    std::vector<CitationEvent> observed(ex.events.begin(), ex.events.begin() + ex.n);
    auto [o_p, prime] = encode_patent(g, observed);
    out.patent = o_p;
    out.decoder_init = std::move(prime);
    out.assignee = encode_aux(g, ex.assignee_events, true);
    out.inventor = encode_aux(g, ex.inventor_events, false);
    return out;
  }

  // ---- attention -----------------------------------------------------------

  // Context vector and attention weights of one encoder's outputs against the
  // decoder state. Masked rows get weight exactly 0.
  std::pair<Tensor<S>, Tensor<S>> attend_context(Graph<S>& g, const AttentionHead<S>& head,
                                                 const Tensor<S>& state, const Tensor<S>& outputs,
                                                 const Mask* mask = nullptr) const {
    auto alpha = g.softmax(head.scores(g, state, outputs), mask);
    auto ctx = g.reshape(g.matmul(g.reshape(alpha, {1, outputs.shape[0]}), outputs),
                         {outputs.shape[1]});
    return {ctx, alpha};
  }

  // Second attention level: score each context against the decoder state with
  // its own head, softmax over the three scores, and concatenate the weighted
  // contexts.
  std::pair<Tensor<S>, Tensor<S>> fuse_contexts(Graph<S>& g, const Tensor<S>& state,
                                                const Tensor<S>& c_p, const Tensor<S>& c_a,
                                                const Tensor<S>& c_v) const {
    auto s_p = beta_p.scores(g, state, g.reshape(c_p, {1, c_p.shape[0]}));
    auto s_a = beta_a.scores(g, state, g.reshape(c_a, {1, c_a.shape[0]}));
    auto s_v = beta_v.scores(g, state, g.reshape(c_v, {1, c_v.shape[0]}));
    auto beta = g.softmax(g.concat({s_p, s_a, s_v}));
    auto fused = g.concat({g.scale(c_p, g.pick(beta, 0)), g.scale(c_a, g.pick(beta, 1)),
                           g.scale(c_v, g.pick(beta, 2))});
    return {fused, beta};
  }

  Tensor<S> attentional_state(Graph<S>& g, const Tensor<S>& fused, const Tensor<S>& state) const {
    return g.relu(g.matmul(v_c, g.concat({fused, state})));
  }

  // ---- prediction ----------------------------------------------------------

  Prediction<S> predict_heads(Graph<S>& g, const Tensor<S>& attentional) const {
    auto refined = pfn.apply(g, attentional);
    Prediction<S> p;
    p.t_gap = g.relu(head_t.apply(g, refined));
    p.m = g.softmax(head_m.apply(g, refined));
    return p;
  }

  // One decoder step: embed the previous event, advance the recurrent stack,
  // attend over all three encoders, fuse, and predict.
  Prediction<S> decode_step(Graph<S>& g, double prev_gap, int prev_category, LstmState<S>& state,
                            const EncoderOutputs<S>& enc, AttentionTrace* trace = nullptr) const {
    auto h_d = dec.step(g, step_input(g, prev_gap, prev_category), state);
    auto [c_p, a_p] = attend_context(g, attn_p, h_d, enc.patent,
                                     enc.mask_patent.empty() ? nullptr : &enc.mask_patent);
    auto [c_a, a_a] = attend_context(g, attn_a, h_d, enc.assignee,
                                     enc.mask_assignee.empty() ? nullptr : &enc.mask_assignee);
    auto [c_v, a_v] = attend_context(g, attn_v, h_d, enc.inventor,
                                     enc.mask_inventor.empty() ? nullptr : &enc.mask_inventor);
    auto [fused, beta] = fuse_contexts(g, h_d, c_p, c_a, c_v);
    auto pred = predict_heads(g, attentional_state(g, fused, h_d));
    if (trace) {
      AttentionTraceRow row;
      row.alpha_p.assign(a_p.data->begin(), a_p.data->end());
      row.alpha_a.assign(a_a.data->begin(), a_a.data->end());
      row.alpha_v.assign(a_v.data->begin(), a_v.data->end());
      for (int i = 0; i < 3; ++i) row.beta[i] = static_cast<double>(beta.at(i));
      trace->rows.push_back(std::move(row));
    }
    return pred;
  }

  // ---- forecasting and loss --------------------------------------------------

  // Generates `horizon` predictions starting after observation n. Teacher
  // forcing feeds true targets back as decoder inputs (training); free
  // running feeds the model's own (t̂, argmax m̂).
  ForecastResult<S> forecast(Graph<S>& g, const TrainingExample& ex, int horizon,
                             DecodeMode mode) const {
    if (horizon < 1) throw ContractError("forecast: horizon must be at least 1");
    if (mode == DecodeMode::teacher_forced &&
        ex.n + horizon > static_cast<int>(ex.events.size()))
      throw ContractError("forecast: teacher forcing needs " + std::to_string(ex.n + horizon) +
                          " events, chain has " + std::to_string(ex.events.size()));
    auto enc = encode(g, ex);
    LstmState<S> state = enc.decoder_init;
    ForecastResult<S> res;
    double prev_gap = ex.gap(ex.n - 1);
    int prev_cat = ex.events[ex.n - 1].category(cfg.task);
    for (int j = 0; j < horizon; ++j) {
      auto pred = decode_step(g, prev_gap, prev_cat, state, enc, &res.trace);
      if (mode == DecodeMode::teacher_forced) {
        prev_gap = ex.target_gap(j);
        prev_cat = ex.target(j).category(cfg.task);
      } else {
        prev_gap = static_cast<double>(pred.t_gap.value());
        prev_cat = pred.category();
      }
      res.predictions.push_back(std::move(pred));
    }
    return res;
  }

  // Joint objective: category cross-entropy plus absolute time error, summed
  // over the horizon.
  LossParts<S> loss(Graph<S>& g, const std::vector<Prediction<S>>& preds,
                    const std::vector<TargetEvent>& targets) const {
    if (preds.empty() || preds.size() != targets.size())
      throw ContractError("loss: " + std::to_string(preds.size()) + " predictions for " +
                          std::to_string(targets.size()) + " targets");
    Tensor<S> time_sum, cat_sum;
    for (std::size_t j = 0; j < preds.size(); ++j) {
      if (targets[j].category < 0 || targets[j].category >= cfg.vocab)
        throw VocabError("loss: target category " + std::to_string(targets[j].category) +
                         " outside vocabulary of " + std::to_string(cfg.vocab));
      auto t_err = g.abs(g.sub(preds[j].t_gap,
                               Tensor<S>::from({1}, {static_cast<S>(targets[j].gap)})));
      auto ce = g.neg(g.log_floor(g.pick(preds[j].m, targets[j].category)));
      time_sum = j == 0 ? t_err : g.add(time_sum, t_err);
      cat_sum = j == 0 ? ce : g.add(cat_sum, ce);
    }
    return {g.add(time_sum, cat_sum), time_sum, cat_sum};
  }

  std::vector<TargetEvent> targets_of(const TrainingExample& ex, int horizon) const {
    if (ex.n + horizon > static_cast<int>(ex.events.size()))
      throw ContractError("targets: horizon exceeds available events");
    std::vector<TargetEvent> ts;
    for (int j = 0; j < horizon; ++j)
      ts.push_back({ex.target_gap(j), ex.target(j).category(cfg.task)});
    return ts;
  }

 private:
  Tensor<S> step_input(Graph<S>& g, double gap, int category) const {
    return g.concat({Tensor<S>::from({1}, {static_cast<S>(gap)}), emb.lookup(g, category)});
  }

  static Tensor<S> stack_rows(Graph<S>& g, const std::vector<Tensor<S>>& rows) {
    std::vector<Tensor<S>> as_matrices;
    as_matrices.reserve(rows.size());
    for (const auto& r : rows) as_matrices.push_back(g.reshape(r, {1, r.shape[0]}));
    return g.concat(as_matrices, 0);
  }
};

}  // namespace pcrnn
