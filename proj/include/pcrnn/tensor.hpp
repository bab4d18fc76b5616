#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "pcrnn/errors.hpp"

namespace pcrnn {

// Dense row-major tensor handle. Copies share the underlying value and
// gradient buffers; a Tensor is a cheap view, not a deep value.
//
// A tensor is a *leaf* until some Graph op produces it, at which point it
// records its producing node and owning graph. Gradients of leaves accumulate
// across backward passes until zero_grad(); gradients of graph-produced
// tensors are reset at the start of every backward pass.
template <typename S>
struct Tensor {
  std::vector<int> shape;
  std::shared_ptr<std::vector<S>> data;
  std::shared_ptr<std::vector<S>> grad;  // allocated iff requires_grad
  bool requires_grad = false;
  int node = -1;                  // producing node index, -1 for leaves
  const void* owner = nullptr;    // graph that produced this tensor

  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false) {
    Tensor t;
    t.shape = std::move(shape);
    std::size_t n = 1;
    for (int d : t.shape) {
      if (d <= 0) throw ShapeError("tensor dimension must be positive, got " + std::to_string(d));
      n *= static_cast<std::size_t>(d);
    }
    t.data = std::make_shared<std::vector<S>>(n, S(0));
    t.requires_grad = requires_grad;
    if (requires_grad) t.grad = std::make_shared<std::vector<S>>(n, S(0));
    return t;
  }

  static Tensor from(std::vector<int> shape, std::vector<S> values, bool requires_grad = false) {
    Tensor t = zeros(std::move(shape), requires_grad);
    if (values.size() != t.data->size())
      throw ShapeError("tensor init: " + std::to_string(values.size()) + " values for shape " +
                       t.shape_str());
    *t.data = std::move(values);
    return t;
  }

  static Tensor scalar(S v, bool requires_grad = false) {
    return from({1}, {v}, requires_grad);
  }

  std::size_t numel() const { return data ? data->size() : 0; }
  int ndim() const { return static_cast<int>(shape.size()); }
  bool is_leaf() const { return node < 0; }

  S& at(std::size_t i) { return (*data)[i]; }
  S at(std::size_t i) const { return (*data)[i]; }
  S& at2(int r, int c) { return (*data)[static_cast<std::size_t>(r) * shape[1] + c]; }
  S at2(int r, int c) const { return (*data)[static_cast<std::size_t>(r) * shape[1] + c]; }

  S value() const {
    if (numel() != 1) throw ShapeError("value(): tensor " + shape_str() + " is not a scalar");
    return (*data)[0];
  }

  void zero_grad() {
    if (grad) std::fill(grad->begin(), grad->end(), S(0));
  }

  std::string shape_str() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
    os << ']';
    return os.str();
  }
};

// Optional position mask for softmax/attention: nonzero = usable position.
using Mask = std::vector<std::uint8_t>;

// Recorded computation: every op appends one node, so insertion order is a
// topological order and backward is a single reverse sweep over the tape.
template <typename S>
class Graph {
 public:
  using T = Tensor<S>;

  struct Node {
    const char* op;
    std::vector<T> inputs;
    T output;
    std::function<void()> backprop;  // reads output.grad, accumulates input grads
  };

  std::size_t size() const { return nodes_.size(); }
  const Node& node(std::size_t i) const { return nodes_[i]; }

  // ---- recorded operations -------------------------------------------------

  // C = A·B for A[m×k] with B[k×n] or B[k] (matrix-vector).
  T matmul(const T& a, const T& b) {
    check_owned(a, "matmul");
    check_owned(b, "matmul");
    if (a.ndim() != 2 || (b.ndim() != 2 && b.ndim() != 1))
      throw ShapeError("matmul: need matrix by matrix-or-vector, got " + a.shape_str() + " by " +
                       b.shape_str());
    const int m = a.shape[0], k = a.shape[1];
    if (b.shape[0] != k)
      throw ShapeError("matmul: inner dimensions disagree, " + a.shape_str() + " by " + b.shape_str());
    if (b.ndim() == 1) {
      T out = make_output({m}, {a, b});
      const S* av = a.data->data();
      const S* bv = b.data->data();
      S* ov = out.data->data();
      for (int i = 0; i < m; ++i) {
        S acc = 0;
        const S* arow = av + static_cast<std::size_t>(i) * k;
        for (int r = 0; r < k; ++r) acc += arow[r] * bv[r];
        ov[i] = acc;
      }
      record("matmul", {a, b}, out, [a, b, out, m, k]() {
        const S* og = out.grad->data();
        const S* av = a.data->data();
        const S* bv = b.data->data();
        if (a.grad) {
          S* ag = a.grad->data();
          for (int i = 0; i < m; ++i) {
            const S gi = og[i];
            S* growi = ag + static_cast<std::size_t>(i) * k;
            for (int r = 0; r < k; ++r) growi[r] += gi * bv[r];
          }
        }
        if (b.grad) {
          S* bg = b.grad->data();
          for (int i = 0; i < m; ++i) {
            const S gi = og[i];
            const S* arow = av + static_cast<std::size_t>(i) * k;
            for (int r = 0; r < k; ++r) bg[r] += gi * arow[r];
          }
        }
      });
      return out;
    }
    const int n = b.shape[1];
    T out = make_output({m, n}, {a, b});
    const S* av = a.data->data();
    const S* bv = b.data->data();
    S* ov = out.data->data();
    for (int i = 0; i < m; ++i) {
      S* orow = ov + static_cast<std::size_t>(i) * n;
      const S* arow = av + static_cast<std::size_t>(i) * k;
      for (int r = 0; r < k; ++r) {
        const S ar = arow[r];
        const S* brow = bv + static_cast<std::size_t>(r) * n;
        for (int j = 0; j < n; ++j) orow[j] += ar * brow[j];
      }
    }
    record("matmul", {a, b}, out, [a, b, out, m, k, n]() {
      const S* og = out.grad->data();
      const S* av = a.data->data();
      const S* bv = b.data->data();
      if (a.grad) {  // dA = dC·Bᵀ
        S* ag = a.grad->data();
        for (int i = 0; i < m; ++i) {
          const S* grow = og + static_cast<std::size_t>(i) * n;
          S* arow = ag + static_cast<std::size_t>(i) * k;
          for (int r = 0; r < k; ++r) {
            const S* brow = bv + static_cast<std::size_t>(r) * n;
            S acc = 0;
            for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
            arow[r] += acc;
          }
        }
      }
      if (b.grad) {  // dB = Aᵀ·dC
        S* bg = b.grad->data();
        for (int i = 0; i < m; ++i) {
          const S* arow = av + static_cast<std::size_t>(i) * k;
          const S* grow = og + static_cast<std::size_t>(i) * n;
          for (int r = 0; r < k; ++r) {
            const S ar = arow[r];
            S* brow = bg + static_cast<std::size_t>(r) * n;
            for (int j = 0; j < n; ++j) brow[j] += ar * grow[j];
          }
        }
      }
    });
    return out;
  }

  T add(const T& a, const T& b) { return binary("add", a, b); }
  T sub(const T& a, const T& b) { return binary("sub", a, b); }
  T mul(const T& a, const T& b) { return binary("mul", a, b); }

  // M[m×n] + bias[n] broadcast across rows. The only broadcast this kernel
  // supports.
  T add_row_bias(const T& m, const T& bias) {
    check_owned(m, "add_row_bias");
    check_owned(bias, "add_row_bias");
    if (m.ndim() != 2 || bias.ndim() != 1 || bias.shape[0] != m.shape[1])
      throw ShapeError("add_row_bias: " + m.shape_str() + " with bias " + bias.shape_str());
    const int rows = m.shape[0], cols = m.shape[1];
    T out = make_output({rows, cols}, {m, bias});
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) out.at2(i, j) = m.at2(i, j) + bias.at(j);
    record("add_row_bias", {m, bias}, out, [m, bias, out, rows, cols]() {
      if (m.grad)
        for (std::size_t i = 0; i < out.grad->size(); ++i) (*m.grad)[i] += (*out.grad)[i];
      if (bias.grad)
        for (int i = 0; i < rows; ++i)
          for (int j = 0; j < cols; ++j)
            (*bias.grad)[j] += (*out.grad)[static_cast<std::size_t>(i) * cols + j];
    });
    return out;
  }

  T tanh(const T& x) {
    return unary("tanh", x, [](S v) { return std::tanh(v); },
                 [](S, S y) { return S(1) - y * y; });
  }

  T sigmoid(const T& x) {
    return unary("sigmoid", x, [](S v) { return S(1) / (S(1) + std::exp(-v)); },
                 [](S, S y) { return y * (S(1) - y); });
  }

  T relu(const T& x) {
    return unary("relu", x, [](S v) { return v > S(0) ? v : S(0); },
                 [](S v, S) { return v > S(0) ? S(1) : S(0); });
  }

  T abs(const T& x) {
    return unary("abs", x, [](S v) { return std::fabs(v); },
                 [](S v, S) { return v > S(0) ? S(1) : (v < S(0) ? S(-1) : S(0)); });
  }

  T neg(const T& x) {
    return unary("neg", x, [](S v) { return -v; }, [](S, S) { return S(-1); });
  }

  // log(max(x, floor)); below the floor the gradient is 0.
  T log_floor(const T& x, S floor = S(1e-12)) {
    return unary("log_floor", x,
                 [floor](S v) { return std::log(v > floor ? v : floor); },
                 [floor](S v, S) { return v > floor ? S(1) / v : S(0); });
  }

  // Numerically stable softmax over a vector; masked positions come out
  // exactly 0 and pass no gradient.
  T softmax(const T& x, const Mask* mask = nullptr) {
    check_owned(x, "softmax");
    if (x.ndim() != 1) throw ShapeError("softmax: need a vector, got " + x.shape_str());
    const int n = x.shape[0];
    if (mask && static_cast<int>(mask->size()) != n)
      throw ShapeError("softmax: mask length " + std::to_string(mask->size()) + " for " + x.shape_str());
    S hi = -std::numeric_limits<S>::infinity();
    int live = 0;
    for (int i = 0; i < n; ++i)
      if (!mask || (*mask)[i]) {
        hi = std::max(hi, x.at(i));
        ++live;
      }
    if (live == 0) throw MaskError("softmax: all positions masked");
    T out = make_output({n}, {x});
    S denom = 0;
    for (int i = 0; i < n; ++i) {
      if (!mask || (*mask)[i]) {
        out.at(i) = std::exp(x.at(i) - hi);
        denom += out.at(i);
      } else {
        out.at(i) = S(0);
      }
    }
    for (int i = 0; i < n; ++i) out.at(i) /= denom;
    Mask mcopy = mask ? *mask : Mask();
    record("softmax", {x}, out, [x, out, n, mcopy]() {
      if (!x.grad) return;
      // dx_i = y_i (g_i - Σ_k y_k g_k)
      S dot = 0;
      for (int i = 0; i < n; ++i) dot += (*out.data)[i] * (*out.grad)[i];
      for (int i = 0; i < n; ++i) {
        if (!mcopy.empty() && !mcopy[i]) continue;
        (*x.grad)[i] += (*out.data)[i] * ((*out.grad)[i] - dot);
      }
    });
    return out;
  }

  // Concatenates vectors, or matrices along the given axis.
  T concat(const std::vector<T>& parts, int axis = 0) {
    if (parts.empty()) throw ContractError("concat: no inputs");
    for (const T& p : parts) check_owned(p, "concat");
    const int nd = parts[0].ndim();
    if (axis < 0 || axis >= nd)
      throw ShapeError("concat: axis " + std::to_string(axis) + " for " + parts[0].shape_str());
    std::vector<int> shape = parts[0].shape;
    int total = 0;
    for (const T& p : parts) {
      if (p.ndim() != nd) throw ShapeError("concat: rank mismatch " + p.shape_str());
      for (int d = 0; d < nd; ++d)
        if (d != axis && p.shape[d] != shape[d])
          throw ShapeError("concat: off-axis dims differ, " + parts[0].shape_str() + " vs " + p.shape_str());
      total += p.shape[axis];
    }
    shape[axis] = total;
    T out = make_output(shape, parts);
    // Copy in, remembering each part's span for the backward slice routing.
    if (nd == 1 || axis == 0) {
      std::size_t off = 0;
      for (const T& p : parts) {
        std::copy(p.data->begin(), p.data->end(), out.data->begin() + off);
        off += p.numel();
      }
      record("concat", parts, out, [parts, out]() {
        std::size_t off = 0;
        for (const T& p : parts) {
          if (p.grad)
            for (std::size_t i = 0; i < p.numel(); ++i) (*p.grad)[i] += (*out.grad)[off + i];
          off += p.numel();
        }
      });
    } else {  // 2-D, axis 1
      const int rows = shape[0], cols = shape[1];
      int coff = 0;
      for (const T& p : parts) {
        for (int i = 0; i < rows; ++i)
          for (int j = 0; j < p.shape[1]; ++j) out.at2(i, coff + j) = p.at2(i, j);
        coff += p.shape[1];
      }
      record("concat", parts, out, [parts, out, rows, cols]() {
        int coff = 0;
        for (const T& p : parts) {
          if (p.grad)
            for (int i = 0; i < rows; ++i)
              for (int j = 0; j < p.shape[1]; ++j)
                (*p.grad)[static_cast<std::size_t>(i) * p.shape[1] + j] +=
                    (*out.grad)[static_cast<std::size_t>(i) * cols + coff + j];
          coff += p.shape[1];
        }
      });
    }
    return out;
  }

  // Contiguous range of a vector.
  T slice(const T& x, int begin, int len) {
    check_owned(x, "slice");
    if (x.ndim() != 1) throw ShapeError("slice: need a vector, got " + x.shape_str());
    if (begin < 0 || len <= 0 || begin + len > x.shape[0])
      throw ShapeError("slice: [" + std::to_string(begin) + ", " + std::to_string(begin + len) +
                       ") of " + x.shape_str());
    T out = make_output({len}, {x});
    std::copy(x.data->begin() + begin, x.data->begin() + begin + len, out.data->begin());
    record("slice", {x}, out, [x, out, begin, len]() {
      if (!x.grad) return;
      for (int i = 0; i < len; ++i) (*x.grad)[begin + i] += (*out.grad)[i];
    });
    return out;
  }

  // Row r of a matrix; gradient lands only on that row.
  T row(const T& m, int r) {
    check_owned(m, "row");
    if (m.ndim() != 2) throw ShapeError("row: need a matrix, got " + m.shape_str());
    if (r < 0 || r >= m.shape[0])
      throw ShapeError("row: index " + std::to_string(r) + " of " + m.shape_str());
    const int cols = m.shape[1];
    T out = make_output({cols}, {m});
    for (int j = 0; j < cols; ++j) out.at(j) = m.at2(r, j);
    record("row", {m}, out, [m, out, r, cols]() {
      if (!m.grad) return;
      for (int j = 0; j < cols; ++j) (*m.grad)[static_cast<std::size_t>(r) * cols + j] += (*out.grad)[j];
    });
    return out;
  }

  // Element i of a vector, as a scalar tensor.
  T pick(const T& x, int i) {
    check_owned(x, "pick");
    if (x.ndim() != 1) throw ShapeError("pick: need a vector, got " + x.shape_str());
    if (i < 0 || i >= x.shape[0])
      throw ShapeError("pick: index " + std::to_string(i) + " of " + x.shape_str());
    T out = make_output({1}, {x});
    out.at(0) = x.at(i);
    record("pick", {x}, out, [x, out, i]() {
      if (x.grad) (*x.grad)[i] += (*out.grad)[0];
    });
    return out;
  }

  // x · s for scalar tensor s (1 element); gradient flows to both.
  T scale(const T& x, const T& s) {
    check_owned(x, "scale");
    check_owned(s, "scale");
    if (s.numel() != 1) throw ShapeError("scale: scalar operand has shape " + s.shape_str());
    T out = make_output(x.shape, {x, s});
    const S sv = s.at(0);
    for (std::size_t i = 0; i < x.numel(); ++i) out.at(i) = x.at(i) * sv;
    record("scale", {x, s}, out, [x, s, out, sv]() {
      if (x.grad)
        for (std::size_t i = 0; i < x.numel(); ++i) (*x.grad)[i] += (*out.grad)[i] * sv;
      if (s.grad) {
        S acc = 0;
        for (std::size_t i = 0; i < x.numel(); ++i) acc += (*out.grad)[i] * (*x.data)[i];
        (*s.grad)[0] += acc;
      }
    });
    return out;
  }

  // Sum of all elements, as a scalar tensor.
  T sum(const T& x) {
    check_owned(x, "sum");
    T out = make_output({1}, {x});
    S acc = 0;
    for (std::size_t i = 0; i < x.numel(); ++i) acc += x.at(i);
    out.at(0) = acc;
    record("sum", {x}, out, [x, out]() {
      if (!x.grad) return;
      const S g = (*out.grad)[0];
      for (std::size_t i = 0; i < x.numel(); ++i) (*x.grad)[i] += g;
    });
    return out;
  }

  // Same elements, new shape; gradient passes through unchanged.
  T reshape(const T& x, std::vector<int> shape) {
    check_owned(x, "reshape");
    std::size_t n = 1;
    std::string want = "[";
    for (std::size_t d = 0; d < shape.size(); ++d) {
      n *= static_cast<std::size_t>(shape[d] > 0 ? shape[d] : 0);
      want += (d ? "x" : "") + std::to_string(shape[d]);
    }
    if (n != x.numel())
      throw ShapeError("reshape: " + x.shape_str() + " cannot become " + want + "]");
    T out = make_output(std::move(shape), {x});
    *out.data = *x.data;
    record("reshape", {x}, out, [x, out]() {
      if (!x.grad) return;
      for (std::size_t i = 0; i < x.numel(); ++i) (*x.grad)[i] += (*out.grad)[i];
    });
    return out;
  }

  // ---- backward ------------------------------------------------------------

  // Reverse sweep from a scalar seed produced by this graph. Leaf gradients
  // accumulate; graph-produced gradients are reset first, so repeated
  // backward calls behave like independent passes over the same tape.
  void backward(const T& seed) {
    if (seed.owner != this || seed.node < 0)
      throw GraphError("backward: seed was not produced by this graph");
    if (seed.numel() != 1)
      throw GraphError("backward: seed must be scalar, got " + seed.shape_str());
    for (Node& nd : nodes_) nd.output.zero_grad();
    if (!seed.grad) return;  // nothing on the tape requires gradients
    (*seed.grad)[0] = S(1);
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      if (nodes_[i].output.grad) nodes_[i].backprop();
    }
  }

 private:
  std::vector<Node> nodes_;

  void check_owned(const T& t, const char* op) const {
    if (!t.data) throw GraphError(std::string(op) + ": empty tensor");
    if (t.owner && t.owner != this)
      throw GraphError(std::string(op) + ": input belongs to a different graph");
  }

  T make_output(std::vector<int> shape, const std::vector<T>& inputs) {
    bool rg = false;
    for (const T& t : inputs) rg = rg || t.requires_grad;
    T out = T::zeros(std::move(shape), rg);
    out.owner = this;
    out.node = static_cast<int>(nodes_.size());
    return out;
  }

  void record(const char* op, std::vector<T> inputs, const T& out, std::function<void()> backprop) {
    nodes_.push_back(Node{op, std::move(inputs), out, std::move(backprop)});
  }

  T binary(const char* op, const T& a, const T& b) {
    check_owned(a, op);
    check_owned(b, op);
    if (a.shape != b.shape)
      throw ShapeError(std::string(op) + ": shapes " + a.shape_str() + " and " + b.shape_str());
    T out = make_output(a.shape, {a, b});
    const std::size_t n = a.numel();
    const char k = op[0] == 'a' ? '+' : (op[0] == 's' ? '-' : '*');
    for (std::size_t i = 0; i < n; ++i) {
      const S x = a.at(i), y = b.at(i);
      out.at(i) = k == '+' ? x + y : (k == '-' ? x - y : x * y);
    }
    record(op, {a, b}, out, [a, b, out, n, k]() {
      for (std::size_t i = 0; i < n; ++i) {
        const S g = (*out.grad)[i];
        if (a.grad) (*a.grad)[i] += k == '*' ? g * (*b.data)[i] : g;
        if (b.grad) (*b.grad)[i] += k == '*' ? g * (*a.data)[i] : (k == '-' ? -g : g);
      }
    });
    return out;
  }

  template <typename F, typename DF>
  T unary(const char* op, const T& x, F f, DF df) {
    check_owned(x, op);
    T out = make_output(x.shape, {x});
    const std::size_t n = x.numel();
    for (std::size_t i = 0; i < n; ++i) out.at(i) = f(x.at(i));
    record(op, {x}, out, [x, out, n, df]() {
      if (!x.grad) return;
      for (std::size_t i = 0; i < n; ++i)
        (*x.grad)[i] += (*out.grad)[i] * df((*x.data)[i], (*out.data)[i]);
    });
    return out;
  }
};

using Tensor32 = Tensor<float>;
using Tensor64 = Tensor<double>;

}  // namespace pcrnn
