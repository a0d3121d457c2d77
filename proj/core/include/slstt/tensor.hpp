#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "slstt/error.hpp"

namespace slstt {

class Tape;
class Rng;

using Shape = std::vector<int>;

std::string shape_str(const Shape& s);

/// Dense row-major tensor of doubles. Immutable after construction: every
/// operation returns a fresh tensor, so values are safe to share across
/// threads. A tensor participates in gradient computation iff it was created
/// through a Tape (watch() or as the result of an op with tracked inputs).
class Tensor {
public:
    Tensor() = default;
    Tensor(Shape shape, std::vector<double> values);

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double value);
    static Tensor scalar(double value);
    static Tensor randn(Shape shape, Rng& rng, double stddev);
    /// Normal draw truncated at cutoff_sigmas, the usual transformer init.
    static Tensor truncated_normal(Shape shape, Rng& rng, double stddev, double cutoff_sigmas);

    const Shape& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    std::size_t size() const;
    bool empty() const { return !data_; }

    const std::vector<double>& values() const;
    /// Shared handle to the immutable storage (used by backward closures).
    std::shared_ptr<const std::vector<double>> data_ptr() const { return data_; }
    double operator()(int i) const;
    double operator()(int i, int j) const;
    double item() const;  // requires size() == 1

    bool requires_grad() const { return node_ >= 0; }
    int node() const { return node_; }
    Tape* tape() const { return tape_; }

    /// Throws if any element is NaN or Inf.
    void ensure_finite(const std::string& what) const;

private:
    Shape shape_;
    std::shared_ptr<const std::vector<double>> data_;
    Tape* tape_ = nullptr;
    int node_ = -1;

    friend class Tape;
};

/// Reverse-mode gradient tape. Ops append nodes in creation order, which is
/// by construction a topological order; backward() walks it in reverse and
/// accumulates one gradient buffer per touched node. One tape per training
/// worker; a tape is not thread safe.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, const double* out_grad)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Registers a leaf (parameter) on the tape. Returns a tracked tensor
    /// sharing the same storage.
    Tensor watch(const Tensor& t);

    /// Records an op result. `backward` receives the output gradient and
    /// accumulates into parent buffers via grad_buffer().
    void record(Tensor& out, BackwardFn backward);

    /// Runs reverse accumulation from a scalar loss.
    void backward(const Tensor& loss);

    /// Gradient of the last backward() w.r.t. a tracked tensor. Zero tensor
    /// of the same shape if the loss did not depend on it.
    Tensor grad(const Tensor& t) const;

    int node_count() const { return static_cast<int>(nodes_.size()); }

    /// Node id of `t` on this tape, -1 for constants or foreign tensors.
    int node_of(const Tensor& t) const {
        return t.tape_ == this ? t.node_ : -1;
    }

    double* grad_buffer(int node);

private:
    struct Node {
        BackwardFn backward;
        std::size_t size = 0;
    };

    std::vector<Node> nodes_;
    std::vector<std::vector<double>> grads_;
};

// ---------------------------------------------------------------------------
// Differentiable ops. All shape checks are explicit and fail fast; there is
// no broadcasting. Every op verifies its output is finite.
// ---------------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);         // same shape
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);         // elementwise
Tensor scale(const Tensor& a, double s);
Tensor neg(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);      // [m,k] x [k,n]
Tensor transpose(const Tensor& a);                    // rank 2
Tensor vecmat(const Tensor& v, const Tensor& m);      // [k] x [k,n] -> [n]
Tensor add_row_vector(const Tensor& m, const Tensor& v);  // [r,c] + [c] per row

Tensor concat_rows(const std::vector<Tensor>& parts); // rank 2, same cols
Tensor concat_cols(const std::vector<Tensor>& parts); // rank 2, same rows
Tensor concat_vec(const Tensor& a, const Tensor& b);  // rank 1
Tensor row(const Tensor& m, int i);                   // [r,c] -> [c]
Tensor reshape(const Tensor& t, Shape shape);

Tensor softmax(const Tensor& t, int axis);
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps);

enum class Activation { Gelu, Sigmoid, Tanh };
Tensor activate(const Tensor& x, Activation kind);
Tensor gelu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh_op(const Tensor& x);

Tensor sum(const Tensor& t);                          // -> scalar [1]
Tensor pick(const Tensor& v, int i);                  // rank 1 -> scalar [1]
Tensor log_clamped(const Tensor& t, double eps);

// ---------------------------------------------------------------------------
// Named tensor container: the model's flat parameter store. Preserves
// insertion order so serialization and optimizer traversal are deterministic.
// ---------------------------------------------------------------------------

enum class Dtype : std::uint8_t { F32 = 0, F64 = 1 };

class NamedTensors {
public:
    struct Entry {
        std::string name;
        Tensor tensor;
        Dtype dtype = Dtype::F64;
        bool decay = true;  // weight decay participates; off for biases/LN/embeddings
    };

    void add(const std::string& name, Tensor t, bool decay = true, Dtype dtype = Dtype::F64);
    bool contains(const std::string& name) const;
    const Tensor& get(const std::string& name) const;
    void set(const std::string& name, Tensor t);

    std::size_t count() const { return entries_.size(); }
    const Entry& entry(std::size_t i) const { return entries_[i]; }
    Entry& entry(std::size_t i) { return entries_[i]; }
    const std::vector<Entry>& entries() const { return entries_; }

    std::size_t total_elements() const;

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Tracked view of a parameter container: every tensor re-registered as a
/// leaf on `tape`, sharing storage with `params`.
NamedTensors watch_all(Tape& tape, const NamedTensors& params);

}  // namespace slstt
