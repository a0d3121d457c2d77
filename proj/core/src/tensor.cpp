#include "slstt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "slstt/rng.hpp"

namespace slstt {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

std::size_t shape_product(const Shape& s) {
    std::size_t n = 1;
    for (int d : s) {
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

void check_shape_valid(const Shape& s) {
    for (int d : s) {
        require(d >= 1, "tensor: dimension sizes must be positive, got shape " + shape_str(s));
    }
}

void check_finite(const std::vector<double>& vals, const std::string& what) {
    for (double v : vals) {
        if (!std::isfinite(v)) {
            fail(what + ": non-finite value produced");
        }
    }
}

/// Resolves the tape shared by the tracked inputs (nullptr if none tracked).
/// Mixing tensors from two different tapes is an error.
Tape* tape_of(std::initializer_list<const Tensor*> ts) {
    Tape* tape = nullptr;
    for (const Tensor* t : ts) {
        if (t->tape() != nullptr) {
            require(tape == nullptr || tape == t->tape(),
                    "op: inputs belong to different gradient tapes");
            tape = t->tape();
        }
    }
    return tape;
}

}  // namespace

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        os << (i ? "," : "") << s[i];
    }
    os << "]";
    return os.str();
}

// ---------------------------------------------------------------------------
// Tensor
// ---------------------------------------------------------------------------

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)) {
    check_shape_valid(shape_);
    require(shape_product(shape_) == values.size(),
            "tensor: shape " + shape_str(shape_) + " does not match data length " +
                std::to_string(values.size()));
    check_finite(values, "tensor");
    data_ = std::make_shared<const std::vector<double>>(std::move(values));
}

Tensor Tensor::zeros(Shape shape) {
    check_shape_valid(shape);
    std::vector<double> vals(shape_product(shape), 0.0);
    return Tensor(std::move(shape), std::move(vals));
}

Tensor Tensor::full(Shape shape, double value) {
    check_shape_valid(shape);
    std::vector<double> vals(shape_product(shape), value);
    return Tensor(std::move(shape), std::move(vals));
}

Tensor Tensor::scalar(double value) {
    return Tensor({1}, {value});
}

Tensor Tensor::randn(Shape shape, Rng& rng, double stddev) {
    check_shape_valid(shape);
    std::vector<double> vals(shape_product(shape));
    for (double& v : vals) {
        v = rng.normal() * stddev;
    }
    return Tensor(std::move(shape), std::move(vals));
}

Tensor Tensor::truncated_normal(Shape shape, Rng& rng, double stddev, double cutoff_sigmas) {
    check_shape_valid(shape);
    std::vector<double> vals(shape_product(shape));
    for (double& v : vals) {
        v = rng.truncated_normal(stddev, cutoff_sigmas);
    }
    return Tensor(std::move(shape), std::move(vals));
}

std::size_t Tensor::size() const {
    return data_ ? data_->size() : 0;
}

const std::vector<double>& Tensor::values() const {
    require(data_ != nullptr, "tensor: access to empty tensor");
    return *data_;
}

double Tensor::operator()(int i) const {
    return values()[static_cast<std::size_t>(i)];
}

double Tensor::operator()(int i, int j) const {
    require(rank() == 2, "tensor: 2D indexing on rank " + std::to_string(rank()));
    return values()[static_cast<std::size_t>(i) * static_cast<std::size_t>(shape_[1]) +
                    static_cast<std::size_t>(j)];
}

double Tensor::item() const {
    require(size() == 1, "tensor: item() on non-scalar of shape " + shape_str(shape_));
    return values()[0];
}

void Tensor::ensure_finite(const std::string& what) const {
    check_finite(values(), what);
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

Tensor Tape::watch(const Tensor& t) {
    require(!t.empty(), "tape: cannot watch empty tensor");
    require(t.tape_ == nullptr, "tape: tensor is already tracked");
    Tensor tracked = t;
    tracked.tape_ = this;
    tracked.node_ = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{nullptr, t.size()});
    grads_.emplace_back();
    return tracked;
}

void Tape::record(Tensor& out, BackwardFn backward) {
    out.tape_ = this;
    out.node_ = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{std::move(backward), out.size()});
    grads_.emplace_back();
}

double* Tape::grad_buffer(int node) {
    auto idx = static_cast<std::size_t>(node);
    if (grads_[idx].empty()) {
        grads_[idx].assign(nodes_[idx].size, 0.0);
    }
    return grads_[idx].data();
}

void Tape::backward(const Tensor& loss) {
    require(loss.tape_ == this, "tape: backward from a tensor not on this tape");
    require(loss.size() == 1, "tape: backward requires a scalar loss");
    for (auto& g : grads_) {
        g.clear();
    }
    grad_buffer(loss.node_)[0] = 1.0;
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
        auto idx = static_cast<std::size_t>(i);
        if (grads_[idx].empty() || !nodes_[idx].backward) {
            continue;
        }
        nodes_[idx].backward(*this, grads_[idx].data());
    }
}

Tensor Tape::grad(const Tensor& t) const {
    require(t.tape_ == this, "tape: grad of a tensor not on this tape");
    auto idx = static_cast<std::size_t>(t.node_);
    if (grads_[idx].empty()) {
        return Tensor::zeros(t.shape());
    }
    return Tensor(t.shape(), grads_[idx]);
}

// ---------------------------------------------------------------------------
// Elementwise ops
// ---------------------------------------------------------------------------

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " +
                                        shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) {
        out[i] = av[i] + bv[i];
    }
    check_finite(out, "add");
    Tensor res(a.shape(), std::move(out));
    if (Tape* tp = tape_of({&a, &b})) {
        int pa = tp->node_of(a);
        int pb = tp->node_of(b);
        std::size_t n = av.size();
        tp->record(res, [pa, pb, n](Tape& t, const double* g) {
            if (pa >= 0) {
                double* ga = t.grad_buffer(pa);
                for (std::size_t i = 0; i < n; ++i) ga[i] += g[i];
            }
            if (pb >= 0) {
                double* gb = t.grad_buffer(pb);
                for (std::size_t i = 0; i < n; ++i) gb[i] += g[i];
            }
        });
    }
    return res;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) {
        out[i] = av[i] - bv[i];
    }
    check_finite(out, "sub");
    Tensor res(a.shape(), std::move(out));
    if (Tape* tp = tape_of({&a, &b})) {
        int pa = tp->node_of(a);
        int pb = tp->node_of(b);
        std::size_t n = av.size();
        tp->record(res, [pa, pb, n](Tape& t, const double* g) {
            if (pa >= 0) {
                double* ga = t.grad_buffer(pa);
                for (std::size_t i = 0; i < n; ++i) ga[i] += g[i];
            }
            if (pb >= 0) {
                double* gb = t.grad_buffer(pb);
                for (std::size_t i = 0; i < n; ++i) gb[i] -= g[i];
            }
        });
    }
    return res;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) {
        out[i] = av[i] * bv[i];
    }
    check_finite(out, "mul");
    Tensor res(a.shape(), std::move(out));
    if (Tape* tp = tape_of({&a, &b})) {
        int pa = tp->node_of(a);
        int pb = tp->node_of(b);
        auto adata = a.data_ptr();
        auto bdata = b.data_ptr();
        tp->record(res, [pa, pb, adata, bdata](Tape& t, const double* g) {
            std::size_t n = adata->size();
            if (pa >= 0) {
                double* ga = t.grad_buffer(pa);
                for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * (*bdata)[i];
            }
            if (pb >= 0) {
                double* gb = t.grad_buffer(pb);
                for (std::size_t i = 0; i < n; ++i) gb[i] += g[i] * (*adata)[i];
            }
        });
    }
    return res;
}

Tensor scale(const Tensor& a, double s) {
    require(std::isfinite(s), "scale: non-finite factor");
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) {
        out[i] = av[i] * s;
    }
    check_finite(out, "scale");
    Tensor res(a.shape(), std::move(out));
    if (Tape* tp = tape_of({&a})) {
        int pa = tp->node_of(a);
        std::size_t n = av.size();
        tp->record(res, [pa, s, n](Tape& t, const double* g) {
            if (pa >= 0) {
                double* ga = t.grad_buffer(pa);
                for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * s;
            }
        });
    }
    return res;
}

Tensor neg(const Tensor& a) {
    return scale(a, -1.0);
}

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a.rank() == 2 && b.rank() == 2,
            "matmul: expects rank-2 operands, got " + shape_str(a.shape()) + " and " +
                shape_str(b.shape()));
    const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
    require(k == b.dim(0), "matmul: inner dimensions disagree, " + shape_str(a.shape()) +
                               " vs " + shape_str(b.shape()));
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out(static_cast<std::size_t>(m) * n, 0.0);
    for (int i = 0; i < m; ++i) {
        const double* arow = av.data() + static_cast<std::size_t>(i) * k;
        double* orow = out.data() + static_cast<std::size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            const double aip = arow[p];
            const double* brow = bv.data() + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) {
                orow[j] += aip * brow[j];
            }
        }
    }
    check_finite(out, "matmul");
    Tensor res({m, n}, std::move(out));
    if (Tape* tp = tape_of({&a, &b})) {
        int pa = tp->node_of(a);
        int pb = tp->node_of(b);
        auto adata = a.data_ptr();
        auto bdata = b.data_ptr();
        tp->record(res, [pa, pb, adata, bdata, m, k, n](Tape& t, const double* g) {
            if (pa >= 0) {
                double* ga = t.grad_buffer(pa);
                // dA = g * B^T
                for (int i = 0; i < m; ++i) {
                    for (int p = 0; p < k; ++p) {
                        double acc = 0.0;
                        const double* grow = g + static_cast<std::size_t>(i) * n;
                        const double* brow = bdata->data() + static_cast<std::size_t>(p) * n;
                        for (int j = 0; j < n; ++j) {
                            acc += grow[j] * brow[j];
                        }
                        ga[static_cast<std::size_t>(i) * k + p] += acc;
                    }
                }
            }
            if (pb >= 0) {
                double* gb = t.grad_buffer(pb);
                // dB = A^T * g
                for (int i = 0; i < m; ++i) {
                    const double* arow = adata->data() + static_cast<std::size_t>(i) * k;
                    const double* grow = g + static_cast<std::size_t>(i) * n;
                    for (int p = 0; p < k; ++p) {
                        const double aip = arow[p];
                        double* gbrow = gb + static_cast<std::size_t>(p) * n;
                        for (int j = 0; j < n; ++j) {
                            gbrow[j] += aip * grow[j];
                        }
                    }
                }
            }
        });
    }
    return res;
}

Tensor transpose(const Tensor& a) {
    require(a.rank() == 2, "transpose: expects rank-2, got " + shape_str(a.shape()));
    const int r = a.dim(0), c = a.dim(1);
    const auto& av = a.values();
    std::vector<double> out(av.size());
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < c; ++j) {
            out[static_cast<std::size_t>(j) * r + i] = av[static_cast<std::size_t>(i) * c + j];
        }
    }
    Tensor res({c, r}, std::move(out));
    if (Tape* tp = tape_of({&a})) {
        int pa = tp->node_of(a);
        tp->record(res, [pa, r, c](Tape& t, const double* g) {
            if (pa >= 0) {
                double* ga = t.grad_buffer(pa);
                for (int j = 0; j < c; ++j) {
                    for (int i = 0; i < r; ++i) {
                        ga[static_cast<std::size_t>(i) * c + j] +=
                            g[static_cast<std::size_t>(j) * r + i];
                    }
                }
            }
        });
    }
    return res;
}

Tensor vecmat(const Tensor& v, const Tensor& m) {
    require(v.rank() == 1 && m.rank() == 2,
            "vecmat: expects [k] x [k,n], got " + shape_str(v.shape()) + " and " +
                shape_str(m.shape()));
    const int k = v.dim(0), n = m.dim(1);
    require(k == m.dim(0), "vecmat: inner dimensions disagree, " + shape_str(v.shape()) +
                               " vs " + shape_str(m.shape()));
    const auto& vv = v.values();
    const auto& mv = m.values();
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (int p = 0; p < k; ++p) {
        const double vp = vv[static_cast<std::size_t>(p)];
        const double* mrow = mv.data() + static_cast<std::size_t>(p) * n;
        for (int j = 0; j < n; ++j) {
            out[static_cast<std::size_t>(j)] += vp * mrow[j];
        }
    }
    check_finite(out, "vecmat");
    Tensor res({n}, std::move(out));
    if (Tape* tp = tape_of({&v, &m})) {
        int pv = tp->node_of(v);
        int pm = tp->node_of(m);
        auto vdata = v.data_ptr();
        auto mdata = m.data_ptr();
        tp->record(res, [pv, pm, vdata, mdata, k, n](Tape& t, const double* g) {
            if (pv >= 0) {
                double* gv = t.grad_buffer(pv);
                for (int p = 0; p < k; ++p) {
                    double acc = 0.0;
                    const double* mrow = mdata->data() + static_cast<std::size_t>(p) * n;
                    for (int j = 0; j < n; ++j) {
                        acc += mrow[j] * g[j];
                    }
                    gv[p] += acc;
                }
            }
            if (pm >= 0) {
                double* gm = t.grad_buffer(pm);
                for (int p = 0; p < k; ++p) {
                    const double vp = (*vdata)[static_cast<std::size_t>(p)];
                    double* gmrow = gm + static_cast<std::size_t>(p) * n;
                    for (int j = 0; j < n; ++j) {
                        gmrow[j] += vp * g[j];
                    }
                }
            }
        });
    }
    return res;
}

Tensor add_row_vector(const Tensor& m, const Tensor& v) {
    require(m.rank() == 2 && v.rank() == 1 && m.dim(1) == v.dim(0),
            "add_row_vector: shapes " + shape_str(m.shape()) + " and " + shape_str(v.shape()));
    const int r = m.dim(0), c = m.dim(1);
    const auto& mv = m.values();
    const auto& vv = v.values();
    std::vector<double> out(mv.size());
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < c; ++j) {
            out[static_cast<std::size_t>(i) * c + j] =
                mv[static_cast<std::size_t>(i) * c + j] + vv[static_cast<std::size_t>(j)];
        }
    }
    check_finite(out, "add_row_vector");
    Tensor res(m.shape(), std::move(out));
    if (Tape* tp = tape_of({&m, &v})) {
        int pm = tp->node_of(m);
        int pv = tp->node_of(v);
        tp->record(res, [pm, pv, r, c](Tape& t, const double* g) {
            if (pm >= 0) {
                double* gm = t.grad_buffer(pm);
                std::size_t n = static_cast<std::size_t>(r) * c;
                for (std::size_t i = 0; i < n; ++i) gm[i] += g[i];
            }
            if (pv >= 0) {
                double* gv = t.grad_buffer(pv);
                for (int i = 0; i < r; ++i) {
                    for (int j = 0; j < c; ++j) {
                        gv[j] += g[static_cast<std::size_t>(i) * c + j];
                    }
                }
            }
        });
    }
    return res;
}

// ---------------------------------------------------------------------------
// Concatenation / slicing / reshaping
// ---------------------------------------------------------------------------

Tensor concat_rows(const std::vector<Tensor>& parts) {
    require(!parts.empty(), "concat_rows: empty input");
    const int c = parts[0].dim(1);
    int rows = 0;
    for (const Tensor& p : parts) {
        require(p.rank() == 2 && p.dim(1) == c,
                "concat_rows: column mismatch, expected " + std::to_string(c) + " got " +
                    shape_str(p.shape()));
        rows += p.dim(0);
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(rows) * c);
    for (const Tensor& p : parts) {
        const auto& pv = p.values();
        out.insert(out.end(), pv.begin(), pv.end());
    }
    Tensor res({rows, c}, std::move(out));

    std::vector<const Tensor*> ptrs;
    for (const Tensor& p : parts) ptrs.push_back(&p);
    Tape* tp = nullptr;
    for (const Tensor* p : ptrs) {
        if (p->tape()) {
            require(tp == nullptr || tp == p->tape(), "concat_rows: mixed tapes");
            tp = p->tape();
        }
    }
    if (tp) {
        std::vector<int> pids;
        std::vector<std::size_t> sizes;
        for (const Tensor& p : parts) {
            pids.push_back(tp->node_of(p));
            sizes.push_back(p.size());
        }
        tp->record(res, [pids, sizes](Tape& t, const double* g) {
            std::size_t off = 0;
            for (std::size_t k = 0; k < pids.size(); ++k) {
                if (pids[k] >= 0) {
                    double* gp = t.grad_buffer(pids[k]);
                    for (std::size_t i = 0; i < sizes[k]; ++i) gp[i] += g[off + i];
                }
                off += sizes[k];
            }
        });
    }
    return res;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    require(!parts.empty(), "concat_cols: empty input");
    const int r = parts[0].dim(0);
    int cols = 0;
    for (const Tensor& p : parts) {
        require(p.rank() == 2 && p.dim(0) == r,
                "concat_cols: row mismatch, expected " + std::to_string(r) + " got " +
                    shape_str(p.shape()));
        cols += p.dim(1);
    }
    std::vector<double> out(static_cast<std::size_t>(r) * cols);
    int coff = 0;
    for (const Tensor& p : parts) {
        const int pc = p.dim(1);
        const auto& pv = p.values();
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < pc; ++j) {
                out[static_cast<std::size_t>(i) * cols + coff + j] =
                    pv[static_cast<std::size_t>(i) * pc + j];
            }
        }
        coff += pc;
    }
    Tensor res({r, cols}, std::move(out));

    Tape* tp = nullptr;
    for (const Tensor& p : parts) {
        if (p.tape()) {
            require(tp == nullptr || tp == p.tape(), "concat_cols: mixed tapes");
            tp = p.tape();
        }
    }
    if (tp) {
        std::vector<int> pids;
        std::vector<int> widths;
        for (const Tensor& p : parts) {
            pids.push_back(tp->node_of(p));
            widths.push_back(p.dim(1));
        }
        tp->record(res, [pids, widths, r, cols](Tape& t, const double* g) {
            int coff2 = 0;
            for (std::size_t k = 0; k < pids.size(); ++k) {
                const int pc = widths[k];
                if (pids[k] >= 0) {
                    double* gp = t.grad_buffer(pids[k]);
                    for (int i = 0; i < r; ++i) {
                        for (int j = 0; j < pc; ++j) {
                            gp[static_cast<std::size_t>(i) * pc + j] +=
                                g[static_cast<std::size_t>(i) * cols + coff2 + j];
                        }
                    }
                }
                coff2 += pc;
            }
        });
    }
    return res;
}

Tensor concat_vec(const Tensor& a, const Tensor& b) {
    require(a.rank() == 1 && b.rank() == 1,
            "concat_vec: expects rank-1, got " + shape_str(a.shape()) + " and " +
                shape_str(b.shape()));
    const auto& av = a.values();
    const auto& bv = b.values();
    std::vector<double> out;
    out.reserve(av.size() + bv.size());
    out.insert(out.end(), av.begin(), av.end());
    out.insert(out.end(), bv.begin(), bv.end());
    Tensor res({a.dim(0) + b.dim(0)}, std::move(out));
    if (Tape* tp = tape_of({&a, &b})) {
        int pa = tp->node_of(a);
        int pb = tp->node_of(b);
        std::size_t na = av.size(), nb = bv.size();
        tp->record(res, [pa, pb, na, nb](Tape& t, const double* g) {
            if (pa >= 0) {
                double* ga = t.grad_buffer(pa);
                for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
            }
            if (pb >= 0) {
                double* gb = t.grad_buffer(pb);
                for (std::size_t i = 0; i < nb; ++i) gb[i] += g[na + i];
            }
        });
    }
    return res;
}

Tensor row(const Tensor& m, int i) {
    require(m.rank() == 2, "row: expects rank-2, got " + shape_str(m.shape()));
    require(i >= 0 && i < m.dim(0), "row: index " + std::to_string(i) + " out of range");
    const int c = m.dim(1);
    const auto& mv = m.values();
    std::vector<double> out(mv.begin() + static_cast<std::size_t>(i) * c,
                            mv.begin() + static_cast<std::size_t>(i + 1) * c);
    Tensor res({c}, std::move(out));
    if (Tape* tp = tape_of({&m})) {
        int pm = tp->node_of(m);
        tp->record(res, [pm, i, c](Tape& t, const double* g) {
            if (pm >= 0) {
                double* gm = t.grad_buffer(pm);
                for (int j = 0; j < c; ++j) {
                    gm[static_cast<std::size_t>(i) * c + j] += g[j];
                }
            }
        });
    }
    return res;
}

Tensor reshape(const Tensor& t, Shape shape) {
    check_shape_valid(shape);
    require(shape_product(shape) == t.size(),
            "reshape: size mismatch " + shape_str(t.shape()) + " -> " + shape_str(shape));
    Tensor res(std::move(shape), t.values());
    if (Tape* tp = tape_of({&t})) {
        int pt = tp->node_of(t);
        std::size_t n = t.size();
        tp->record(res, [pt, n](Tape& tape, const double* g) {
            if (pt >= 0) {
                double* gt = tape.grad_buffer(pt);
                for (std::size_t i = 0; i < n; ++i) gt[i] += g[i];
            }
        });
    }
    return res;
}

// ---------------------------------------------------------------------------
// softmax / layer norm / activations
// ---------------------------------------------------------------------------

Tensor softmax(const Tensor& t, int axis) {
    require(axis >= 0 && axis < t.rank(),
            "softmax: axis " + std::to_string(axis) + " out of range for " +
                shape_str(t.shape()));
    const int n = t.dim(axis);
    std::size_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= static_cast<std::size_t>(t.dim(i));
    for (int i = axis + 1; i < t.rank(); ++i) inner *= static_cast<std::size_t>(t.dim(i));

    const auto& tv = t.values();
    std::vector<double> out(tv.size());
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * static_cast<std::size_t>(n) * inner + in;
            double mx = tv[base];
            for (int a = 1; a < n; ++a) {
                mx = std::max(mx, tv[base + static_cast<std::size_t>(a) * inner]);
            }
            double total = 0.0;
            for (int a = 0; a < n; ++a) {
                double e = std::exp(tv[base + static_cast<std::size_t>(a) * inner] - mx);
                out[base + static_cast<std::size_t>(a) * inner] = e;
                total += e;
            }
            for (int a = 0; a < n; ++a) {
                out[base + static_cast<std::size_t>(a) * inner] /= total;
            }
        }
    }
    check_finite(out, "softmax");
    Tensor res(t.shape(), std::move(out));
    if (Tape* tp = tape_of({&t})) {
        int pt = tp->node_of(t);
        auto ydata = res.data_ptr();
        tp->record(res, [pt, ydata, outer, inner, n](Tape& tape, const double* g) {
            if (pt < 0) return;
            double* gt = tape.grad_buffer(pt);
            for (std::size_t o = 0; o < outer; ++o) {
                for (std::size_t in = 0; in < inner; ++in) {
                    const std::size_t base = o * static_cast<std::size_t>(n) * inner + in;
                    double dot = 0.0;
                    for (int a = 0; a < n; ++a) {
                        const std::size_t idx = base + static_cast<std::size_t>(a) * inner;
                        dot += g[idx] * (*ydata)[idx];
                    }
                    for (int a = 0; a < n; ++a) {
                        const std::size_t idx = base + static_cast<std::size_t>(a) * inner;
                        gt[idx] += (*ydata)[idx] * (g[idx] - dot);
                    }
                }
            }
        });
    }
    return res;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    require(x.rank() >= 1, "layer_norm: empty shape");
    const int d = x.dim(x.rank() - 1);
    require(gamma.rank() == 1 && gamma.dim(0) == d,
            "layer_norm: gamma shape " + shape_str(gamma.shape()) + " vs feature width " +
                std::to_string(d));
    require(beta.rank() == 1 && beta.dim(0) == d,
            "layer_norm: beta shape " + shape_str(beta.shape()) + " vs feature width " +
                std::to_string(d));
    require(eps >= 0.0, "layer_norm: negative eps");

    const auto& xv = x.values();
    const auto& gv = gamma.values();
    const auto& bv = beta.values();
    const std::size_t rows = xv.size() / static_cast<std::size_t>(d);
    std::vector<double> out(xv.size());
    // kept for backward: normalized values and inverse std per row
    auto xhat = std::make_shared<std::vector<double>>(xv.size());
    auto inv_std = std::make_shared<std::vector<double>>(rows);

    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = xv.data() + r * static_cast<std::size_t>(d);
        double mean = 0.0;
        for (int j = 0; j < d; ++j) mean += xr[j];
        mean /= d;
        double var = 0.0;  // biased, denominator d
        for (int j = 0; j < d; ++j) {
            const double c = xr[j] - mean;
            var += c * c;
        }
        var /= d;
        const double inv = 1.0 / std::sqrt(var + eps);
        (*inv_std)[r] = inv;
        for (int j = 0; j < d; ++j) {
            const std::size_t idx = r * static_cast<std::size_t>(d) + j;
            const double xh = (xr[j] - mean) * inv;
            (*xhat)[idx] = xh;
            out[idx] = xh * gv[static_cast<std::size_t>(j)] + bv[static_cast<std::size_t>(j)];
        }
    }
    check_finite(out, "layer_norm");
    Tensor res(x.shape(), std::move(out));
    if (Tape* tp = tape_of({&x, &gamma, &beta})) {
        int px = tp->node_of(x);
        int pg = tp->node_of(gamma);
        int pb = tp->node_of(beta);
        auto gdata = gamma.data_ptr();
        tp->record(res, [px, pg, pb, xhat, inv_std, gdata, rows, d](Tape& t, const double* g) {
            if (pg >= 0) {
                double* gg = t.grad_buffer(pg);
                for (std::size_t r = 0; r < rows; ++r) {
                    for (int j = 0; j < d; ++j) {
                        const std::size_t idx = r * static_cast<std::size_t>(d) + j;
                        gg[j] += g[idx] * (*xhat)[idx];
                    }
                }
            }
            if (pb >= 0) {
                double* gb = t.grad_buffer(pb);
                for (std::size_t r = 0; r < rows; ++r) {
                    for (int j = 0; j < d; ++j) {
                        gb[j] += g[r * static_cast<std::size_t>(d) + j];
                    }
                }
            }
            if (px >= 0) {
                double* gx = t.grad_buffer(px);
                for (std::size_t r = 0; r < rows; ++r) {
                    const double inv = (*inv_std)[r];
                    double mean_gy = 0.0, mean_gy_xhat = 0.0;
                    for (int j = 0; j < d; ++j) {
                        const std::size_t idx = r * static_cast<std::size_t>(d) + j;
                        const double gy = g[idx] * (*gdata)[static_cast<std::size_t>(j)];
                        mean_gy += gy;
                        mean_gy_xhat += gy * (*xhat)[idx];
                    }
                    mean_gy /= d;
                    mean_gy_xhat /= d;
                    for (int j = 0; j < d; ++j) {
                        const std::size_t idx = r * static_cast<std::size_t>(d) + j;
                        const double gy = g[idx] * (*gdata)[static_cast<std::size_t>(j)];
                        gx[idx] += inv * (gy - mean_gy - (*xhat)[idx] * mean_gy_xhat);
                    }
                }
            }
        });
    }
    return res;
}

namespace {

double gelu_fwd(double x) {
    return x * 0.5 * (1.0 + std::erf(x * kInvSqrt2));
}

double gelu_bwd(double x) {
    const double phi = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    return phi + x * pdf;
}

double sigmoid_fwd(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

Tensor activate(const Tensor& x, Activation kind) {
    const auto& xv = x.values();
    std::vector<double> out(xv.size());
    switch (kind) {
        case Activation::Gelu:
            for (std::size_t i = 0; i < xv.size(); ++i) out[i] = gelu_fwd(xv[i]);
            break;
        case Activation::Sigmoid:
            for (std::size_t i = 0; i < xv.size(); ++i) out[i] = sigmoid_fwd(xv[i]);
            break;
        case Activation::Tanh:
            for (std::size_t i = 0; i < xv.size(); ++i) out[i] = std::tanh(xv[i]);
            break;
    }
    check_finite(out, "activate");
    Tensor res(x.shape(), std::move(out));
    if (Tape* tp = tape_of({&x})) {
        int px = tp->node_of(x);
        auto xdata = x.data_ptr();
        auto ydata = res.data_ptr();
        tp->record(res, [px, kind, xdata, ydata](Tape& t, const double* g) {
            if (px < 0) return;
            double* gx = t.grad_buffer(px);
            const std::size_t n = xdata->size();
            switch (kind) {
                case Activation::Gelu:
                    for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] * gelu_bwd((*xdata)[i]);
                    break;
                case Activation::Sigmoid:
                    for (std::size_t i = 0; i < n; ++i) {
                        const double y = (*ydata)[i];
                        gx[i] += g[i] * y * (1.0 - y);
                    }
                    break;
                case Activation::Tanh:
                    for (std::size_t i = 0; i < n; ++i) {
                        const double y = (*ydata)[i];
                        gx[i] += g[i] * (1.0 - y * y);
                    }
                    break;
            }
        });
    }
    return res;
}

Tensor gelu(const Tensor& x) {
    return activate(x, Activation::Gelu);
}

Tensor sigmoid(const Tensor& x) {
    return activate(x, Activation::Sigmoid);
}

Tensor tanh_op(const Tensor& x) {
    return activate(x, Activation::Tanh);
}

// ---------------------------------------------------------------------------
// Reductions and scalar plumbing
// ---------------------------------------------------------------------------

Tensor sum(const Tensor& t) {
    const auto& tv = t.values();
    double total = 0.0;
    for (double v : tv) total += v;
    require(std::isfinite(total), "sum: non-finite value produced");
    Tensor res({1}, {total});
    if (Tape* tp = tape_of({&t})) {
        int pt = tp->node_of(t);
        std::size_t n = tv.size();
        tp->record(res, [pt, n](Tape& tape, const double* g) {
            if (pt >= 0) {
                double* gt = tape.grad_buffer(pt);
                for (std::size_t i = 0; i < n; ++i) gt[i] += g[0];
            }
        });
    }
    return res;
}

Tensor pick(const Tensor& v, int i) {
    require(v.rank() == 1, "pick: expects rank-1, got " + shape_str(v.shape()));
    require(i >= 0 && i < v.dim(0), "pick: index " + std::to_string(i) + " out of range");
    Tensor res({1}, {v(i)});
    if (Tape* tp = tape_of({&v})) {
        int pv = tp->node_of(v);
        tp->record(res, [pv, i](Tape& t, const double* g) {
            if (pv >= 0) {
                t.grad_buffer(pv)[i] += g[0];
            }
        });
    }
    return res;
}

Tensor log_clamped(const Tensor& t, double eps) {
    require(eps > 0.0, "log_clamped: eps must be positive");
    const auto& tv = t.values();
    std::vector<double> out(tv.size());
    for (std::size_t i = 0; i < tv.size(); ++i) {
        out[i] = std::log(std::max(tv[i], eps));
    }
    check_finite(out, "log_clamped");
    Tensor res(t.shape(), std::move(out));
    if (Tape* tp = tape_of({&t})) {
        int pt = tp->node_of(t);
        auto xdata = t.data_ptr();
        tp->record(res, [pt, eps, xdata](Tape& tape, const double* g) {
            if (pt < 0) return;
            double* gt = tape.grad_buffer(pt);
            for (std::size_t i = 0; i < xdata->size(); ++i) {
                if ((*xdata)[i] > eps) {
                    gt[i] += g[i] / (*xdata)[i];
                }
            }
        });
    }
    return res;
}

// ---------------------------------------------------------------------------
// NamedTensors
// ---------------------------------------------------------------------------

void NamedTensors::add(const std::string& name, Tensor t, bool decay, Dtype dtype) {
    require(!name.empty(), "named tensors: empty name");
    require(index_.find(name) == index_.end(), "named tensors: duplicate name '" + name + "'");
    index_[name] = entries_.size();
    entries_.push_back(Entry{name, std::move(t), dtype, decay});
}

bool NamedTensors::contains(const std::string& name) const {
    return index_.find(name) != index_.end();
}

const Tensor& NamedTensors::get(const std::string& name) const {
    auto it = index_.find(name);
    require(it != index_.end(), "named tensors: unknown name '" + name + "'");
    return entries_[it->second].tensor;
}

void NamedTensors::set(const std::string& name, Tensor t) {
    auto it = index_.find(name);
    require(it != index_.end(), "named tensors: unknown name '" + name + "'");
    require(t.shape() == entries_[it->second].tensor.shape(),
            "named tensors: shape change for '" + name + "'");
    entries_[it->second].tensor = std::move(t);
}

std::size_t NamedTensors::total_elements() const {
    std::size_t n = 0;
    for (const auto& e : entries_) {
        n += e.tensor.size();
    }
    return n;
}

NamedTensors watch_all(Tape& tape, const NamedTensors& params) {
    NamedTensors tracked;
    for (const auto& e : params.entries()) {
        tracked.add(e.name, tape.watch(e.tensor), e.decay, e.dtype);
    }
    return tracked;
}

}  // namespace slstt
