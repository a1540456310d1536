#include "dgfair/autodiff.hpp"

#include <cmath>

namespace dgfair::ad {

int Tape::push(Mat val, bool needs_grad, std::function<void(Tape&)> back) {
    Node n;
    n.val = std::move(val);
    n.needs_grad = needs_grad;
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

Mat& Tape::grad_buf(int i) {
    Node& n = nodes_[i];
    if (!n.grad_alloc) {
        n.grad = Mat(n.val.rows, n.val.cols);
        n.grad_alloc = true;
    }
    return n.grad;
}

double Tape::scalar(Var v) const {
    const Mat& m = nodes_[v.i].val;
    if (m.rows != 1 || m.cols != 1) throw Error("scalar: node is not 1x1");
    return m.d[0];
}

Mat Tape::grad_or_zero(Var v) const {
    const Node& n = nodes_[v.i];
    if (n.grad_alloc) return n.grad;
    return Mat(n.val.rows, n.val.cols);
}

void Tape::backward(Var loss) {
    const Node& ln = nodes_[loss.i];
    if (ln.val.rows != 1 || ln.val.cols != 1) throw Error("backward: loss must be 1x1");
    grad_buf(loss.i).d[0] = 1.0;
    for (int i = loss.i; i >= 0; --i) {
        Node& n = nodes_[i];
        if (n.grad_alloc && n.back) n.back(*this);
    }
}

Var Tape::leaf(const Mat& value) { return {push(value, true, nullptr)}; }

Var Tape::constant(const Mat& value) { return {push(value, false, nullptr)}; }

namespace {
void axpy(Mat& dst, const Mat& src, double s = 1.0) {
    for (size_t i = 0; i < dst.d.size(); ++i) dst.d[i] += s * src.d[i];
}
}  // namespace

Var Tape::add(Var a, Var b) {
    const Mat &A = nodes_[a.i].val, &B = nodes_[b.i].val;
    if (!A.same_shape(B)) throw Error("add: shape mismatch");
    Mat out = A;
    axpy(out, B);
    bool ng = wants(a.i) || wants(b.i);
    int ai = a.i, bi = b.i;
    int self = push(std::move(out), ng, [ai, bi, self = (int)nodes_.size()](Tape& t) {
        const Mat& g = t.nodes_[self].grad;
        if (t.wants(ai)) axpy(t.grad_buf(ai), g);
        if (t.wants(bi)) axpy(t.grad_buf(bi), g);
    });
    return {self};
}

Var Tape::add_rowvec(Var a, Var b) {
    const Mat &A = nodes_[a.i].val, &B = nodes_[b.i].val;
    if (B.rows != 1 || B.cols != A.cols) throw Error("add_rowvec: bias must be 1 x cols");
    Mat out = A;
    for (int i = 0; i < out.rows; ++i)
        for (int j = 0; j < out.cols; ++j) out(i, j) += B(0, j);
    bool ng = wants(a.i) || wants(b.i);
    int ai = a.i, bi = b.i;
    int self = push(std::move(out), ng, [ai, bi, self = (int)nodes_.size()](Tape& t) {
        const Mat& g = t.nodes_[self].grad;
        if (t.wants(ai)) axpy(t.grad_buf(ai), g);
        if (t.wants(bi)) {
            Mat& gb = t.grad_buf(bi);
            for (int i = 0; i < g.rows; ++i)
                for (int j = 0; j < g.cols; ++j) gb(0, j) += g(i, j);
        }
    });
    return {self};
}

Var Tape::sub(Var a, Var b) {
    const Mat &A = nodes_[a.i].val, &B = nodes_[b.i].val;
    if (!A.same_shape(B)) throw Error("sub: shape mismatch");
    Mat out = A;
    axpy(out, B, -1.0);
    bool ng = wants(a.i) || wants(b.i);
    int ai = a.i, bi = b.i;
    int self = push(std::move(out), ng, [ai, bi, self = (int)nodes_.size()](Tape& t) {
        const Mat& g = t.nodes_[self].grad;
        if (t.wants(ai)) axpy(t.grad_buf(ai), g);
        if (t.wants(bi)) axpy(t.grad_buf(bi), g, -1.0);
    });
    return {self};
}

Var Tape::mul(Var a, Var b) {
    const Mat &A = nodes_[a.i].val, &B = nodes_[b.i].val;
    if (!A.same_shape(B)) throw Error("mul: shape mismatch");
    Mat out = A;
    for (size_t i = 0; i < out.d.size(); ++i) out.d[i] *= B.d[i];
    bool ng = wants(a.i) || wants(b.i);
    int ai = a.i, bi = b.i;
    int self = push(std::move(out), ng, [ai, bi, self = (int)nodes_.size()](Tape& t) {
        const Mat& g = t.nodes_[self].grad;
        const Mat& av = t.nodes_[ai].val;
        const Mat& bv = t.nodes_[bi].val;
        if (t.wants(ai)) {
            Mat& ga = t.grad_buf(ai);
            for (size_t i = 0; i < g.d.size(); ++i) ga.d[i] += g.d[i] * bv.d[i];
        }
        if (t.wants(bi)) {
            Mat& gb = t.grad_buf(bi);
            for (size_t i = 0; i < g.d.size(); ++i) gb.d[i] += g.d[i] * av.d[i];
        }
    });
    return {self};
}

Var Tape::affine(Var a, double alpha, double beta) {
    Mat out = nodes_[a.i].val;
    for (auto& x : out.d) x = alpha * x + beta;
    bool ng = wants(a.i);
    int ai = a.i;
    int self = push(std::move(out), ng, [ai, alpha, self = (int)nodes_.size()](Tape& t) {
        if (t.wants(ai)) axpy(t.grad_buf(ai), t.nodes_[self].grad, alpha);
    });
    return {self};
}

Var Tape::matmul(Var a, Var b) {
    const Mat &A = nodes_[a.i].val, &B = nodes_[b.i].val;
    Mat out;
    kernels::gemm(false, false, A, B, out);
    bool ng = wants(a.i) || wants(b.i);
    int ai = a.i, bi = b.i;
    int self = push(std::move(out), ng, [ai, bi, self = (int)nodes_.size()](Tape& t) {
        const Mat& g = t.nodes_[self].grad;
        if (t.wants(ai)) {
            Mat tmp;
            kernels::gemm(false, true, g, t.nodes_[bi].val, tmp);
            axpy(t.grad_buf(ai), tmp);
        }
        if (t.wants(bi)) {
            Mat tmp;
            kernels::gemm(true, false, t.nodes_[ai].val, g, tmp);
            axpy(t.grad_buf(bi), tmp);
        }
    });
    return {self};
}

Var Tape::sym_spmm(const kernels::Csr* S, Var b) {
    Mat out;
    kernels::spmm(*S, nodes_[b.i].val, out);
    bool ng = wants(b.i);
    int bi = b.i;
    int self = push(std::move(out), ng, [S, bi, self = (int)nodes_.size()](Tape& t) {
        if (t.wants(bi)) {
            Mat tmp;
            kernels::spmm(*S, t.nodes_[self].grad, tmp);  // S symmetric: S^T = S
            axpy(t.grad_buf(bi), tmp);
        }
    });
    return {self};
}

Var Tape::sigmoid(Var a) {
    Mat out = nodes_[a.i].val;
    for (auto& x : out.d) x = 1.0 / (1.0 + std::exp(-x));
    bool ng = wants(a.i);
    int ai = a.i;
    int self = push(std::move(out), ng, [ai, self = (int)nodes_.size()](Tape& t) {
        if (!t.wants(ai)) return;
        const Mat& g = t.nodes_[self].grad;
        const Mat& y = t.nodes_[self].val;
        Mat& ga = t.grad_buf(ai);
        for (size_t i = 0; i < g.d.size(); ++i) ga.d[i] += g.d[i] * y.d[i] * (1.0 - y.d[i]);
    });
    return {self};
}

Var Tape::tanh_(Var a) {
    Mat out = nodes_[a.i].val;
    for (auto& x : out.d) x = std::tanh(x);
    bool ng = wants(a.i);
    int ai = a.i;
    int self = push(std::move(out), ng, [ai, self = (int)nodes_.size()](Tape& t) {
        if (!t.wants(ai)) return;
        const Mat& g = t.nodes_[self].grad;
        const Mat& y = t.nodes_[self].val;
        Mat& ga = t.grad_buf(ai);
        for (size_t i = 0; i < g.d.size(); ++i) ga.d[i] += g.d[i] * (1.0 - y.d[i] * y.d[i]);
    });
    return {self};
}

Var Tape::relu(Var a) {
    Mat out = nodes_[a.i].val;
    for (auto& x : out.d) x = x > 0.0 ? x : 0.0;
    bool ng = wants(a.i);
    int ai = a.i;
    int self = push(std::move(out), ng, [ai, self = (int)nodes_.size()](Tape& t) {
        if (!t.wants(ai)) return;
        const Mat& g = t.nodes_[self].grad;
        const Mat& av = t.nodes_[ai].val;
        Mat& ga = t.grad_buf(ai);
        for (size_t i = 0; i < g.d.size(); ++i)
            if (av.d[i] > 0.0) ga.d[i] += g.d[i];
    });
    return {self};
}

Var Tape::log_(Var a) {
    Mat out = nodes_[a.i].val;
    for (auto& x : out.d) {
        if (x <= 0.0) throw Error("log: non-positive input");
        x = std::log(x);
    }
    bool ng = wants(a.i);
    int ai = a.i;
    int self = push(std::move(out), ng, [ai, self = (int)nodes_.size()](Tape& t) {
        if (!t.wants(ai)) return;
        const Mat& g = t.nodes_[self].grad;
        const Mat& av = t.nodes_[ai].val;
        Mat& ga = t.grad_buf(ai);
        for (size_t i = 0; i < g.d.size(); ++i) ga.d[i] += g.d[i] / av.d[i];
    });
    return {self};
}

Var Tape::exp_(Var a) {
    Mat out = nodes_[a.i].val;
    for (auto& x : out.d) x = std::exp(x);
    bool ng = wants(a.i);
    int ai = a.i;
    int self = push(std::move(out), ng, [ai, self = (int)nodes_.size()](Tape& t) {
        if (!t.wants(ai)) return;
        const Mat& g = t.nodes_[self].grad;
        const Mat& y = t.nodes_[self].val;
        Mat& ga = t.grad_buf(ai);
        for (size_t i = 0; i < g.d.size(); ++i) ga.d[i] += g.d[i] * y.d[i];
    });
    return {self};
}

Var Tape::abs_(Var a) {
    Mat out = nodes_[a.i].val;
    for (auto& x : out.d) x = std::fabs(x);
    bool ng = wants(a.i);
    int ai = a.i;
    int self = push(std::move(out), ng, [ai, self = (int)nodes_.size()](Tape& t) {
        if (!t.wants(ai)) return;
        const Mat& g = t.nodes_[self].grad;
        const Mat& av = t.nodes_[ai].val;
        Mat& ga = t.grad_buf(ai);
        for (size_t i = 0; i < g.d.size(); ++i) {
            double s = av.d[i] > 0.0 ? 1.0 : (av.d[i] < 0.0 ? -1.0 : 0.0);
            ga.d[i] += g.d[i] * s;
        }
    });
    return {self};
}

Var Tape::clamp(Var a, double lo, double hi) {
    Mat out = nodes_[a.i].val;
    for (auto& x : out.d) x = x < lo ? lo : (x > hi ? hi : x);
    bool ng = wants(a.i);
    int ai = a.i;
    int self = push(std::move(out), ng, [ai, lo, hi, self = (int)nodes_.size()](Tape& t) {
        if (!t.wants(ai)) return;
        const Mat& g = t.nodes_[self].grad;
        const Mat& av = t.nodes_[ai].val;
        Mat& ga = t.grad_buf(ai);
        for (size_t i = 0; i < g.d.size(); ++i)
            if (av.d[i] >= lo && av.d[i] <= hi) ga.d[i] += g.d[i];
    });
    return {self};
}

Var Tape::softmax_rows(Var a) {
    Mat out = nodes_[a.i].val;
    for (int i = 0; i < out.rows; ++i) {
        double mx = out(i, 0);
        for (int j = 1; j < out.cols; ++j) mx = std::max(mx, out(i, j));
        double sum = 0.0;
        for (int j = 0; j < out.cols; ++j) {
            out(i, j) = std::exp(out(i, j) - mx);
            sum += out(i, j);
        }
        for (int j = 0; j < out.cols; ++j) out(i, j) /= sum;
    }
    bool ng = wants(a.i);
    int ai = a.i;
    int self = push(std::move(out), ng, [ai, self = (int)nodes_.size()](Tape& t) {
        if (!t.wants(ai)) return;
        const Mat& g = t.nodes_[self].grad;
        const Mat& y = t.nodes_[self].val;
        Mat& ga = t.grad_buf(ai);
        for (int i = 0; i < g.rows; ++i) {
            double dot = 0.0;
            for (int j = 0; j < g.cols; ++j) dot += g(i, j) * y(i, j);
            for (int j = 0; j < g.cols; ++j) ga(i, j) += y(i, j) * (g(i, j) - dot);
        }
    });
    return {self};
}

Var Tape::concat_cols(Var a, Var b) {
    const Mat &A = nodes_[a.i].val, &B = nodes_[b.i].val;
    if (A.rows != B.rows) throw Error("concat_cols: row mismatch");
    Mat out(A.rows, A.cols + B.cols);
    for (int i = 0; i < A.rows; ++i) {
        for (int j = 0; j < A.cols; ++j) out(i, j) = A(i, j);
        for (int j = 0; j < B.cols; ++j) out(i, A.cols + j) = B(i, j);
    }
    bool ng = wants(a.i) || wants(b.i);
    int ai = a.i, bi = b.i, ac = A.cols, bc = B.cols;
    int self = push(std::move(out), ng, [ai, bi, ac, bc, self = (int)nodes_.size()](Tape& t) {
        const Mat& g = t.nodes_[self].grad;
        if (t.wants(ai)) {
            Mat& ga = t.grad_buf(ai);
            for (int i = 0; i < g.rows; ++i)
                for (int j = 0; j < ac; ++j) ga(i, j) += g(i, j);
        }
        if (t.wants(bi)) {
            Mat& gb = t.grad_buf(bi);
            for (int i = 0; i < g.rows; ++i)
                for (int j = 0; j < bc; ++j) gb(i, j) += g(i, ac + j);
        }
    });
    return {self};
}

Var Tape::gather_rows(Var a, std::vector<int> idx) {
    const Mat& A = nodes_[a.i].val;
    Mat out(static_cast<int>(idx.size()), A.cols);
    for (size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] < 0 || idx[r] >= A.rows) throw Error("gather_rows: index out of range");
        for (int j = 0; j < A.cols; ++j) out(static_cast<int>(r), j) = A(idx[r], j);
    }
    bool ng = wants(a.i);
    int ai = a.i;
    int self = push(std::move(out), ng,
                    [ai, idx = std::move(idx), self = (int)nodes_.size()](Tape& t) {
                        if (!t.wants(ai)) return;
                        const Mat& g = t.nodes_[self].grad;
                        Mat& ga = t.grad_buf(ai);
                        // scatter-add stays serial: duplicate indices are common
                        for (size_t r = 0; r < idx.size(); ++r)
                            for (int j = 0; j < g.cols; ++j)
                                ga(idx[r], j) += g(static_cast<int>(r), j);
                    });
    return {self};
}

Var Tape::cosine_rows(Var a, Var b) {
    const Mat &A = nodes_[a.i].val, &B = nodes_[b.i].val;
    if (!A.same_shape(B)) throw Error("cosine_rows: shape mismatch");
    Mat out(A.rows, 1);
    for (int i = 0; i < A.rows; ++i) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (int j = 0; j < A.cols; ++j) {
            dot += A(i, j) * B(i, j);
            na += A(i, j) * A(i, j);
            nb += B(i, j) * B(i, j);
        }
        if (na == 0.0 || nb == 0.0)
            throw Error("cosine_rows: zero-norm embedding, similarity undefined");
        out(i, 0) = dot / (std::sqrt(na) * std::sqrt(nb));
    }
    bool ng = wants(a.i) || wants(b.i);
    int ai = a.i, bi = b.i;
    int self = push(std::move(out), ng, [ai, bi, self = (int)nodes_.size()](Tape& t) {
        const Mat& g = t.nodes_[self].grad;
        const Mat& av = t.nodes_[ai].val;
        const Mat& bv = t.nodes_[bi].val;
        const Mat& y = t.nodes_[self].val;
        for (int i = 0; i < av.rows; ++i) {
            double na = 0.0, nb = 0.0;
            for (int j = 0; j < av.cols; ++j) {
                na += av(i, j) * av(i, j);
                nb += bv(i, j) * bv(i, j);
            }
            double sa = std::sqrt(na), sb = std::sqrt(nb);
            double gi = g(i, 0), s = y(i, 0);
            if (t.wants(ai)) {
                Mat& ga = t.grad_buf(ai);
                for (int j = 0; j < av.cols; ++j)
                    ga(i, j) += gi * (bv(i, j) / (sa * sb) - s * av(i, j) / na);
            }
            if (t.wants(bi)) {
                Mat& gb = t.grad_buf(bi);
                for (int j = 0; j < av.cols; ++j)
                    gb(i, j) += gi * (av(i, j) / (sa * sb) - s * bv(i, j) / nb);
            }
        }
    });
    return {self};
}

Var Tape::sqdist_rows(Var a, Var b) {
    const Mat &A = nodes_[a.i].val, &B = nodes_[b.i].val;
    if (!A.same_shape(B)) throw Error("sqdist_rows: shape mismatch");
    Mat out(A.rows, 1);
    for (int i = 0; i < A.rows; ++i) {
        double acc = 0.0;
        for (int j = 0; j < A.cols; ++j) {
            double diff = A(i, j) - B(i, j);
            acc += diff * diff;
        }
        out(i, 0) = acc;
    }
    bool ng = wants(a.i) || wants(b.i);
    int ai = a.i, bi = b.i;
    int self = push(std::move(out), ng, [ai, bi, self = (int)nodes_.size()](Tape& t) {
        const Mat& g = t.nodes_[self].grad;
        const Mat& av = t.nodes_[ai].val;
        const Mat& bv = t.nodes_[bi].val;
        for (int i = 0; i < av.rows; ++i) {
            double gi = g(i, 0);
            if (t.wants(ai)) {
                Mat& ga = t.grad_buf(ai);
                for (int j = 0; j < av.cols; ++j) ga(i, j) += gi * 2.0 * (av(i, j) - bv(i, j));
            }
            if (t.wants(bi)) {
                Mat& gb = t.grad_buf(bi);
                for (int j = 0; j < av.cols; ++j) gb(i, j) -= gi * 2.0 * (av(i, j) - bv(i, j));
            }
        }
    });
    return {self};
}

Var Tape::sum_rows(Var a) {
    const Mat& A = nodes_[a.i].val;
    Mat out(A.rows, 1);
    for (int i = 0; i < A.rows; ++i) {
        double acc = 0.0;
        for (int j = 0; j < A.cols; ++j) acc += A(i, j);
        out(i, 0) = acc;
    }
    bool ng = wants(a.i);
    int ai = a.i;
    int self = push(std::move(out), ng, [ai, self = (int)nodes_.size()](Tape& t) {
        if (!t.wants(ai)) return;
        const Mat& g = t.nodes_[self].grad;
        Mat& ga = t.grad_buf(ai);
        for (int i = 0; i < ga.rows; ++i)
            for (int j = 0; j < ga.cols; ++j) ga(i, j) += g(i, 0);
    });
    return {self};
}

Var Tape::sum_all(Var a) {
    const Mat& A = nodes_[a.i].val;
    double acc = 0.0;
    for (double x : A.d) acc += x;
    Mat out(1, 1);
    out.d[0] = acc;
    bool ng = wants(a.i);
    int ai = a.i;
    int self = push(std::move(out), ng, [ai, self = (int)nodes_.size()](Tape& t) {
        if (!t.wants(ai)) return;
        double g = t.nodes_[self].grad.d[0];
        Mat& ga = t.grad_buf(ai);
        for (auto& x : ga.d) x += g;
    });
    return {self};
}

Var Tape::mean_all(Var a) {
    const Mat& A = nodes_[a.i].val;
    if (A.d.empty()) throw Error("mean_all: empty input");
    double acc = 0.0;
    for (double x : A.d) acc += x;
    Mat out(1, 1);
    out.d[0] = acc / static_cast<double>(A.d.size());
    bool ng = wants(a.i);
    int ai = a.i;
    int self = push(std::move(out), ng, [ai, self = (int)nodes_.size()](Tape& t) {
        if (!t.wants(ai)) return;
        Mat& ga = t.grad_buf(ai);
        double g = t.nodes_[self].grad.d[0] / static_cast<double>(ga.d.size());
        for (auto& x : ga.d) x += g;
    });
    return {self};
}

Var Tape::reshape(Var a, int r, int c) {
    const Mat& A = nodes_[a.i].val;
    if (static_cast<size_t>(r) * c != A.d.size()) throw Error("reshape: element count mismatch");
    Mat out(r, c, A.d);
    bool ng = wants(a.i);
    int ai = a.i;
    int self = push(std::move(out), ng, [ai, self = (int)nodes_.size()](Tape& t) {
        if (!t.wants(ai)) return;
        const Mat& g = t.nodes_[self].grad;
        Mat& ga = t.grad_buf(ai);
        for (size_t i = 0; i < g.d.size(); ++i) ga.d[i] += g.d[i];
    });
    return {self};
}

}  // namespace dgfair::ad
