#pragma once

#include <functional>
#include <vector>

#include "dgfair/kernels.hpp"
#include "dgfair/tensor.hpp"

namespace dgfair::ad {

// Handle into a Tape. Only meaningful together with the tape that created it.
struct Var {
    int i = -1;
    bool valid() const { return i >= 0; }
};

// Reverse-mode tape. A forward pass appends nodes; backward() walks the tape
// in reverse and accumulates gradients into every node that needs them.
// References returned by value()/grad() are invalidated by further node
// creation, so copy out anything held across ops.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var leaf(const Mat& value);      // tracked parameter input
    Var constant(const Mat& value);  // data; no gradient

    Var add(Var a, Var b);
    Var add_rowvec(Var a, Var b);  // b is 1 x c, broadcast over rows of a
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);  // elementwise
    Var affine(Var a, double alpha, double beta);  // alpha * a + beta
    Var matmul(Var a, Var b);
    // S * b with S a symmetric sparse operator (caller keeps S alive).
    Var sym_spmm(const kernels::Csr* S, Var b);
    Var sigmoid(Var a);
    Var tanh_(Var a);
    Var relu(Var a);
    Var log_(Var a);   // caller guarantees positive inputs
    Var exp_(Var a);
    Var abs_(Var a);   // subgradient 0 at the origin
    Var clamp(Var a, double lo, double hi);  // gradient blocked outside [lo, hi]
    Var softmax_rows(Var a);
    Var concat_cols(Var a, Var b);
    Var gather_rows(Var a, std::vector<int> idx);
    Var cosine_rows(Var a, Var b);  // row-wise cosine similarity, n x 1
    Var sqdist_rows(Var a, Var b);  // row-wise squared Euclidean distance, n x 1
    Var sum_rows(Var a);  // n x 1 row sums
    Var sum_all(Var a);   // 1 x 1
    Var mean_all(Var a);  // 1 x 1
    Var reshape(Var a, int r, int c);

    const Mat& value(Var v) const { return nodes_[v.i].val; }
    double scalar(Var v) const;

    // Backpropagate from a 1 x 1 loss node.
    void backward(Var loss);

    // Gradient of a node after backward(); zeros if the node was never touched.
    Mat grad_or_zero(Var v) const;

    size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Mat val;
        Mat grad;
        bool needs_grad = false;
        bool grad_alloc = false;
        std::function<void(Tape&)> back;  // may be empty for leaves/constants
    };

    std::vector<Node> nodes_;

    int push(Mat val, bool needs_grad, std::function<void(Tape&)> back);
    Mat& grad_buf(int i);
    bool wants(int i) const { return nodes_[i].needs_grad; }
    friend struct Accum;
};

}  // namespace dgfair::ad
