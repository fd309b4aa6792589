#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "vedit/common.h"

namespace vedit {

// Reverse-mode automatic differentiation over dense matrices.
//
// Every op computes its value eagerly with the same code whether or not
// gradients are being tracked, so a detached branch reproduces the tracked
// branch bit for bit. Nodes own their parents through shared_ptr; a graph is
// freed when the last Var referencing it goes out of scope.

struct Node {
    Mat value;
    Mat grad;  // allocated lazily on first accumulation
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;
};

using Var = std::shared_ptr<Node>;

Var make_constant(Mat v);
Var make_leaf(Mat v);

inline const Mat& val(const Var& v) { return v->value; }

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul_elem(const Var& a, const Var& b);
Var scale(const Var& a, double s);
// a is n x d, row is 1 x d, added to every row of a.
Var add_rowvec(const Var& a, const Var& row);
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(const Var& a, int r0, int n);
Var slice_cols(const Var& a, int c0, int n);
Var softmax_rows(const Var& a);
// allow(i, j) > 0.5 marks logits that participate; the rest get probability 0.
Var softmax_rows_masked(const Var& a, const Mat& allow);
Var log_softmax_rows(const Var& a);
Var layer_norm_rows(const Var& x, const Var& gamma, const Var& beta, double eps);
Var silu(const Var& x);
Var l2_normalize_rows(const Var& x);
Var gather_rows(const Var& table, const std::vector<int>& idx);
// Mean of the main diagonal of a square matrix, as a 1 x 1 node.
Var diag_mean(const Var& a);
// Mean of squared elementwise difference against a fixed target, as 1 x 1.
Var mean_sq_diff(const Var& a, const Mat& target);
// Same value, no parents, no gradient flow. The copy is bitwise.
Var detach(const Var& a);

// Seeds a 1 x 1 loss with gradient 1 and accumulates into every reachable
// node that requires gradients.
void backward(const Var& loss);

using ParamStore = std::map<std::string, Mat>;

// Hands out one leaf per parameter name for a single graph, so repeated
// lookups share gradient accumulation. train=false hands out constants,
// which is the no-grad mode used by the reference branch and by inference.
class ParamCtx {
public:
    ParamCtx(const ParamStore& params, bool train)
        : params_(&params), train_(train) {}

    Var get(const std::string& name);
    const std::map<std::string, Var>& leaves() const { return cache_; }
    bool train() const { return train_; }

private:
    const ParamStore* params_;
    bool train_;
    std::map<std::string, Var> cache_;
};

}  // namespace vedit
