#include "vedit/tape.h"

#include <cmath>
#include <unordered_set>
#include <utility>

#include "vedit/counters.h"

namespace vedit {

namespace {

Var node_from(Mat value, std::vector<Var> parents, std::function<void(Node&)> fn) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->parents = std::move(parents);
    for (const auto& p : n->parents)
        if (p->requires_grad) {
            n->requires_grad = true;
            break;
        }
    if (n->requires_grad) n->backward_fn = std::move(fn);
    return n;
}

Mat& ensure_grad(const Var& p) {
    if (p->grad.size() == 0) p->grad = Mat::Zero(p->value.rows(), p->value.cols());
    return p->grad;
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
    if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols())
        throw ShapeError(std::string(op) + ": operand shapes differ");
}

}  // namespace

Var make_constant(Mat v) {
    auto n = std::make_shared<Node>();
    n->value = std::move(v);
    return n;
}

Var make_leaf(Mat v) {
    auto n = std::make_shared<Node>();
    n->value = std::move(v);
    n->requires_grad = true;
    return n;
}

Var add(const Var& a, const Var& b) {
    check_same_shape(a, b, "add");
    return node_from(a->value + b->value, {a, b}, [a, b](Node& n) {
        if (a->requires_grad) ensure_grad(a) += n.grad;
        if (b->requires_grad) ensure_grad(b) += n.grad;
    });
}

Var sub(const Var& a, const Var& b) {
    check_same_shape(a, b, "sub");
    return node_from(a->value - b->value, {a, b}, [a, b](Node& n) {
        if (a->requires_grad) ensure_grad(a) += n.grad;
        if (b->requires_grad) ensure_grad(b) -= n.grad;
    });
}

Var mul_elem(const Var& a, const Var& b) {
    check_same_shape(a, b, "mul_elem");
    return node_from(a->value.cwiseProduct(b->value), {a, b}, [a, b](Node& n) {
        if (a->requires_grad) ensure_grad(a) += n.grad.cwiseProduct(b->value);
        if (b->requires_grad) ensure_grad(b) += n.grad.cwiseProduct(a->value);
    });
}

Var scale(const Var& a, double s) {
    return node_from(s * a->value, {a}, [a, s](Node& n) {
        if (a->requires_grad) ensure_grad(a) += s * n.grad;
    });
}

Var add_rowvec(const Var& a, const Var& row) {
    if (row->value.rows() != 1 || row->value.cols() != a->value.cols())
        throw ShapeError("add_rowvec: row must be 1 x cols(a)");
    Mat out = a->value;
    out.rowwise() += Eigen::RowVectorXd(row->value.row(0));
    return node_from(std::move(out), {a, row}, [a, row](Node& n) {
        if (a->requires_grad) ensure_grad(a) += n.grad;
        if (row->requires_grad) ensure_grad(row) += n.grad.colwise().sum();
    });
}

Var matmul(const Var& a, const Var& b) {
    if (a->value.cols() != b->value.rows())
        throw ShapeError("matmul: inner dimensions differ");
    return node_from(a->value * b->value, {a, b}, [a, b](Node& n) {
        if (a->requires_grad) ensure_grad(a) += n.grad * b->value.transpose();
        if (b->requires_grad) ensure_grad(b) += a->value.transpose() * n.grad;
    });
}

Var transpose(const Var& a) {
    return node_from(a->value.transpose(), {a}, [a](Node& n) {
        if (a->requires_grad) ensure_grad(a) += n.grad.transpose();
    });
}

Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("concat_rows: no parts");
    Eigen::Index cols = parts[0]->value.cols();
    Eigen::Index rows = 0;
    for (const auto& p : parts) {
        if (p->value.cols() != cols) throw ShapeError("concat_rows: column counts differ");
        rows += p->value.rows();
    }
    Mat out(rows, cols);
    Eigen::Index r = 0;
    for (const auto& p : parts) {
        out.middleRows(r, p->value.rows()) = p->value;
        r += p->value.rows();
    }
    return node_from(std::move(out), parts, [parts](Node& n) {
        Eigen::Index r = 0;
        for (const auto& p : parts) {
            if (p->requires_grad)
                ensure_grad(p) += n.grad.middleRows(r, p->value.rows());
            r += p->value.rows();
        }
    });
}

Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no parts");
    Eigen::Index rows = parts[0]->value.rows();
    Eigen::Index cols = 0;
    for (const auto& p : parts) {
        if (p->value.rows() != rows) throw ShapeError("concat_cols: row counts differ");
        cols += p->value.cols();
    }
    Mat out(rows, cols);
    Eigen::Index c = 0;
    for (const auto& p : parts) {
        out.middleCols(c, p->value.cols()) = p->value;
        c += p->value.cols();
    }
    return node_from(std::move(out), parts, [parts](Node& n) {
        Eigen::Index c = 0;
        for (const auto& p : parts) {
            if (p->requires_grad)
                ensure_grad(p) += n.grad.middleCols(c, p->value.cols());
            c += p->value.cols();
        }
    });
}

Var slice_rows(const Var& a, int r0, int n) {
    if (r0 < 0 || n <= 0 || r0 + n > a->value.rows())
        throw IndexError("slice_rows: range out of bounds");
    return node_from(a->value.middleRows(r0, n), {a}, [a, r0, n](Node& nd) {
        if (a->requires_grad) ensure_grad(a).middleRows(r0, n) += nd.grad;
    });
}

Var slice_cols(const Var& a, int c0, int n) {
    if (c0 < 0 || n <= 0 || c0 + n > a->value.cols())
        throw IndexError("slice_cols: range out of bounds");
    return node_from(a->value.middleCols(c0, n), {a}, [a, c0, n](Node& nd) {
        if (a->requires_grad) ensure_grad(a).middleCols(c0, n) += nd.grad;
    });
}

namespace {

Mat softmax_value(const Mat& x, const Mat* allow) {
    Mat p(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double m = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            if (!allow || (*allow)(i, j) > 0.5) m = std::max(m, x(i, j));
        if (!std::isfinite(m))
            throw NumericError("softmax: row has no admissible entries");
        double sum = 0.0;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            double e = (!allow || (*allow)(i, j) > 0.5) ? std::exp(x(i, j) - m) : 0.0;
            p(i, j) = e;
            sum += e;
        }
        p.row(i) /= sum;
    }
    return p;
}

Var softmax_node(const Var& a, Mat p) {
    return node_from(std::move(p), {a}, [a](Node& n) {
        if (!a->requires_grad) return;
        const Mat& p = n.value;
        Mat gp = n.grad.cwiseProduct(p);
        Eigen::VectorXd rs = gp.rowwise().sum();
        Mat centered = n.grad;
        centered.colwise() -= rs;
        ensure_grad(a) += p.cwiseProduct(centered);
    });
}

}  // namespace

Var softmax_rows(const Var& a) { return softmax_node(a, softmax_value(a->value, nullptr)); }

Var softmax_rows_masked(const Var& a, const Mat& allow) {
    if (allow.rows() != a->value.rows() || allow.cols() != a->value.cols())
        throw ShapeError("softmax_rows_masked: mask shape differs");
    return softmax_node(a, softmax_value(a->value, &allow));
}

Var log_softmax_rows(const Var& a) {
    const Mat& x = a->value;
    Mat out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double m = x.row(i).maxCoeff();
        double sum = (x.row(i).array() - m).exp().sum();
        out.row(i) = x.row(i).array() - m - std::log(sum);
    }
    return node_from(std::move(out), {a}, [a](Node& n) {
        if (!a->requires_grad) return;
        Mat p = n.value.array().exp().matrix();
        Eigen::VectorXd rs = n.grad.rowwise().sum();
        Mat scaled = p;
        for (Eigen::Index i = 0; i < p.rows(); ++i) scaled.row(i) *= rs(i);
        ensure_grad(a) += n.grad - scaled;
    });
}

Var layer_norm_rows(const Var& x, const Var& gamma, const Var& beta, double eps) {
    const Mat& xv = x->value;
    if (gamma->value.rows() != 1 || gamma->value.cols() != xv.cols() ||
        beta->value.rows() != 1 || beta->value.cols() != xv.cols())
        throw ShapeError("layer_norm_rows: gamma/beta must be 1 x cols(x)");
    Eigen::VectorXd mu = xv.rowwise().mean();
    Mat centered = xv;
    centered.colwise() -= mu;
    Eigen::VectorXd var = centered.array().square().rowwise().mean();
    Eigen::VectorXd inv = (var.array() + eps).rsqrt();
    Mat xhat = centered;
    for (Eigen::Index i = 0; i < xhat.rows(); ++i) xhat.row(i) *= inv(i);
    Mat out = xhat;
    out.array().rowwise() *= gamma->value.row(0).array();
    out.rowwise() += Eigen::RowVectorXd(beta->value.row(0));
    return node_from(std::move(out), {x, gamma, beta},
                     [x, gamma, beta, xhat, inv](Node& n) {
        if (gamma->requires_grad)
            ensure_grad(gamma) += n.grad.cwiseProduct(xhat).colwise().sum();
        if (beta->requires_grad) ensure_grad(beta) += n.grad.colwise().sum();
        if (!x->requires_grad) return;
        Mat g2 = n.grad;
        g2.array().rowwise() *= gamma->value.row(0).array();
        Eigen::VectorXd m1 = g2.rowwise().mean();
        Eigen::VectorXd m2 = g2.cwiseProduct(xhat).rowwise().mean();
        Mat dx = g2;
        dx.colwise() -= m1;
        for (Eigen::Index i = 0; i < dx.rows(); ++i)
            dx.row(i) = inv(i) * (dx.row(i) - m2(i) * xhat.row(i));
        ensure_grad(x) += dx;
    });
}

Var silu(const Var& x) {
    Mat s = (1.0 / (1.0 + (-x->value.array()).exp())).matrix();
    Mat out = x->value.cwiseProduct(s);
    return node_from(std::move(out), {x}, [x, s](Node& n) {
        if (!x->requires_grad) return;
        Mat d = s.array() * (1.0 + x->value.array() * (1.0 - s.array()));
        ensure_grad(x) += n.grad.cwiseProduct(d);
    });
}

Var l2_normalize_rows(const Var& x) {
    const Mat& xv = x->value;
    Eigen::VectorXd norm = xv.rowwise().norm();
    for (Eigen::Index i = 0; i < norm.size(); ++i)
        if (norm(i) < 1e-12) ++counters::degenerate_rows;
    Eigen::VectorXd denom = norm.array() + 1e-12;
    Mat out = xv;
    for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) /= denom(i);
    return node_from(std::move(out), {x}, [x, norm, denom](Node& n) {
        if (!x->requires_grad) return;
        const Mat& xv = x->value;
        Mat dx = n.grad;
        for (Eigen::Index i = 0; i < dx.rows(); ++i) {
            double dot = xv.row(i).dot(n.grad.row(i));
            double coef = dot / (denom(i) * denom(i) * std::max(norm(i), 1e-12));
            dx.row(i) = n.grad.row(i) / denom(i) - coef * xv.row(i);
        }
        ensure_grad(x) += dx;
    });
}

Var gather_rows(const Var& table, const std::vector<int>& idx) {
    const Mat& t = table->value;
    Mat out(static_cast<Eigen::Index>(idx.size()), t.cols());
    for (size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 0 || idx[i] >= t.rows())
            throw IndexError("gather_rows: index " + std::to_string(idx[i]) + " out of range");
        out.row(static_cast<Eigen::Index>(i)) = t.row(idx[i]);
    }
    return node_from(std::move(out), {table}, [table, idx](Node& n) {
        if (!table->requires_grad) return;
        Mat& g = ensure_grad(table);
        for (size_t i = 0; i < idx.size(); ++i)
            g.row(idx[i]) += n.grad.row(static_cast<Eigen::Index>(i));
    });
}

Var diag_mean(const Var& a) {
    const Mat& m = a->value;
    if (m.rows() != m.cols()) throw ShapeError("diag_mean: matrix is not square");
    if (m.rows() == 0) throw ShapeError("diag_mean: empty matrix");
    Mat out(1, 1);
    out(0, 0) = m.diagonal().mean();
    return node_from(std::move(out), {a}, [a](Node& n) {
        if (!a->requires_grad) return;
        Mat& g = ensure_grad(a);
        double w = n.grad(0, 0) / static_cast<double>(a->value.rows());
        for (Eigen::Index i = 0; i < a->value.rows(); ++i) g(i, i) += w;
    });
}

Var mean_sq_diff(const Var& a, const Mat& target) {
    if (a->value.rows() != target.rows() || a->value.cols() != target.cols())
        throw ShapeError("mean_sq_diff: target shape differs");
    double n_elems = static_cast<double>(target.size());
    if (n_elems == 0) throw ShapeError("mean_sq_diff: empty operand");
    Mat out(1, 1);
    out(0, 0) = (a->value - target).squaredNorm() / n_elems;
    return node_from(std::move(out), {a}, [a, target, n_elems](Node& n) {
        if (!a->requires_grad) return;
        ensure_grad(a) += (2.0 / n_elems) * n.grad(0, 0) * (a->value - target);
    });
}

Var detach(const Var& a) { return make_constant(a->value); }

void backward(const Var& loss) {
    if (!loss) throw ShapeError("backward: null loss");
    if (loss->value.rows() != 1 || loss->value.cols() != 1)
        throw ShapeError("backward: loss must be 1 x 1");
    if (!loss->requires_grad) return;

    struct Frame {
        Node* n;
        size_t next;
    };
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<Frame> stack;
    stack.push_back({loss.get(), 0});
    seen.insert(loss.get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next < f.n->parents.size()) {
            Node* p = f.n->parents[f.next].get();
            ++f.next;
            if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(f.n);
            stack.pop_back();
        }
    }

    loss->grad = Mat::Ones(1, 1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->grad.size() == 0) continue;
        if (n->backward_fn) n->backward_fn(*n);
    }
}

Var ParamCtx::get(const std::string& name) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    auto pit = params_->find(name);
    if (pit == params_->end()) throw IndexError("unknown parameter '" + name + "'");
    Var v = train_ ? make_leaf(pit->second) : make_constant(pit->second);
    cache_.emplace(name, v);
    return v;
}

}  // namespace vedit
