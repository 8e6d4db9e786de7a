#pragma once

#include "lafb/tensor.hpp"

#include <deque>
#include <functional>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

namespace lafb {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; only valid while its tape lives.
class Var {
public:
    Var() = default;

    bool valid() const noexcept { return tape_ != nullptr; }
    Tape& tape() const { return *tape_; }
    std::size_t id() const noexcept { return id_; }

    inline const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    std::size_t dim(std::size_t axis) const { return value().dim(axis); }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so a reverse sweep
/// over ids is a valid topological order for backpropagation.
///
/// A tape is confined to one thread. Leaves created with leaf_ref() borrow their
/// value; the referenced tensor must outlive the tape and stay unmodified.
class Tape {
public:
    using Backward = std::function<void(Tape&, std::size_t self)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var leaf(Tensor value, bool requires_grad = true)
    {
        Node n;
        n.owned = std::move(value);
        n.requires_grad = requires_grad;
        return push(std::move(n));
    }

    Var leaf_ref(const Tensor& value, bool requires_grad = true)
    {
        Node n;
        n.borrowed = &value;
        n.requires_grad = requires_grad;
        return push(std::move(n));
    }

    Var constant(Tensor value) { return leaf(std::move(value), false); }

    /// Appends an interior node. `fn` reads grad(self) and accumulates into its parents.
    Var record(Tensor value, std::initializer_list<Var> parents, Backward fn)
    {
        return record(std::move(value), std::vector<Var>(parents), std::move(fn));
    }

    Var record(Tensor value, const std::vector<Var>& parents, Backward fn)
    {
        Node n;
        n.owned = std::move(value);
        for (const Var& p : parents) {
            check_owner(p);
            if (nodes_[p.id_].requires_grad) n.requires_grad = true;
        }
        if (n.requires_grad) n.backward = std::move(fn);
        return push(std::move(n));
    }

    const Tensor& value(std::size_t id) const
    {
        const Node& n = nodes_[id];
        return n.borrowed ? *n.borrowed : n.owned;
    }

    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    bool requires_grad(Var v) const { return requires_grad(v.id_); }
    bool has_grad(std::size_t id) const { return !nodes_[id].grad.empty(); }

    const Tensor& grad(std::size_t id) const { return nodes_[id].grad; }

    /// Gradient buffer of node `id`, zero-allocated on first access.
    Tensor& grad_mut(std::size_t id)
    {
        Node& n = nodes_[id];
        if (n.grad.empty()) n.grad = Tensor::zeros(value(id).shape());
        return n.grad;
    }

    /// Gradient of `v` after backward(); zeros when nothing reached it.
    Tensor gradient(Var v) const
    {
        check_owner(v);
        const Node& n = nodes_[v.id_];
        return n.grad.empty() ? Tensor::zeros(value(v.id_).shape()) : n.grad;
    }

    void backward(Var root)
    {
        check_owner(root);
        if (value(root.id_).size() != 1)
            throw ContractError("backward: root must be scalar, got shape " +
                                shape_str(value(root.id_).shape()));
        for (Node& n : nodes_) n.grad = Tensor();
        if (!nodes_[root.id_].requires_grad) return;
        grad_mut(root.id_).fill(1.0);
        for (std::size_t i = root.id_ + 1; i-- > 0;) {
            Node& n = nodes_[i];
            if (n.backward && !n.grad.empty()) n.backward(*this, i);
        }
    }

    std::size_t size() const noexcept { return nodes_.size(); }

    void check_owner(Var v) const
    {
        if (v.tape_ != this) throw ContractError("tape: variable belongs to a different tape");
    }

private:
    struct Node {
        Tensor owned;
        const Tensor* borrowed = nullptr;
        Tensor grad;
        bool requires_grad = false;
        Backward backward;
    };

    Var push(Node n)
    {
        nodes_.push_back(std::move(n));
        return Var(this, nodes_.size() - 1);
    }

    std::deque<Node> nodes_;  // push_back keeps references to existing nodes valid
};

inline const Tensor& Var::value() const
{
    return tape_->value(id_);
}

}  // namespace lafb
