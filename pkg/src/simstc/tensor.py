"""Minimal dense 2-D tensor with reverse-mode differentiation.

Every value is a 64-bit float matrix. Forward ops record their parents
and a backward closure; `backward` on a scalar replays the tape in
reverse topological order, accumulating exact partial derivatives into
the leaves. Sparse matrices participate only as constants: gradients
flow to the dense operand of a sparse product.
"""

from __future__ import annotations

import numpy as np

from .sparse import SparseMatrix


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "name")

    def __init__(self, data, requires_grad=False, name=None, _check=True):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(1, -1)
        elif arr.ndim != 2:
            raise ValueError(f"tensors are rank <= 2, got shape {arr.shape}")
        if _check and not np.all(np.isfinite(arr)):
            raise ValueError("non-finite value in tensor")
        self.data = arr
        self.requires_grad = requires_grad
        self.grad = np.zeros_like(arr) if requires_grad else None
        self._parents = ()
        self._backward = None
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    def item(self):
        if self.data.size != 1:
            raise ValueError("item() requires a scalar tensor")
        return float(self.data[0, 0])

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"Tensor{tag}(shape={self.shape}, grad={self.requires_grad})"

    def __matmul__(self, other):
        return matmul_dense(self, other)

    def __add__(self, other):
        return add(self, other)


def _result(data, parents, backward):
    """Wrap an op output; tracks grad if any parent does."""
    out = Tensor(data, _check=False)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out.grad = None                     # only leaves hold .grad
        out._parents = parents
        out._backward = backward
    return out


def _need(t):
    return t.requires_grad


# -- primitive ops ---------------------------------------------------------


def matmul_dense(a: Tensor, b: Tensor) -> Tensor:
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul dimension mismatch: {a.shape} @ {b.shape}")
    ad, bd = a.data, b.data

    def backward(g, push):
        if _need(a):
            push(a, g @ bd.T)
        if _need(b):
            push(b, ad.T @ g)

    return _result(ad @ bd, (a, b), backward)


def matmul_sparse(s: SparseMatrix, b: Tensor) -> Tensor:
    """Sparse @ dense; the sparse operand is a constant of the graph."""
    if s.cols != b.shape[0]:
        raise ValueError(f"matmul dimension mismatch: {s.shape} @ {b.shape}")

    def backward(g, push):
        if _need(b):
            push(b, s.tdot(g))

    return _result(s.dot(b.data), (b,), backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ValueError(f"add shape mismatch: {a.shape} vs {b.shape}")

    def backward(g, push):
        if _need(a):
            push(a, g)
        if _need(b):
            push(b, g)

    return _result(a.data + b.data, (a, b), backward)


def add_rowvec(a: Tensor, b: Tensor) -> Tensor:
    """Add a 1 x k row vector to every row of a (the only broadcast)."""
    if b.shape != (1, a.shape[1]):
        raise ValueError(f"bias shape {b.shape} does not match {a.shape}")

    def backward(g, push):
        if _need(a):
            push(a, g)
        if _need(b):
            push(b, g.sum(axis=0, keepdims=True))

    return _result(a.data + b.data, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ValueError(f"mul shape mismatch: {a.shape} vs {b.shape}")
    ad, bd = a.data, b.data

    def backward(g, push):
        if _need(a):
            push(a, g * bd)
        if _need(b):
            push(b, g * ad)

    return _result(ad * bd, (a, b), backward)


def scale(x: Tensor, k: float) -> Tensor:
    k = float(k)

    def backward(g, push):
        if _need(x):
            push(x, g * k)

    return _result(x.data * k, (x,), backward)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0.0                     # derivative at 0 is defined as 0

    def backward(g, push):
        if _need(x):
            push(x, g * mask)

    return _result(np.maximum(x.data, 0.0), (x,), backward)


def transpose(x: Tensor) -> Tensor:
    def backward(g, push):
        if _need(x):
            push(x, g.T)

    return _result(x.data.T, (x,), backward)


def concat_cols(*tensors) -> Tensor:
    rows = tensors[0].shape[0]
    if any(t.shape[0] != rows for t in tensors):
        raise ValueError("concat_cols requires equal row counts")
    widths = [t.shape[1] for t in tensors]
    offsets = np.cumsum([0] + widths)

    def backward(g, push):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            if _need(t):
                push(t, g[:, lo:hi])

    return _result(np.concatenate([t.data for t in tensors], axis=1),
                   tuple(tensors), backward)


def row_normalize_l2(x: Tensor, epsilon=1e-12) -> Tensor:
    """Divide each row by max(||row||, epsilon)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    norms = np.linalg.norm(x.data, axis=1, keepdims=True)
    denom = np.maximum(norms, epsilon)
    y = x.data / denom
    live = norms > epsilon                  # rows where the norm is the divisor

    def backward(g, push):
        if _need(x):
            inner = (g * y).sum(axis=1, keepdims=True)
            gx = np.where(live, (g - y * inner) / denom, g / denom)
            push(x, gx)

    return _result(y, (x,), backward)


def log_softmax_rows(x: Tensor) -> Tensor:
    shifted = x.data - x.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    out = shifted - lse
    soft = np.exp(out)

    def backward(g, push):
        if _need(x):
            push(x, g - soft * g.sum(axis=1, keepdims=True))

    return _result(out, (x,), backward)


def dot_products_all_pairs(a: Tensor, b: Tensor) -> Tensor:
    """All pairwise row dot products: out[i, j] = a[i] . b[j]."""
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"row-dot dimension mismatch: {a.shape} vs {b.shape}")
    ad, bd = a.data, b.data

    def backward(g, push):
        if _need(a):
            push(a, g @ bd)
        if _need(b):
            push(b, g.T @ ad)

    return _result(ad @ bd.T, (a, b), backward)


def logsumexp_rows(x: Tensor, exclude=None) -> Tensor:
    """Row-wise log-sum-exp with max subtraction; `exclude` is a constant
    boolean mask of entries left out of the sum."""
    data = x.data
    if exclude is not None:
        if exclude.shape != data.shape:
            raise ValueError("exclude mask shape mismatch")
        data = np.where(exclude, -np.inf, data)
    m = data.max(axis=1, keepdims=True)
    ex = np.exp(data - m)
    total = ex.sum(axis=1, keepdims=True)
    out = m + np.log(total)
    weights = ex / total                    # masked entries are exactly 0

    def backward(g, push):
        if _need(x):
            push(x, g * weights)

    return _result(out, (x,), backward)


def take_diagonal(x: Tensor) -> Tensor:
    """Main diagonal of the leading square block, as an n x 1 column."""
    n = min(x.shape)
    idx = np.arange(n)

    def backward(g, push):
        if _need(x):
            gx = np.zeros_like(x.data)
            gx[idx, idx] = g[:, 0]
            push(x, gx)

    return _result(x.data[idx, idx].reshape(n, 1), (x,), backward)


def sum_all(x: Tensor) -> Tensor:
    shape = x.shape

    def backward(g, push):
        if _need(x):
            push(x, np.full(shape, g[0, 0]))

    return _result(x.data.sum().reshape(1, 1), (x,), backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    return add(a, scale(b, -1.0))


def mean_all(x: Tensor) -> Tensor:
    return scale(sum_all(x), 1.0 / x.data.size)


# -- reverse pass ------------------------------------------------------------


def _topo_order(root):
    order, visited = [], set()
    stack = [(root, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited:
                stack.append((p, False))
    return order                            # parents before children


def backward(loss: Tensor):
    """Populate .grad on every requires-grad leaf reachable from `loss`.

    Leaf gradients are assigned, not accumulated, so repeating the call
    on the same forward graph reproduces identical values.
    """
    if loss.shape != (1, 1):
        raise ValueError(f"backward requires a scalar loss, got {loss.shape}")
    grads = {id(loss): np.ones((1, 1))}

    def push(node, contrib):
        key = id(node)
        if key in grads:
            grads[key] = grads[key] + contrib
        else:
            grads[key] = contrib

    order = _topo_order(loss)
    for node in reversed(order):
        if node._backward is None:
            continue
        g = grads.get(id(node))
        if g is None:
            continue
        node._backward(g, push)

    for node in order:
        if node.requires_grad and node._backward is None:
            g = grads.get(id(node))
            node.grad = np.array(g) if g is not None else np.zeros_like(node.data)
