#!/usr/bin/env python3
"""Tour of the reverse-mode tensor substrate.

Shows the op set used by the model (dense/sparse matmul, relu, row
normalization, log-softmax, masked log-sum-exp), a backward pass, and a
finite-difference audit of a composed expression.
"""

import numpy as np

from simstc import tensor as T
from simstc.sparse import SparseMatrix
from simstc.tensor import Tensor, backward


def main():
    rng = np.random.default_rng(0)

    # Leaves opt into gradients; everything is a 2-D float64 matrix.
    W = Tensor(rng.normal(size=(3, 2)) * 0.5, requires_grad=True, name="W")
    x = Tensor([[1.0, -2.0, 0.5], [0.2, 0.4, -1.0]])
    y = T.relu(T.matmul_dense(x, W))
    print("relu(x @ W) =\n", y.data)

    # Sparse matrices are constants of the graph: gradients flow through
    # them to the dense side only.
    S = SparseMatrix.from_dense(np.array([[0.5, 0.5], [0.0, 1.0]]))
    z = T.matmul_sparse(S, T.transpose(y))
    loss = T.sum_all(z)
    backward(loss)
    print("dloss/dW =\n", W.grad)

    # Row normalization and log-softmax are the numerically fussy pieces;
    # both are exact under a finite-difference audit.
    P = Tensor(rng.normal(size=(4, 3)), requires_grad=True, name="P")

    def contrastive_ish():
        unit = T.row_normalize_l2(P, 1e-12)
        sims = T.scale(T.dot_products_all_pairs(unit, unit), 2.0)
        mask = np.eye(4, dtype=bool)
        lse = T.logsumexp_rows(sims, exclude=mask)
        return T.sum_all(T.sub(lse, T.take_diagonal(sims)))

    loss = contrastive_ish()
    backward(loss)
    analytic = P.grad.copy()

    h = 1e-6
    numeric = np.zeros_like(P.data)
    for i in range(P.shape[0]):
        for j in range(P.shape[1]):
            orig = P.data[i, j]
            P.data[i, j] = orig + h
            plus = contrastive_ish().item()
            P.data[i, j] = orig - h
            minus = contrastive_ish().item()
            P.data[i, j] = orig
            numeric[i, j] = (plus - minus) / (2 * h)
    rel = np.abs(analytic - numeric) / np.maximum(np.abs(numeric), 1e-8)
    print(f"\nfinite-difference audit: max relative error {rel.max():.2e}")

    # Backward is idempotent on a fixed forward graph, and leaves that a
    # loss never touches keep an exactly-zero gradient.
    unused = Tensor(np.ones((2, 2)), requires_grad=True)
    backward(loss)
    print("second backward identical:", np.array_equal(P.grad, analytic))
    print("unused leaf gradient:", unused.grad.ravel().tolist())


if __name__ == "__main__":
    main()
