"""Dense float64 tensors with reverse-mode automatic differentiation.

A :class:`Tensor` wraps a numpy array and records, for every operation, the
input tensors and a closure that propagates the output gradient back to them.
Calling :func:`backward` on a scalar walks that implicit graph once in reverse
topological order and accumulates ``grad`` on every leaf created with
``requires_grad=True``.

Design constraints:

- everything is float64; gradient checks rely on the extra precision
- no broadcasting: shapes must match exactly, except for the explicit
  scalar ops (``scale``, ``add_scalar``) and ``add_row_bias``
- ``backward`` accumulates into ``grad``; callers zero grads between steps
- ReLU uses subgradient 0 at exactly 0
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ContractError, DimensionError, DomainError


class Tensor:
    """A node in the computation graph.

    Leaves are created directly from data; internal nodes are created by the
    operations below and remember their parents plus a backward closure.
    """

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "_op")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], None] | None = None
        self._op = "leaf"

    # -- basic introspection -------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a scalar, got shape {self.shape}")
        return float(self.data.reshape(()))

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self._op}, requires_grad={self.requires_grad})"

    # -- graph plumbing ------------------------------------------------------

    def _make_child(self, data: np.ndarray, parents: tuple["Tensor", ...], op: str) -> "Tensor":
        out = Tensor.__new__(Tensor)
        out.data = data
        out.requires_grad = any(p.requires_grad for p in parents)
        out.grad = None
        # Constant subgraphs need no tape; this keeps e.g. frozen-teacher
        # forward passes out of the student's gradient graph entirely.
        out._parents = parents if out.requires_grad else ()
        out._backward = None
        out._op = op
        return out

    def _accumulate(self, g: np.ndarray) -> None:
        # Constants stay out of the gradient graph: nothing upstream of them
        # can require grad, so dropping g here is exact, not an approximation.
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = g.copy()
        else:
            self.grad += g

    # -- elementwise arithmetic ----------------------------------------------

    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)

    def __sub__(self, other: "Tensor") -> "Tensor":
        return sub(self, other)

    def __mul__(self, other: "Tensor") -> "Tensor":
        return mul(self, other)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    def backward(self) -> None:
        backward(self)


def tensor(data, requires_grad: bool = False) -> Tensor:
    """Create a leaf tensor from array-like data."""
    return Tensor(data, requires_grad=requires_grad)


def zeros(shape, requires_grad: bool = False) -> Tensor:
    return Tensor(np.zeros(shape, dtype=np.float64), requires_grad=requires_grad)


def ones(shape, requires_grad: bool = False) -> Tensor:
    return Tensor(np.ones(shape, dtype=np.float64), requires_grad=requires_grad)


def randn(rng: np.random.Generator, shape, scale: float = 1.0, requires_grad: bool = True) -> Tensor:
    """Gaussian-initialized leaf, the standard way trainable weights start."""
    return Tensor(rng.normal(0.0, scale, size=shape), requires_grad=requires_grad)


def _require_same_shape(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{op}: shapes {a.shape} and {b.shape} differ")


def add(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape(a, b, "add")
    out = a._make_child(a.data + b.data, (a, b), "add")

    def _bw(g: np.ndarray) -> None:
        a._accumulate(g)
        b._accumulate(g)

    out._backward = _bw
    return out


def sub(a: Tensor, b: Tensor) -> Tensor:
    _require_same_shape(a, b, "sub")
    out = a._make_child(a.data - b.data, (a, b), "sub")

    def _bw(g: np.ndarray) -> None:
        a._accumulate(g)
        b._accumulate(-g)

    out._backward = _bw
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise (Hadamard) product."""
    _require_same_shape(a, b, "mul")
    out = a._make_child(a.data * b.data, (a, b), "mul")

    def _bw(g: np.ndarray) -> None:
        a._accumulate(g * b.data)
        b._accumulate(g * a.data)

    out._backward = _bw
    return out


def scale(a: Tensor, c: float) -> Tensor:
    """Multiply by a python scalar (the only sanctioned broadcast)."""
    c = float(c)
    out = a._make_child(a.data * c, (a,), "scale")

    def _bw(g: np.ndarray) -> None:
        a._accumulate(g * c)

    out._backward = _bw
    return out


def add_scalar(a: Tensor, c: float) -> Tensor:
    """Add a python scalar elementwise."""
    c = float(c)
    out = a._make_child(a.data + c, (a,), "add_scalar")

    def _bw(g: np.ndarray) -> None:
        a._accumulate(g)

    out._backward = _bw
    return out


# -- linear algebra ----------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of two 2-D tensors."""
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise DimensionError(f"matmul needs 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: inner dimensions of {a.shape} and {b.shape} differ")
    out = a._make_child(a.data @ b.data, (a, b), "matmul")

    def _bw(g: np.ndarray) -> None:
        a._accumulate(g @ b.data.T)
        b._accumulate(a.data.T @ g)

    out._backward = _bw
    return out


def transpose(a: Tensor) -> Tensor:
    if a.data.ndim != 2:
        raise DimensionError(f"transpose needs a 2-D tensor, got {a.shape}")
    out = a._make_child(a.data.T.copy(), (a,), "transpose")

    def _bw(g: np.ndarray) -> None:
        a._accumulate(g.T)

    out._backward = _bw
    return out


def concat_last_axis(a: Tensor, b: Tensor) -> Tensor:
    """Concatenate along the last axis; all leading axes must match."""
    if a.data.ndim != b.data.ndim or a.shape[:-1] != b.shape[:-1]:
        raise DimensionError(f"concat_last_axis: shapes {a.shape} and {b.shape} incompatible")
    out = a._make_child(np.concatenate([a.data, b.data], axis=-1), (a, b), "concat")
    na = a.shape[-1]

    def _bw(g: np.ndarray) -> None:
        a._accumulate(g[..., :na])
        b._accumulate(g[..., na:])

    out._backward = _bw
    return out


def slice_rows(a: Tensor, start: int, stop: int) -> Tensor:
    """Rows ``start:stop`` of a 2-D tensor."""
    if a.data.ndim != 2:
        raise DimensionError(f"slice_rows needs a 2-D tensor, got {a.shape}")
    if not (0 <= start <= stop <= a.shape[0]):
        raise ContractError(f"slice_rows: range [{start}, {stop}) outside {a.shape[0]} rows")
    out = a._make_child(a.data[start:stop].copy(), (a,), "slice_rows")

    def _bw(g: np.ndarray) -> None:
        full = np.zeros_like(a.data)
        full[start:stop] = g
        a._accumulate(full)

    out._backward = _bw
    return out


def reshape(a: Tensor, shape) -> Tensor:
    shape = tuple(int(s) for s in shape)
    if int(np.prod(shape, dtype=np.int64)) != a.size:
        raise DimensionError(f"reshape: cannot view {a.shape} as {shape}")
    out = a._make_child(a.data.reshape(shape).copy(), (a,), "reshape")
    old = a.shape

    def _bw(g: np.ndarray) -> None:
        a._accumulate(g.reshape(old))

    out._backward = _bw
    return out


def gather_rows(table: Tensor, ids: Sequence[int]) -> Tensor:
    """Embedding lookup: rows ``ids`` of a 2-D table, gradient scattered back."""
    if table.data.ndim != 2:
        raise DimensionError(f"gather_rows needs a 2-D table, got {table.shape}")
    idx = np.asarray(list(ids), dtype=np.int64)
    if idx.size == 0:
        raise ContractError("gather_rows: empty id list")
    if idx.min() < 0 or idx.max() >= table.shape[0]:
        raise ContractError(f"gather_rows: id outside table with {table.shape[0]} rows")
    out = table._make_child(table.data[idx].copy(), (table,), "gather_rows")

    def _bw(g: np.ndarray) -> None:
        full = np.zeros_like(table.data)
        np.add.at(full, idx, g)
        table._accumulate(full)

    out._backward = _bw
    return out


def add_row_bias(m: Tensor, b: Tensor) -> Tensor:
    """Add a length-d bias vector to every row of an n-by-d matrix."""
    if m.data.ndim != 2 or b.data.ndim != 1 or m.shape[1] != b.shape[0]:
        raise DimensionError(f"add_row_bias: shapes {m.shape} and {b.shape} incompatible")
    out = m._make_child(m.data + b.data, (m, b), "add_row_bias")

    def _bw(g: np.ndarray) -> None:
        m._accumulate(g)
        b._accumulate(g.sum(axis=0))

    out._backward = _bw
    return out


def pick(a: Tensor, index: int) -> Tensor:
    """Scalar element ``a[index]`` of a 1-D tensor."""
    if a.data.ndim != 1:
        raise DimensionError(f"pick needs a 1-D tensor, got {a.shape}")
    index = int(index)
    if not (0 <= index < a.shape[0]):
        raise ContractError(f"pick: index {index} outside length {a.shape[0]}")
    out = a._make_child(np.asarray(a.data[index]), (a,), "pick")

    def _bw(g: np.ndarray) -> None:
        full = np.zeros_like(a.data)
        full[index] = g
        a._accumulate(full)

    out._backward = _bw
    return out


# -- nonlinearities and reductions ---------------------------------------------


def relu(a: Tensor) -> Tensor:
    """Elementwise max(0, x); subgradient at 0 is 0."""
    out = a._make_child(np.maximum(a.data, 0.0), (a,), "relu")
    mask = a.data > 0.0

    def _bw(g: np.ndarray) -> None:
        a._accumulate(g * mask)

    out._backward = _bw
    return out


def log(a: Tensor) -> Tensor:
    """Natural log; inputs must be strictly positive."""
    if np.any(a.data <= 0.0):
        raise DomainError("log: inputs must be strictly positive")
    out = a._make_child(np.log(a.data), (a,), "log")

    def _bw(g: np.ndarray) -> None:
        a._accumulate(g / a.data)

    out._backward = _bw
    return out


def exp(a: Tensor) -> Tensor:
    out = a._make_child(np.exp(a.data), (a,), "exp")

    def _bw(g: np.ndarray) -> None:
        a._accumulate(g * out.data)

    out._backward = _bw
    return out


def tsum(a: Tensor) -> Tensor:
    """Sum of all elements, as a scalar tensor."""
    out = a._make_child(np.asarray(a.data.sum()), (a,), "sum")

    def _bw(g: np.ndarray) -> None:
        a._accumulate(np.full_like(a.data, float(g)))

    out._backward = _bw
    return out


def mean(a: Tensor) -> Tensor:
    """Arithmetic mean of all elements, as a scalar tensor."""
    n = a.size
    out = a._make_child(np.asarray(a.data.mean()), (a,), "mean")

    def _bw(g: np.ndarray) -> None:
        a._accumulate(np.full_like(a.data, float(g) / n))

    out._backward = _bw
    return out


def softmax_temp(z: Tensor, tau: float) -> Tensor:
    """Temperature softmax over the last axis.

    p_i = exp(z_i / tau) / sum_j exp(z_j / tau), computed with
    max-subtraction so that huge logits cannot overflow.
    """
    tau = float(tau)
    if tau <= 0.0:
        raise DomainError(f"softmax_temp: tau must be positive, got {tau}")
    if z.size == 0:
        raise DimensionError("softmax_temp: empty input")
    m = z.data.max(axis=-1, keepdims=True)
    e = np.exp((z.data - m) / tau)
    p = e / e.sum(axis=-1, keepdims=True)
    out = z._make_child(p, (z,), "softmax_temp")

    def _bw(g: np.ndarray) -> None:
        dot = (g * p).sum(axis=-1, keepdims=True)
        z._accumulate(p * (g - dot) / tau)

    out._backward = _bw
    return out


# -- reverse pass --------------------------------------------------------------


def backward(loss: Tensor) -> None:
    """Reverse-mode accumulation of d(loss)/d(leaf) into every leaf's ``grad``.

    ``loss`` must be a scalar. Each node's closure runs exactly once, in
    reverse topological order. Gradients accumulate across calls; zero them
    between steps by setting ``grad = None``.
    """
    if loss.data.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")

    topo: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            topo.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen:
                stack.append((p, False))

    loss._accumulate(np.ones_like(loss.data))
    for node in reversed(topo):
        if node._parents and node._backward is not None and node.grad is not None:
            node._backward(node.grad)
            # Interior grads are not part of the contract; free them so big
            # training graphs do not hold every activation gradient.
            node.grad = None


def zero_grad(params: Iterable[Tensor]) -> None:
    for p in params:
        p.grad = None


def finite_diff_grad(f: Callable[[Tensor], Tensor | float], x: Tensor, eps: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function, the test oracle.

    Evaluates ``(f(x + eps * e_i) - f(x - eps * e_i)) / (2 * eps)`` for every
    coordinate. ``f`` must be deterministic and must not mutate ``x``.
    """
    if eps <= 0.0:
        raise DomainError(f"finite_diff_grad: eps must be positive, got {eps}")

    def _eval(arr: np.ndarray) -> float:
        y = f(Tensor(arr))
        return y.item() if isinstance(y, Tensor) else float(y)

    base = x.data.copy()
    grad = np.zeros_like(base)
    flat = base.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = _eval(base)
        flat[i] = orig - eps
        lo = _eval(base)
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * eps)
    return grad
