"""Dense float64 tensors with tape-based reverse-mode automatic differentiation.

Small by design: only the operations the navigation model needs, on 0/1/2-d
arrays, with no broadcasting beyond scalars. Gradients accumulate into
Tensor.grad (call zero_grad between backward passes); repeated backward calls
without clearing therefore sum gradients, which is what joint losses rely on.

Recording is scoped by a Tape used as a context manager:

    with Tape():
        loss = mean(mul(w, x))
        backward(loss)

Outside any active tape, ops run in inference mode (no graph, no grads).
"""

import logging
import threading

import numpy as np

logger = logging.getLogger(__name__)

_state = threading.local()


def _active_tape():
    return getattr(_state, "tape", None)


class Tape:
    """Ordered record of primitive ops; reverse replay yields gradients.

    One tape per episode/thread. Creation order is a topological order of
    the graph, so backward() walks the op list once in reverse.
    """

    def __init__(self):
        self.ops = []

    def __enter__(self):
        if _active_tape() is not None:
            raise RuntimeError("a Tape is already active on this thread")
        _state.tape = self
        return self

    def __exit__(self, exc_type, exc, tb):
        _state.tape = None
        return False


class _Op:
    __slots__ = ("out", "inputs", "grad_fn")

    def __init__(self, out, inputs, grad_fn):
        self.out = out
        self.inputs = inputs
        self.grad_fn = grad_fn


class Tensor:
    """Dense float64 array plus an optional gradient buffer.

    Data is treated as immutable once the tensor participates in a graph;
    the only sanctioned mutation is an optimizer overwriting the .data of
    leaf parameters between episodes.
    """

    __slots__ = ("data", "requires_grad", "grad", "_tape")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._tape = None

    @property
    def shape(self):
        return self.data.shape

    def item(self):
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def accumulate_grad(self, g):
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64)
        else:
            self.grad = self.grad + g

    def dump_text(self):
        """Portable text form: one shape header line, then values at 17 significant digits."""
        dims = " ".join(str(d) for d in self.data.shape) or "0"
        vals = " ".join("%.17g" % v for v in self.data.reshape(-1))
        return dims + "\n" + vals + "\n"

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return scale(self, -1.0)


def constant(data):
    return Tensor(data, requires_grad=False)


def _as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _record(out, inputs, grad_fn):
    tape = _active_tape()
    if tape is None:
        return out
    if any(inp.requires_grad for inp in inputs):
        out.requires_grad = True
        out._tape = tape
        tape.ops.append(_Op(out, inputs, grad_fn))
    return out


def _check_same_shape(name, a, b):
    if a.data.shape != b.data.shape:
        raise ValueError(f"{name}: shape mismatch {a.data.shape} vs {b.data.shape}")


# ---------------------------------------------------------------------------
# elementwise suite


def add(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    _check_same_shape("add", a, b)
    out = Tensor(a.data + b.data)
    return _record(out, (a, b), lambda g: (g, g))


def sub(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    _check_same_shape("sub", a, b)
    out = Tensor(a.data - b.data)
    return _record(out, (a, b), lambda g: (g, -g))


def mul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    _check_same_shape("mul", a, b)
    out = Tensor(a.data * b.data)
    return _record(out, (a, b), lambda g: (g * b.data, g * a.data))


def scale(a, c):
    a = _as_tensor(a)
    c = float(c)
    out = Tensor(a.data * c)
    return _record(out, (a,), lambda g: (g * c,))


def relu(a):
    a = _as_tensor(a)
    out = Tensor(np.maximum(a.data, 0.0))
    mask = (a.data > 0.0).astype(np.float64)  # subgradient at 0 is 0
    return _record(out, (a,), lambda g: (g * mask,))


def sigmoid(a):
    a = _as_tensor(a)
    # piecewise-stable logistic; never exponentiates a large positive value
    x = a.data
    y = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
    out = Tensor(y)
    return _record(out, (a,), lambda g: (g * y * (1.0 - y),))


def tanh(a):
    a = _as_tensor(a)
    y = np.tanh(a.data)
    out = Tensor(y)
    return _record(out, (a,), lambda g: (g * (1.0 - y * y),))


def exp(a):
    a = _as_tensor(a)
    y = np.exp(a.data)
    out = Tensor(y)
    return _record(out, (a,), lambda g: (g * y,))


def log(a):
    a = _as_tensor(a)
    if np.any(a.data <= 0.0):
        raise ValueError("log: input must be strictly positive")
    out = Tensor(np.log(a.data))
    return _record(out, (a,), lambda g: (g / a.data,))


def tsum(a):
    a = _as_tensor(a)
    out = Tensor(np.sum(a.data))
    return _record(out, (a,), lambda g: (np.full_like(a.data, float(g)),))


def tmean(a):
    a = _as_tensor(a)
    n = a.data.size
    out = Tensor(np.mean(a.data))
    return _record(out, (a,), lambda g: (np.full_like(a.data, float(g) / n),))


# ---------------------------------------------------------------------------
# linear algebra


def matmul(a, b):
    """Matrix product for (m,k)@(k,n), (k,)@(k,n), (m,k)@(k,), (k,)@(k,)."""
    a, b = _as_tensor(a), _as_tensor(b)
    if a.data.ndim not in (1, 2) or b.data.ndim not in (1, 2):
        raise ValueError(f"matmul: rank must be 1 or 2, got {a.data.shape} @ {b.data.shape}")
    ak = a.data.shape[-1]
    bk = b.data.shape[0]
    if ak != bk:
        raise ValueError(f"matmul: inner dimensions disagree {a.data.shape} @ {b.data.shape}")
    out = Tensor(a.data @ b.data)

    def grad_fn(g):
        a2 = a.data.reshape(1, -1) if a.data.ndim == 1 else a.data
        b2 = b.data.reshape(-1, 1) if b.data.ndim == 1 else b.data
        g2 = np.asarray(g, dtype=np.float64).reshape(a2.shape[0], b2.shape[1])
        ga = (g2 @ b2.T).reshape(a.data.shape)
        gb = (a2.T @ g2).reshape(b.data.shape)
        return ga, gb

    return _record(out, (a, b), grad_fn)


def softmax(a):
    """Stable softmax over a 1-d tensor; outputs sum to 1."""
    a = _as_tensor(a)
    if a.data.ndim != 1 or a.data.size < 1:
        raise ValueError(f"softmax: expected non-empty vector, got shape {a.data.shape}")
    z = a.data - np.max(a.data)
    e = np.exp(z)
    y = e / np.sum(e)
    out = Tensor(y)
    return _record(out, (a,), lambda g: (y * (g - np.dot(g, y)),))


def log_softmax(a):
    """log(softmax(a)) for a 1-d tensor, computed without underflow."""
    a = _as_tensor(a)
    if a.data.ndim != 1 or a.data.size < 1:
        raise ValueError(f"log_softmax: expected non-empty vector, got shape {a.data.shape}")
    m = np.max(a.data)
    z = a.data - m
    lse = m + np.log(np.sum(np.exp(z)))
    out = Tensor(a.data - lse)
    p = np.exp(a.data - lse)
    return _record(out, (a,), lambda g: (g - p * np.sum(g),))


def concat(parts, axis=0):
    parts = [_as_tensor(p) for p in parts]
    if len(parts) == 0:
        raise ValueError("concat: empty input list")
    try:
        out = Tensor(np.concatenate([p.data for p in parts], axis=axis))
    except ValueError as err:
        shapes = [p.data.shape for p in parts]
        raise ValueError(f"concat: incompatible shapes {shapes} along axis {axis}") from err
    sizes = [p.data.shape[axis] for p in parts]
    offsets = np.cumsum([0] + sizes)

    def grad_fn(g):
        g = np.asarray(g)
        slicer = [slice(None)] * g.ndim
        grads = []
        for i in range(len(parts)):
            slicer[axis] = slice(offsets[i], offsets[i + 1])
            grads.append(g[tuple(slicer)])
        return tuple(grads)

    return _record(out, tuple(parts), grad_fn)


def stack_rows(vectors):
    """Stack 1-d tensors of equal length into a 2-d tensor, one per row."""
    vectors = [_as_tensor(v) for v in vectors]
    if len(vectors) == 0:
        raise ValueError("stack_rows: empty input list")
    for v in vectors:
        if v.data.ndim != 1:
            raise ValueError(f"stack_rows: expected vectors, got shape {v.data.shape}")
    out = Tensor(np.stack([v.data for v in vectors], axis=0))
    return _record(out, tuple(vectors), lambda g: tuple(g[i] for i in range(len(vectors))))


def slice1d(a, start, stop):
    a = _as_tensor(a)
    if a.data.ndim != 1:
        raise ValueError(f"slice1d: expected vector, got shape {a.data.shape}")
    out = Tensor(a.data[start:stop])

    def grad_fn(g):
        full = np.zeros_like(a.data)
        full[start:stop] = g
        return (full,)

    return _record(out, (a,), grad_fn)


def take(a, index):
    """Scalar a[index] of a 1-d tensor."""
    a = _as_tensor(a)
    if a.data.ndim != 1:
        raise ValueError(f"take: expected vector, got shape {a.data.shape}")
    if not 0 <= index < a.data.size:
        raise IndexError(f"take: index {index} out of range for length {a.data.size}")
    out = Tensor(a.data[index])

    def grad_fn(g):
        full = np.zeros_like(a.data)
        full[index] = float(g)
        return (full,)

    return _record(out, (a,), grad_fn)


def gather_rows(a, indices):
    """Rows a[indices] of a 2-d tensor; gradient scatter-adds into a."""
    a = _as_tensor(a)
    if a.data.ndim != 2:
        raise ValueError(f"gather_rows: expected matrix, got shape {a.data.shape}")
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 1:
        raise ValueError("gather_rows: indices must be 1-d")
    if idx.size and (idx.min() < 0 or idx.max() >= a.data.shape[0]):
        raise IndexError(f"gather_rows: index out of range for {a.data.shape[0]} rows")
    out = Tensor(a.data[idx])

    def grad_fn(g):
        full = np.zeros_like(a.data)
        np.add.at(full, idx, g)
        return (full,)

    return _record(out, (a,), grad_fn)


def cosine_similarity(a, b):
    """a·b / (|a||b|) for vectors; defined as 0 when either norm is 0."""
    a, b = _as_tensor(a), _as_tensor(b)
    _check_same_shape("cosine_similarity", a, b)
    na = np.linalg.norm(a.data)
    nb = np.linalg.norm(b.data)
    if na == 0.0 or nb == 0.0:
        logger.debug("cosine_similarity: zero-norm input, returning 0")
        out = Tensor(0.0)
        return _record(out, (a, b), lambda g: (np.zeros_like(a.data), np.zeros_like(b.data)))
    y = float(np.dot(a.data, b.data) / (na * nb))
    out = Tensor(y)

    def grad_fn(g):
        g = float(g)
        ga = g * (b.data / (na * nb) - y * a.data / (na * na))
        gb = g * (a.data / (na * nb) - y * b.data / (nb * nb))
        return ga, gb

    return _record(out, (a, b), grad_fn)


def l2_normalize_rows(a):
    """Divide each row of a 2-d tensor by its L2 norm; zero rows stay zero."""
    a = _as_tensor(a)
    if a.data.ndim != 2:
        raise ValueError(f"l2_normalize_rows: expected matrix, got shape {a.data.shape}")
    norms = np.linalg.norm(a.data, axis=1, keepdims=True)
    safe = np.where(norms > 0.0, norms, 1.0)
    y = a.data / safe
    out = Tensor(y)

    def grad_fn(g):
        dots = np.sum(g * y, axis=1, keepdims=True)
        gx = (g - y * dots) / safe
        gx = np.where(norms > 0.0, gx, 0.0)
        return (gx,)

    return _record(out, (a,), grad_fn)


def softmax_xent_rows(scores, targets):
    """Mean over rows of -log softmax(scores[r])[targets[r]].

    scores is (R, C); targets an int vector of length R. The workhorse of
    the contrastive consistency objective, fused for tape economy.
    """
    scores = _as_tensor(scores)
    if scores.data.ndim != 2:
        raise ValueError(f"softmax_xent_rows: expected matrix, got shape {scores.data.shape}")
    tgt = np.asarray(targets, dtype=np.int64)
    rows, cols = scores.data.shape
    if tgt.shape != (rows,):
        raise ValueError(f"softmax_xent_rows: targets shape {tgt.shape} does not match {rows} rows")
    if tgt.size and (tgt.min() < 0 or tgt.max() >= cols):
        raise IndexError("softmax_xent_rows: target index out of range")
    m = np.max(scores.data, axis=1, keepdims=True)
    z = scores.data - m
    lse = m[:, 0] + np.log(np.sum(np.exp(z), axis=1))
    nll = lse - scores.data[np.arange(rows), tgt]
    out = Tensor(np.mean(nll))
    p = np.exp(scores.data - lse[:, None])

    def grad_fn(g):
        gs = p.copy()
        gs[np.arange(rows), tgt] -= 1.0
        return (gs * (float(g) / rows),)

    return _record(out, (scores,), grad_fn)


# ---------------------------------------------------------------------------
# backward


def backward(loss):
    """Populate .grad on every requires_grad tensor reachable from loss.

    Gradients accumulate: a second backward over the same graph doubles
    them. Requires a scalar loss recorded on a tape.
    """
    if not isinstance(loss, Tensor):
        raise TypeError("backward: loss must be a Tensor")
    if loss.data.ndim != 0:
        raise ValueError(f"backward: loss must be scalar, got shape {loss.data.shape}")
    tape = loss._tape
    if tape is None:
        raise RuntimeError("backward: loss was not recorded on a tape")

    grads = {id(loss): np.array(1.0)}
    touched = {id(loss): loss}
    for op in reversed(tape.ops):
        g = grads.get(id(op.out))
        if g is None:
            continue
        input_grads = op.grad_fn(g)
        for inp, ig in zip(op.inputs, input_grads):
            if not inp.requires_grad:
                continue
            key = id(inp)
            if key in grads:
                grads[key] = grads[key] + ig
            else:
                grads[key] = np.asarray(ig, dtype=np.float64)
                touched[key] = inp
    for key, tensor in touched.items():
        tensor.accumulate_grad(grads[key])


def zero_grad(tensors):
    for t in tensors:
        t.zero_grad()


def numeric_gradient(fn, tensor, h=1e-5):
    """Central finite-difference gradient of scalar fn() w.r.t. tensor.data.

    Forward evaluations only; independent of the tape machinery, so it
    serves as the oracle for gradient checks.
    """
    base = tensor.data
    grad = np.zeros_like(base)
    flat = base.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = float(fn())
        flat[i] = orig - h
        fm = float(fn())
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * h)
    return grad
