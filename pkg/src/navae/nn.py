"""Minimal dense-network engine: forward, exact reverse-mode gradients, Adam.

Batches are row-major (n_samples, n_features). Everything is float64 and
single-threaded deterministic; parameter updates are functional so cached
activations can detect staleness.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ACTIVATIONS",
    "Layer",
    "Mlp",
    "GradBundle",
    "AdamState",
    "forward",
    "backward",
    "adam_step",
    "grad_check",
    "save_mlp",
    "load_mlp",
]

ACTIVATIONS = ("identity", "tanh", "relu", "sigmoid")

_CHECKPOINT_MAGIC = b"NAVAE1"
_ACT_TAGS = {name: tag for tag, name in enumerate(ACTIVATIONS)}
_TAG_ACTS = {tag: name for name, tag in _ACT_TAGS.items()}


@dataclass
class Layer:
    weight: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weight.ndim != 2 or self.bias.ndim != 1:
            raise ValueError("weight must be 2-D and bias 1-D")
        if self.weight.shape[0] != self.bias.shape[0]:
            raise ValueError("bias length must match weight rows")
        if self.activation not in ACTIVATIONS:
            raise ValueError("unknown activation %r" % (self.activation,))
        if not (np.all(np.isfinite(self.weight)) and np.all(np.isfinite(self.bias))):
            raise ValueError("layer parameters must be finite")


class Mlp:
    """Feedforward chain of dense layers."""

    def __init__(self, layers):
        if not layers:
            raise ValueError("need at least one layer")
        for prev, nxt in zip(layers, layers[1:]):
            if nxt.weight.shape[1] != prev.weight.shape[0]:
                raise ValueError("adjacent layer dimensions do not chain")
        self.layers = list(layers)

    @classmethod
    def create(cls, dims, activations, rng):
        """Build a net with Glorot-uniform weights and zero biases.

        dims is (in, h1, ..., out); activations has one entry per layer.
        """
        if len(activations) != len(dims) - 1:
            raise ValueError("need one activation per layer")
        layers = []
        for fan_in, fan_out, act in zip(dims, dims[1:], activations):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
            layers.append(Layer(w, np.zeros(fan_out), act))
        return cls(layers)

    @property
    def in_dim(self):
        return self.layers[0].weight.shape[1]

    @property
    def out_dim(self):
        return self.layers[-1].weight.shape[0]

    def param_count(self):
        return sum(layer.weight.size + layer.bias.size for layer in self.layers)

    def copy(self):
        return Mlp(
            [
                Layer(layer.weight.copy(), layer.bias.copy(), layer.activation)
                for layer in self.layers
            ]
        )


@dataclass
class GradBundle:
    """Per-layer (dW, db) arrays matching an Mlp's parameter shapes."""

    weights: list = field(default_factory=list)
    biases: list = field(default_factory=list)

    @classmethod
    def zeros_like(cls, net: Mlp):
        return cls(
            weights=[np.zeros_like(layer.weight) for layer in net.layers],
            biases=[np.zeros_like(layer.bias) for layer in net.layers],
        )

    def matches(self, net: Mlp) -> bool:
        return len(self.weights) == len(net.layers) and all(
            w.shape == layer.weight.shape and b.shape == layer.bias.shape
            for w, b, layer in zip(self.weights, self.biases, net.layers)
        )

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(w)) for w in self.weights) and all(
            np.all(np.isfinite(b)) for b in self.biases
        )


def _activate(z, act):
    if act == "identity":
        return z
    if act == "tanh":
        return np.tanh(z)
    if act == "relu":
        return np.maximum(z, 0.0)
    return 1.0 / (1.0 + np.exp(-z))  # sigmoid


def _activate_grad(z, a, act):
    # derivative expressed through the post-activation a where possible
    if act == "identity":
        return np.ones_like(z)
    if act == "tanh":
        return 1.0 - a * a
    if act == "relu":
        return (z > 0).astype(np.float64)
    return a * (1.0 - a)  # sigmoid


@dataclass
class ForwardCache:
    inputs: list  # a_{l-1} per layer, (B, in_l)
    preacts: list  # z_l per layer, (B, out_l)
    outputs: list  # a_l per layer, (B, out_l)
    weight_refs: list  # identity of the weight arrays used


def forward(net: Mlp, x: np.ndarray):
    """Evaluate the net on a (B, in_dim) batch; returns (output, cache)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.in_dim:
        raise ValueError(
            "input shape %s does not match in_dim %d" % (x.shape, net.in_dim)
        )
    inputs, preacts, outputs = [], [], []
    a = x
    for layer in net.layers:
        z = a @ layer.weight.T + layer.bias
        inputs.append(a)
        preacts.append(z)
        a = _activate(z, layer.activation)
        outputs.append(a)
    cache = ForwardCache(inputs, preacts, outputs, [l.weight for l in net.layers])
    return a, cache


def backward(net: Mlp, cache: ForwardCache, out_grad: np.ndarray) -> GradBundle:
    """Exact gradients of a scalar loss given d(loss)/d(output).

    Also usable for input gradients via the returned bundle's companion
    value; see backward_with_input_grad.
    """
    grads, _ = backward_with_input_grad(net, cache, out_grad)
    return grads


def backward_with_input_grad(net: Mlp, cache: ForwardCache, out_grad: np.ndarray):
    out_grad = np.asarray(out_grad, dtype=np.float64)
    if len(cache.weight_refs) != len(net.layers) or any(
        ref is not layer.weight for ref, layer in zip(cache.weight_refs, net.layers)
    ):
        raise ValueError("stale cache: forward was run on different parameters")
    if out_grad.shape != cache.outputs[-1].shape:
        raise ValueError("output gradient shape mismatch")

    grads = GradBundle()
    grads.weights = [None] * len(net.layers)
    grads.biases = [None] * len(net.layers)

    delta = out_grad
    for idx in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[idx]
        z, a = cache.preacts[idx], cache.outputs[idx]
        delta = delta * _activate_grad(z, a, layer.activation)
        grads.weights[idx] = delta.T @ cache.inputs[idx]
        grads.biases[idx] = delta.sum(axis=0)
        delta = delta @ layer.weight
    return grads, delta


@dataclass
class AdamState:
    m: GradBundle
    v: GradBundle
    step: int
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def create(cls, net: Mlp, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        return cls(
            m=GradBundle.zeros_like(net),
            v=GradBundle.zeros_like(net),
            step=0,
            lr=lr,
            beta1=beta1,
            beta2=beta2,
            eps=eps,
        )


def adam_step(net: Mlp, grads: GradBundle, state: AdamState):
    """One Adam update with bias correction; returns (new net, new state)."""
    if not grads.matches(net):
        raise ValueError("gradient shapes do not match the net")
    if not grads.all_finite():
        raise FloatingPointError("non-finite gradient")

    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    corr1 = 1.0 - b1**t
    corr2 = 1.0 - b2**t

    new_layers = []
    new_m = GradBundle()
    new_v = GradBundle()
    for i, layer in enumerate(net.layers):
        mw = b1 * state.m.weights[i] + (1 - b1) * grads.weights[i]
        vw = b2 * state.v.weights[i] + (1 - b2) * grads.weights[i] ** 2
        mb = b1 * state.m.biases[i] + (1 - b1) * grads.biases[i]
        vb = b2 * state.v.biases[i] + (1 - b2) * grads.biases[i] ** 2
        w = layer.weight - state.lr * (mw / corr1) / (np.sqrt(vw / corr2) + state.eps)
        b = layer.bias - state.lr * (mb / corr1) / (np.sqrt(vb / corr2) + state.eps)
        new_layers.append(Layer(w, b, layer.activation))
        new_m.weights.append(mw)
        new_m.biases.append(mb)
        new_v.weights.append(vw)
        new_v.biases.append(vb)

    new_state = AdamState(
        m=new_m,
        v=new_v,
        step=t,
        lr=state.lr,
        beta1=b1,
        beta2=b2,
        eps=state.eps,
    )
    return Mlp(new_layers), new_state


@dataclass
class GradCheckReport:
    max_rel_err: float
    worst: tuple  # (layer index, "weight"|"bias", flat index)
    passed: bool


def grad_check(net: Mlp, loss_fn, tol: float = 1e-4, step: float = 1e-5):
    """Compare analytic gradients against central finite differences.

    loss_fn(net) must return (loss, GradBundle). The net is perturbed in
    place one parameter at a time and restored bit-exactly.
    """
    _, analytic = loss_fn(net)
    if not analytic.matches(net):
        raise ValueError("loss_fn returned mismatched gradient shapes")

    worst = (0, "weight", 0)
    max_rel = 0.0
    for li, layer in enumerate(net.layers):
        for kind, arr, grad in (
            ("weight", layer.weight, analytic.weights[li]),
            ("bias", layer.bias, analytic.biases[li]),
        ):
            flat = arr.reshape(-1)
            gflat = grad.reshape(-1)
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + step
                plus, _ = loss_fn(net)
                flat[j] = orig - step
                minus, _ = loss_fn(net)
                flat[j] = orig
                numeric = (plus - minus) / (2.0 * step)
                rel = abs(gflat[j] - numeric) / max(abs(gflat[j]) + abs(numeric), 1e-6)
                if rel > max_rel:
                    max_rel = rel
                    worst = (li, kind, j)
    return GradCheckReport(max_rel_err=max_rel, worst=worst, passed=max_rel <= tol)


# ---------------------------------------------------------------------------
# Checkpoint I/O: magic "NAVAE1", then per-layer records of
# <u32 out><u32 in> + row-major float64 weights + float64 biases + act tag u8
# (little-endian throughout, no trailing data).
# ---------------------------------------------------------------------------


def save_mlp(path, net: Mlp):
    with open(path, "wb") as fh:
        fh.write(_CHECKPOINT_MAGIC)
        for layer in net.layers:
            out_dim, in_dim = layer.weight.shape
            fh.write(struct.pack("<II", out_dim, in_dim))
            fh.write(np.ascontiguousarray(layer.weight, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(layer.bias, dtype="<f8").tobytes())
            fh.write(struct.pack("<B", _ACT_TAGS[layer.activation]))


def load_mlp(path) -> Mlp:
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.startswith(_CHECKPOINT_MAGIC):
        raise ValueError("%s is not a NAVAE1 checkpoint" % (path,))
    pos = len(_CHECKPOINT_MAGIC)
    layers = []
    while pos < len(blob):
        if pos + 8 > len(blob):
            raise ValueError("truncated checkpoint header")
        out_dim, in_dim = struct.unpack_from("<II", blob, pos)
        pos += 8
        n_w = out_dim * in_dim * 8
        n_b = out_dim * 8
        if pos + n_w + n_b + 1 > len(blob):
            raise ValueError("truncated checkpoint payload")
        w = np.frombuffer(blob, dtype="<f8", count=out_dim * in_dim, offset=pos)
        pos += n_w
        b = np.frombuffer(blob, dtype="<f8", count=out_dim, offset=pos)
        pos += n_b
        (tag,) = struct.unpack_from("<B", blob, pos)
        pos += 1
        if tag not in _TAG_ACTS:
            raise ValueError("unknown activation tag %d" % tag)
        layers.append(
            Layer(w.reshape(out_dim, in_dim).copy(), b.copy(), _TAG_ACTS[tag])
        )
    return Mlp(layers)
