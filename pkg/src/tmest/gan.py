"""Demand estimation by inverting a pretrained fully-connected generator.

The generator maps a low-dimensional latent vector to a demand vector. Given
link loads b and routing matrix A, estimation searches the latent space for
the point whose generated demands best reproduce the loads:

    minimize_z  || b - A * T(z) ||^2

using the best of N_i random Gaussian starts followed by N_2 Adam steps on
the exact reverse-mode gradient. The lowest-loss iterate seen is returned
(the trajectory itself is allowed to wander).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dist import make_rng
from .errors import DimensionMismatch, MalformedWeights, TmestError
from .traffic import TrafficVector, _as_matrix, _as_vector

_ACTIVATIONS = ("relu", "linear")


@dataclass(frozen=True)
class GeneratorNet:
    """Fully-connected net: affine layers with ReLU between, scaled output.

    `layers` holds (weight, bias) pairs; weight shapes chain from latent_dim
    to output_dim. Raw outputs are multiplied by scale_mbps to obtain Mbps.
    """

    layers: tuple[tuple[np.ndarray, np.ndarray], ...]
    scale_mbps: float = 1.0
    hidden_activation: str = "relu"
    output_activation: str = "relu"

    def __post_init__(self):
        if not self.layers:
            raise MalformedWeights("generator needs at least one layer")
        if self.hidden_activation != "relu":
            raise MalformedWeights(f"unknown hidden activation {self.hidden_activation!r}")
        if self.output_activation not in _ACTIVATIONS:
            raise MalformedWeights(f"unknown output activation {self.output_activation!r}")
        if not (np.isfinite(self.scale_mbps) and self.scale_mbps > 0):
            raise MalformedWeights("scale_mbps must be positive and finite")
        prev = None
        clean = []
        for k, (W, bias) in enumerate(self.layers):
            W = np.asarray(W, dtype=float)
            bias = np.asarray(bias, dtype=float)
            if W.ndim != 2 or bias.ndim != 1 or W.shape[0] != bias.shape[0]:
                raise MalformedWeights(f"layer {k}: weight/bias shapes do not agree")
            if prev is not None and W.shape[1] != prev:
                raise MalformedWeights(
                    f"layer {k}: expects {W.shape[1]} inputs, previous layer emits {prev}"
                )
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(bias))):
                raise MalformedWeights(f"layer {k}: non-finite parameters")
            W.flags.writeable = False
            bias.flags.writeable = False
            clean.append((W, bias))
            prev = W.shape[0]
        object.__setattr__(self, "layers", tuple(clean))

    @property
    def latent_dim(self) -> int:
        return self.layers[0][0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1][0].shape[0]


@dataclass(frozen=True)
class GanEstimateConfig:
    inits: int = 100
    steps: int = 10_000
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.inits < 1:
            raise TmestError("inits must be >= 1")
        if self.steps < 0:
            raise TmestError("steps must be >= 0")
        if not self.learning_rate > 0:
            raise TmestError("learning rate must be positive")


@dataclass
class GanDiagnostics:
    loss_trace: list[float] = field(default_factory=list)
    init_loss: float = math.nan
    best_loss: float = math.nan
    best_step: int = -1


def _forward_trace(net: GeneratorNet, z: np.ndarray):
    """Pre-activations and activations per layer, raw output unscaled."""
    pres = []
    h = z
    last = len(net.layers) - 1
    for k, (W, bias) in enumerate(net.layers):
        pre = W @ h + bias
        pres.append(pre)
        if k < last or net.output_activation == "relu":
            h = np.maximum(pre, 0.0)
        else:
            h = pre
    return pres, h


def generator_forward(net: GeneratorNet, latent) -> np.ndarray:
    """Generated demand vector (Mbps) for one latent vector."""
    z = _as_vector(latent)
    if len(z) != net.latent_dim:
        raise DimensionMismatch(f"latent has {len(z)} entries, generator expects {net.latent_dim}")
    _, raw = _forward_trace(net, z)
    return net.scale_mbps * raw


def _forward_batch(net: GeneratorNet, Z: np.ndarray) -> np.ndarray:
    """Row-wise forward pass for a batch of latent vectors."""
    H = Z
    last = len(net.layers) - 1
    for k, (W, bias) in enumerate(net.layers):
        H = H @ W.T + bias
        if k < last or net.output_activation == "relu":
            H = np.maximum(H, 0.0)
    return net.scale_mbps * H


def loss_and_latent_gradient(net: GeneratorNet, A, b, latent) -> tuple[float, np.ndarray]:
    """Squared load mismatch and its exact gradient in the latent vector.

    ReLU is given subgradient 0 at exactly 0, so the gradient is the
    reverse-mode derivative of the piecewise-linear forward map.
    """
    mat = _as_matrix(A)
    bv = _as_vector(b)
    z = _as_vector(latent)
    if len(z) != net.latent_dim:
        raise DimensionMismatch(f"latent has {len(z)} entries, generator expects {net.latent_dim}")
    if net.output_dim != mat.shape[1]:
        raise DimensionMismatch(
            f"generator emits {net.output_dim} demands, matrix has {mat.shape[1]} columns"
        )
    if len(bv) != mat.shape[0]:
        raise DimensionMismatch(f"load vector has {len(bv)} entries, matrix has {mat.shape[0]} rows")

    pres, raw = _forward_trace(net, z)
    mismatch = bv - mat @ (net.scale_mbps * raw)
    loss = float(mismatch @ mismatch)

    g = net.scale_mbps * (-2.0) * (mat.T @ mismatch)
    last = len(net.layers) - 1
    for k in range(last, -1, -1):
        W, _bias = net.layers[k]
        if k < last or net.output_activation == "relu":
            g = g * (pres[k] > 0)
        g = W.T @ g
    return loss, g


def gan_estimate(net: GeneratorNet, A, b, config: GanEstimateConfig | None = None):
    """Best-of-inits Gaussian start, then Adam descent in the latent space.

    Returns the demands generated at the lowest-loss latent seen (clipped at
    zero, which only matters for linear-output generators) plus diagnostics.
    Deterministic given the seed.
    """
    cfg = config or GanEstimateConfig()
    mat = _as_matrix(A)
    bv = _as_vector(b)
    if net.output_dim != mat.shape[1]:
        raise DimensionMismatch(
            f"generator emits {net.output_dim} demands, matrix has {mat.shape[1]} columns"
        )
    if len(bv) != mat.shape[0]:
        raise DimensionMismatch(f"load vector has {len(bv)} entries, matrix has {mat.shape[0]} rows")

    rng = make_rng(cfg.seed)
    Z = rng.standard_normal((cfg.inits, net.latent_dim))
    mismatches = _forward_batch(net, Z) @ mat.T - bv
    init_losses = np.einsum("ij,ij->i", mismatches, mismatches)
    z = Z[int(np.argmin(init_losses))].copy()

    diag = GanDiagnostics(init_loss=float(init_losses.min()))
    best_loss = math.inf
    best_z = z.copy()
    m = np.zeros_like(z)
    v = np.zeros_like(z)
    for step in range(cfg.steps):
        loss, grad = loss_and_latent_gradient(net, mat, bv, z)
        diag.loss_trace.append(loss)
        if loss < best_loss:
            best_loss, best_z, diag.best_step = loss, z.copy(), step
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad
        mhat = m / (1.0 - cfg.beta1 ** (step + 1))
        vhat = v / (1.0 - cfg.beta2 ** (step + 1))
        z = z - cfg.learning_rate * mhat / (np.sqrt(vhat) + cfg.eps)
    final_loss, _ = loss_and_latent_gradient(net, mat, bv, z)
    diag.loss_trace.append(final_loss)
    if final_loss < best_loss:
        best_loss, best_z, diag.best_step = final_loss, z.copy(), cfg.steps
    diag.best_loss = best_loss

    demands = np.maximum(generator_forward(net, best_z), 0.0)
    return TrafficVector(demands), diag


# ---------------------------------------------------------------------------
# Weight file interchange


def save_generator(net: GeneratorNet, path, metadata: dict | None = None) -> None:
    """Write the generator to the JSON weight format."""
    doc = {
        "format_version": 1,
        "latent_dim": net.latent_dim,
        "output_dim": net.output_dim,
        "scale_mbps": float(net.scale_mbps),
        "hidden_activation": net.hidden_activation,
        "output_activation": net.output_activation,
        "layers": [
            {
                "rows": int(W.shape[0]),
                "cols": int(W.shape[1]),
                "weights": [float(w) for w in W.ravel()],
                "bias": [float(x) for x in bias],
            }
            for W, bias in net.layers
        ],
    }
    if metadata:
        doc["metadata"] = metadata
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_generator(path) -> GeneratorNet:
    """Load and validate a generator weight file."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedWeights(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise MalformedWeights(f"{path}: top level must be an object")
    if doc.get("format_version") != 1:
        raise MalformedWeights(f"{path}: unsupported format_version {doc.get('format_version')!r}")
    try:
        raw_layers = doc["layers"]
        latent_dim = int(doc["latent_dim"])
        output_dim = int(doc["output_dim"])
        scale = float(doc["scale_mbps"])
        hidden_act = doc["hidden_activation"]
        output_act = doc["output_activation"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedWeights(f"{path}: missing or malformed field ({exc})") from exc
    if not isinstance(raw_layers, list) or not raw_layers:
        raise MalformedWeights(f"{path}: layers must be a nonempty list")
    layers = []
    for k, entry in enumerate(raw_layers):
        try:
            rows, cols = int(entry["rows"]), int(entry["cols"])
            weights = np.asarray(entry["weights"], dtype=float)
            bias = np.asarray(entry["bias"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedWeights(f"{path}: layer {k} malformed ({exc})") from exc
        if weights.size != rows * cols or bias.size != rows:
            raise MalformedWeights(f"{path}: layer {k} has wrong weight or bias count")
        layers.append((weights.reshape(rows, cols), bias))
    net = GeneratorNet(
        layers=tuple(layers),
        scale_mbps=scale,
        hidden_activation=hidden_act,
        output_activation=output_act,
    )
    if net.latent_dim != latent_dim:
        raise MalformedWeights(f"{path}: declared latent_dim {latent_dim} != layer chain {net.latent_dim}")
    if net.output_dim != output_dim:
        raise MalformedWeights(f"{path}: declared output_dim {output_dim} != layer chain {net.output_dim}")
    return net
