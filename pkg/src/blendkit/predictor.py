"""Per-model quality prediction from a query embedding.

A small regression head, dropout -> GELU -> Linear -> GLU -> Linear, with
one output per registry model, trained with Huber loss and Adam plus
decoupled weight decay. Everything is plain numpy with hand-written
analytic gradients so training is deterministic and dependency-free.

Note the layer order: the activation comes before the first linear map.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .embedding import Embedding
from .errors import DimensionError, TrainingError

CHECKPOINT_VERSION = 1

PARAM_NAMES = (
    "linear1_w", "linear1_b",
    "glu_w", "glu_b", "glu_v", "glu_c",
    "linear2_w", "linear2_b",
)


def gelu(x):
    """Exact GELU, x * Phi(x), via the error function."""
    x = np.asarray(x, dtype=float)
    return x * 0.5 * (1.0 + erf(x / math.sqrt(2.0)))


def sigmoid(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def glu(x, w, b, v, c):
    """Gated linear unit with separate projections: (xW+b) * sigmoid(xV+c)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != w.shape[0]:
        raise DimensionError(
            f"glu input dim {x.shape[-1]} != weight rows {w.shape[0]}"
        )
    return (x @ w + b) * sigmoid(x @ v + c)


def huber_loss(pred, target, delta: float) -> float:
    """Mean Huber value over components: quadratic below delta, linear above."""
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise DimensionError("pred and target shapes differ")
    if delta <= 0:
        raise ValueError("delta must be positive")
    r = np.abs(pred - target)
    quad = 0.5 * r * r
    lin = delta * (r - 0.5 * delta)
    return float(np.mean(np.where(r <= delta, quad, lin)))


def _huber_grad(residual, delta: float):
    # derivative of the per-component Huber value w.r.t. the residual
    return np.clip(residual, -delta, delta)


@dataclass
class PredictorHead:
    """Weights of the regression head. dims: d -> h -> g -> n_models."""

    dropout_p: float
    linear1_w: np.ndarray  # (d, h)
    linear1_b: np.ndarray  # (h,)
    glu_w: np.ndarray      # (h, g)
    glu_b: np.ndarray      # (g,)
    glu_v: np.ndarray      # (h, g)
    glu_c: np.ndarray      # (g,)
    linear2_w: np.ndarray  # (g, n_models)
    linear2_b: np.ndarray  # (n_models,)

    @property
    def d(self) -> int:
        return self.linear1_w.shape[0]

    @property
    def n_models(self) -> int:
        return self.linear2_w.shape[1]

    def params(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def copy(self) -> "PredictorHead":
        return PredictorHead(
            dropout_p=self.dropout_p,
            **{name: getattr(self, name).copy() for name in PARAM_NAMES},
        )


def init_head(
    d: int = 256,
    h: int = 256,
    g: int = 128,
    n_models: int = 1,
    dropout_p: float = 0.2,
    seed: int = 0,
) -> PredictorHead:
    """Xavier-uniform weights, zero biases, seeded."""
    if not (0 <= dropout_p < 1):
        raise ValueError("dropout_p must be in [0, 1)")
    rng = np.random.default_rng(seed)

    def xavier(fan_in, fan_out):
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, size=(fan_in, fan_out))

    return PredictorHead(
        dropout_p=dropout_p,
        linear1_w=xavier(d, h),
        linear1_b=np.zeros(h),
        glu_w=xavier(h, g),
        glu_b=np.zeros(g),
        glu_v=xavier(h, g),
        glu_c=np.zeros(g),
        linear2_w=xavier(g, n_models),
        linear2_b=np.zeros(n_models),
    )


def _dropout_mask(rng: np.random.Generator, d: int, p: float) -> np.ndarray:
    # inverted dropout: scale kept units by 1/(1-p) so inference needs no rescale
    keep = rng.random(d) >= p
    return keep / (1.0 - p)


def forward(
    head: PredictorHead,
    e: Embedding,
    training: bool = False,
    rng: np.random.Generator | None = None,
    dropout_mask: np.ndarray | None = None,
) -> np.ndarray:
    """linear2(glu(linear1(gelu(dropout(e))))); dropout only when training."""
    x = e.vector
    if x.shape[0] != head.d:
        raise DimensionError(f"embedding dim {x.shape[0]} != head dim {head.d}")
    if training and head.dropout_p > 0:
        if dropout_mask is None:
            if rng is None:
                raise TrainingError("training forward needs an rng or a mask")
            dropout_mask = _dropout_mask(rng, head.d, head.dropout_p)
        x = x * dropout_mask
    a = gelu(x)
    z1 = a @ head.linear1_w + head.linear1_b
    z2 = glu(z1, head.glu_w, head.glu_b, head.glu_v, head.glu_c)
    return z2 @ head.linear2_w + head.linear2_b


def predict(head: PredictorHead, e: Embedding) -> np.ndarray:
    """Inference scores; slot i is the predicted quality of registry model i."""
    return forward(head, e, training=False)


def backward(
    head: PredictorHead,
    e: Embedding,
    target: np.ndarray,
    delta: float,
    dropout_mask: np.ndarray | None = None,
) -> tuple[float, dict[str, np.ndarray]]:
    """Loss and exact analytic gradients w.r.t. every weight and bias.

    Dropout is off unless an explicit mask is supplied (fixed-mask training
    step); the mask, not fresh noise, keeps the gradients exact.
    """
    x = e.vector
    if x.shape[0] != head.d:
        raise DimensionError(f"embedding dim {x.shape[0]} != head dim {head.d}")
    target = np.asarray(target, dtype=float)
    if target.shape != (head.n_models,):
        raise DimensionError("target length must equal n_models")

    if dropout_mask is not None:
        x = x * dropout_mask
    a = gelu(x)
    z1 = a @ head.linear1_w + head.linear1_b
    u = z1 @ head.glu_w + head.glu_b
    s = sigmoid(z1 @ head.glu_v + head.glu_c)
    z2 = u * s
    y = z2 @ head.linear2_w + head.linear2_b

    n = head.n_models
    residual = y - target
    loss = huber_loss(y, target, delta)

    dy = _huber_grad(residual, delta) / n
    grads = {
        "linear2_w": np.outer(z2, dy),
        "linear2_b": dy,
    }
    dz2 = head.linear2_w @ dy
    du = dz2 * s
    ds = dz2 * u
    dv_pre = ds * s * (1.0 - s)
    grads["glu_w"] = np.outer(z1, du)
    grads["glu_b"] = du
    grads["glu_v"] = np.outer(z1, dv_pre)
    grads["glu_c"] = dv_pre
    dz1 = head.glu_w @ du + head.glu_v @ dv_pre
    grads["linear1_w"] = np.outer(a, dz1)
    grads["linear1_b"] = dz1
    return loss, grads


@dataclass
class TrainConfig:
    delta: float = 0.3
    learning_rate: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.98
    weight_decay: float = 0.01
    epochs: int = 3
    batch_size: int = 16
    rng_seed: int = 0
    adam_eps: float = 1e-8

    def validate(self) -> None:
        if self.delta <= 0:
            raise TrainingError("delta must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise TrainingError("betas must be in [0, 1)")
        if self.epochs < 1:
            raise TrainingError("epochs must be >= 1")
        if self.batch_size < 1:
            raise TrainingError("batch_size must be >= 1")


def train(
    head: PredictorHead,
    dataset: list[tuple[Embedding, np.ndarray]],
    config: TrainConfig | None = None,
) -> tuple[PredictorHead, list[float]]:
    """Minibatch Adam with decoupled weight decay; returns (head, loss trace).

    Weight decay multiplies each weight by (1 - weight_decay) every step,
    independent of the learning rate. Deterministic given rng_seed: the
    shuffle and dropout streams are fixed and gradient accumulation over a
    batch is serial.
    """
    config = config or TrainConfig()
    config.validate()
    if not dataset:
        raise TrainingError("dataset is empty")
    for emb, tgt in dataset:
        if emb.d != head.d:
            raise DimensionError("embedding dim mismatch in dataset")
        if np.asarray(tgt).shape != (head.n_models,):
            raise DimensionError("target length mismatch in dataset")

    head = head.copy()
    rng = np.random.default_rng(config.rng_seed)
    params = head.params()
    m = {k: np.zeros_like(v) for k, v in params.items()}
    v = {k: np.zeros_like(p) for k, p in params.items()}
    step = 0
    trace: list[float] = []

    n = len(dataset)
    for _ in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            grads_sum = {k: np.zeros_like(p) for k, p in params.items()}
            batch_loss = 0.0
            for idx in batch:
                emb, tgt = dataset[idx]
                mask = None
                if head.dropout_p > 0:
                    mask = _dropout_mask(rng, head.d, head.dropout_p)
                loss, grads = backward(
                    head, emb, np.asarray(tgt, dtype=float), config.delta,
                    dropout_mask=mask,
                )
                batch_loss += loss
                for k in grads_sum:
                    grads_sum[k] += grads[k]
            bsz = len(batch)
            batch_loss /= bsz
            if not math.isfinite(batch_loss):
                raise TrainingError(f"non-finite loss at step {step}")
            epoch_loss += batch_loss * bsz

            step += 1
            bc1 = 1.0 - config.beta1 ** step
            bc2 = 1.0 - config.beta2 ** step
            for k, p in params.items():
                g = grads_sum[k] / bsz
                m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g
                v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g * g
                if config.weight_decay > 0:
                    p *= 1.0 - config.weight_decay
                p -= config.learning_rate * (m[k] / bc1) / (
                    np.sqrt(v[k] / bc2) + config.adam_eps
                )
        trace.append(epoch_loss / n)
    return head, trace


# --- checkpoint format: versioned JSON with a payload checksum ---

def _payload(head: PredictorHead) -> dict:
    return {
        "format_version": CHECKPOINT_VERSION,
        "dropout_p": head.dropout_p,
        "dims": {
            "d": head.d,
            "h": head.linear1_w.shape[1],
            "g": head.glu_w.shape[1],
            "n_models": head.n_models,
        },
        "weights": {k: v.tolist() for k, v in head.params().items()},
    }


def _checksum(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def save_head(head: PredictorHead, path: str) -> None:
    payload = _payload(head)
    doc = {"payload": payload, "checksum": _checksum(payload)}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)


def load_head(path: str) -> PredictorHead:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    payload = doc.get("payload")
    if payload is None or doc.get("checksum") != _checksum(payload):
        raise TrainingError(f"checkpoint {path} is corrupt (checksum mismatch)")
    if payload.get("format_version") != CHECKPOINT_VERSION:
        raise TrainingError(
            f"checkpoint {path}: unsupported format version"
        )
    weights = {k: np.asarray(v, dtype=float) for k, v in payload["weights"].items()}
    return PredictorHead(dropout_p=float(payload["dropout_p"]), **weights)
