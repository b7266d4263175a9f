"""Black-box classifiers loaded from JSON model files.

Only ``predict`` is used by the rest of the library.  Labels are 1-based
and ties in scores or votes go to the smallest label.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import DimensionError, ModelError

KINDS = ("linear", "qda", "tree_ensemble", "mlp")


@dataclass(frozen=True)
class Prediction:
    label: int
    scores: tuple[float, ...] | None = None


def _matrix(value, name: str, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelError(f"{name}: expected a numeric matrix") from exc
    if arr.ndim != 2 or arr.size == 0:
        raise ModelError(f"{name}: expected a non-empty 2-D matrix, got shape {arr.shape}")
    if rows is not None and arr.shape[0] != rows:
        raise ModelError(f"{name}: expected {rows} rows, got {arr.shape[0]}")
    if cols is not None and arr.shape[1] != cols:
        raise ModelError(f"{name}: expected {cols} columns, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ModelError(f"{name}: entries must be finite")
    return arr


def _vector(value, name: str, length: int) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelError(f"{name}: expected a numeric vector") from exc
    if arr.shape != (length,):
        raise ModelError(f"{name}: expected length {length}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ModelError(f"{name}: entries must be finite")
    return arr


def _scalar(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelError(f"{name}: expected a number")
    if not math.isfinite(value):
        raise ModelError(f"{name}: must be finite")
    return float(value)


@dataclass(frozen=True)
class ClassifierModel:
    """A validated classifier.

    ``weights`` keeps the JSON payload verbatim so that saving reproduces
    the input file; numeric arrays are parsed once into ``_compiled``.
    """

    kind: str
    dimension: int
    num_classes: int
    weights: dict[str, Any]
    name: str = ""
    _compiled: Any = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModelError(f"kind: unknown model kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if isinstance(self.dimension, bool) or not isinstance(self.dimension, int) or self.dimension < 1:
            raise ModelError(f"dimension: must be a positive integer, got {self.dimension!r}")
        if isinstance(self.num_classes, bool) or not isinstance(self.num_classes, int) or self.num_classes < 2:
            raise ModelError(f"num_classes: must be an integer >= 2, got {self.num_classes!r}")
        if not isinstance(self.weights, dict):
            raise ModelError("weights: expected an object")
        compile_fn = {
            "linear": _compile_linear,
            "qda": _compile_qda,
            "tree_ensemble": _compile_trees,
            "mlp": _compile_mlp,
        }[self.kind]
        object.__setattr__(self, "_compiled", compile_fn(self.weights, self.dimension, self.num_classes))

    def scores_batch(self, points) -> np.ndarray:
        pts = self._points(points)
        return self._compiled(pts)

    def predict_batch(self, points) -> np.ndarray:
        """Labels (1-based) for an ``(n, d)`` array of points."""
        # argmax returns the first maximum, i.e. the smallest label on ties
        return np.argmax(self.scores_batch(points), axis=1) + 1

    def predict(self, point) -> Prediction:
        scores = self.scores_batch(np.asarray(point, dtype=float).reshape(1, -1))[0]
        return Prediction(int(np.argmax(scores)) + 1, tuple(float(s) for s in scores))

    def _points(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        if pts.ndim != 2 or pts.shape[1] != self.dimension:
            raise DimensionError(f"model expects {self.dimension}-dimensional points, got shape {pts.shape}")
        return pts

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "dimension": self.dimension,
            "num_classes": self.num_classes,
            "weights": self.weights,
        }


def _compile_linear(weights, d, k):
    classes = weights.get("classes")
    if not isinstance(classes, list) or len(classes) != k:
        raise ModelError(f"weights.classes: expected {k} per-class entries")
    w = np.stack([_vector(c.get("weights"), f"weights.classes[{i}].weights", d) for i, c in enumerate(classes)])
    b = np.array([_scalar(c.get("bias"), f"weights.classes[{i}].bias") for i, c in enumerate(classes)])
    return lambda pts: pts @ w.T + b


def _compile_qda(weights, d, k):
    classes = weights.get("classes")
    if not isinstance(classes, list) or len(classes) != k:
        raise ModelError(f"weights.classes: expected {k} per-class entries")
    quad = np.stack([_matrix(c.get("quadratic"), f"weights.classes[{i}].quadratic", d, d) for i, c in enumerate(classes)])
    lin = np.stack([_vector(c.get("linear"), f"weights.classes[{i}].linear", d) for i, c in enumerate(classes)])
    const = np.array([_scalar(c.get("constant"), f"weights.classes[{i}].constant") for i, c in enumerate(classes)])

    def scores(pts):
        return np.einsum("ni,kij,nj->nk", pts, quad, pts) + pts @ lin.T + const

    return scores


def _compile_mlp(weights, d, k):
    layers = weights.get("layers")
    if not isinstance(layers, list) or not layers:
        raise ModelError("weights.layers: an MLP needs at least one layer")
    mats, biases = [], []
    width = d
    for i, layer in enumerate(layers):
        m = _matrix(layer.get("matrix"), f"weights.layers[{i}].matrix", cols=width)
        b = _vector(layer.get("bias"), f"weights.layers[{i}].bias", m.shape[0])
        mats.append(m)
        biases.append(b)
        width = m.shape[0]
    if width != k:
        raise ModelError(f"weights.layers: last layer has {width} outputs, expected {k}")

    def scores(pts):
        h = pts
        for i, (m, b) in enumerate(zip(mats, biases)):
            h = h @ m.T + b
            if i < len(mats) - 1:
                h = np.maximum(h, 0.0)
        return h

    return scores


def _compile_trees(weights, d, k):
    trees = weights.get("trees")
    if not isinstance(trees, list) or not trees:
        raise ModelError("weights.trees: a tree ensemble needs at least one tree")
    compiled = []
    for ti, tree in enumerate(trees):
        nodes = tree.get("nodes") if isinstance(tree, dict) else None
        if not isinstance(nodes, list) or not nodes:
            raise ModelError(f"weights.trees[{ti}].nodes: expected a non-empty node list")
        for ni, node in enumerate(nodes):
            where = f"weights.trees[{ti}].nodes[{ni}]"
            if "leaf" in node:
                leaf = node["leaf"]
                if isinstance(leaf, bool) or not isinstance(leaf, int) or not 1 <= leaf <= k:
                    raise ModelError(f"{where}.leaf: class must be an integer in 1..{k}")
                continue
            feat = node.get("feature")
            if isinstance(feat, bool) or not isinstance(feat, int) or not 0 <= feat < d:
                raise ModelError(f"{where}.feature: index must be an integer in 0..{d - 1}, got {feat!r}")
            thr = _scalar(node.get("threshold"), f"{where}.threshold")
            if not 0.0 <= thr <= 1.0:
                raise ModelError(f"{where}.threshold: must lie in [0, 1], got {thr}")
            for side in ("left", "right"):
                child = node.get(side)
                if isinstance(child, bool) or not isinstance(child, int) or not 0 <= child < len(nodes) or child == ni:
                    raise ModelError(f"{where}.{side}: child must index another node of this tree")
        compiled.append(nodes)

    def votes(pts):
        counts = np.zeros((pts.shape[0], k))
        rows = np.arange(pts.shape[0])
        for nodes in compiled:
            counts[rows, _route(nodes, pts) - 1] += 1
        return counts

    return votes


def _route(nodes, pts) -> np.ndarray:
    """Leaf label reached by each point; ``x[feature] <= threshold`` goes left."""
    current = np.zeros(pts.shape[0], dtype=int)
    labels = np.zeros(pts.shape[0], dtype=int)
    active = np.ones(pts.shape[0], dtype=bool)
    for _ in range(len(nodes) + 1):
        if not active.any():
            return labels
        for ni in np.unique(current[active]):
            node = nodes[ni]
            sel = active & (current == ni)
            if "leaf" in node:
                labels[sel] = node["leaf"]
                active[sel] = False
            else:
                go_left = pts[sel, node["feature"]] <= node["threshold"]
                current[sel] = np.where(go_left, node["left"], node["right"])
    raise ModelError("tree contains a cycle")


def model_from_dict(payload: dict[str, Any], name: str = "") -> ClassifierModel:
    if not isinstance(payload, dict):
        raise ModelError("model file must contain a JSON object")
    missing = [key for key in ("kind", "dimension", "num_classes", "weights") if key not in payload]
    if missing:
        raise ModelError(f"{missing[0]}: required field is missing")
    return ClassifierModel(payload["kind"], payload["dimension"], payload["num_classes"], payload["weights"], name)


def load_model(path) -> ClassifierModel:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ModelError(f"model file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from exc
    return model_from_dict(payload, path.stem)


def save_model(model: ClassifierModel, path) -> None:
    # json writes floats with repr(), which round-trips exactly
    Path(path).write_text(json.dumps(model.to_dict(), indent=2) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# fixtures


def fixture_nn_2d() -> ClassifierModel:
    """The 2-2-2 ReLU network ``a2(ReLU(a1(x)))`` with fixed weights."""
    return model_from_dict(
        {
            "kind": "mlp",
            "dimension": 2,
            "num_classes": 2,
            "weights": {
                "layers": [
                    {"matrix": [[-1.86, -2.09], [0.12, -0.46]], "bias": [3.71, -0.08]},
                    {"matrix": [[-3.05, 0.40], [4.02, -0.22]], "bias": [0.94, -0.58]},
                ]
            },
        },
        "nn2d",
    )


def fixture_qda_2d() -> ClassifierModel:
    """QDA with class 1 ~ N(0, I), class 2 ~ N(1, 2I), equal priors.

    Decision boundary: circle of radius 2*sqrt(ln 2 + 1) around (-1, -1).
    """
    log_half = math.log(0.5)
    return model_from_dict(
        {
            "kind": "qda",
            "dimension": 2,
            "num_classes": 2,
            "weights": {
                "classes": [
                    {"quadratic": [[-0.5, 0.0], [0.0, -0.5]], "linear": [0.0, 0.0], "constant": log_half},
                    {
                        "quadratic": [[-0.25, 0.0], [0.0, -0.25]],
                        "linear": [0.5, 0.5],
                        "constant": -0.5 - 0.5 * math.log(4.0) + log_half,
                    },
                ]
            },
        },
        "qda2d",
    )


QDA_CIRCLE_CENTER = (-1.0, -1.0)
QDA_CIRCLE_RADIUS = 2.0 * math.sqrt(math.log(2.0) + 1.0)


def qda_radius_closed_form(point) -> float:
    """Euclidean distance from ``point`` to the QDA fixture's decision circle."""
    u, v = (float(c) for c in point)
    return abs(QDA_CIRCLE_RADIUS - math.hypot(u + 1.0, v + 1.0))


def qda_linf_lower_bound(point) -> float:
    return qda_radius_closed_form(point) / math.sqrt(2.0)


def fixture_step_1d() -> ClassifierModel:
    """Label 1 on [0.2, 0.8], label 2 elsewhere, as a single depth-2 tree."""
    return model_from_dict(
        {
            "kind": "tree_ensemble",
            "dimension": 1,
            "num_classes": 2,
            "weights": {
                "trees": [
                    {
                        "nodes": [
                            {"feature": 0, "threshold": 0.8, "left": 1, "right": 2},
                            {"feature": 0, "threshold": 0.2, "left": 3, "right": 4},
                            {"leaf": 2},
                            {"leaf": 2},
                            {"leaf": 1},
                        ]
                    }
                ]
            },
        },
        "step1d",
    )


def fixture_linear_2d() -> ClassifierModel:
    """Stand-in linear model (not from any trained dataset): boundary 0.8 u + 0.6 v = 1.05."""
    return model_from_dict(
        {
            "kind": "linear",
            "dimension": 2,
            "num_classes": 2,
            "weights": {
                "classes": [
                    {"weights": [0.0, 0.0], "bias": 0.0},
                    {"weights": [0.8, 0.6], "bias": -1.05},
                ]
            },
        },
        "linear2d",
    )


def fixture_forest_2d() -> ClassifierModel:
    """Stand-in three-tree ensemble (not from any trained dataset)."""
    return model_from_dict(
        {
            "kind": "tree_ensemble",
            "dimension": 2,
            "num_classes": 2,
            "weights": {
                "trees": [
                    {"nodes": [{"feature": 0, "threshold": 0.75, "left": 1, "right": 2}, {"leaf": 1}, {"leaf": 2}]},
                    {"nodes": [{"feature": 1, "threshold": 0.85, "left": 1, "right": 2}, {"leaf": 1}, {"leaf": 2}]},
                    {
                        "nodes": [
                            {"feature": 0, "threshold": 0.3, "left": 1, "right": 2},
                            {"feature": 1, "threshold": 0.1, "left": 3, "right": 4},
                            {"leaf": 1},
                            {"leaf": 2},
                            {"leaf": 1},
                        ]
                    },
                ]
            },
        },
        "forest2d",
    )


FIXTURES = {
    "nn2d": fixture_nn_2d,
    "qda2d": fixture_qda_2d,
    "step1d": fixture_step_1d,
    "linear2d": fixture_linear_2d,
    "forest2d": fixture_forest_2d,
}


def constant_model(dimension: int, label: int = 1, num_classes: int = 2) -> ClassifierModel:
    """Linear model with zero weights whose bias always selects ``label``."""
    classes = [{"weights": [0.0] * dimension, "bias": 1.0 if c == label else 0.0} for c in range(1, num_classes + 1)]
    return model_from_dict(
        {"kind": "linear", "dimension": dimension, "num_classes": num_classes, "weights": {"classes": classes}},
        f"constant{dimension}d",
    )
