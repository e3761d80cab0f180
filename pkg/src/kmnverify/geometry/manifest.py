"""Manifest schema and the immutable runtime manifold description."""

import hashlib
import itertools
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from ..config import settings
from ..expr import Expr, ExprError, ExprSyntaxError, parse

logger = logging.getLogger(__name__)


class ManifestError(Exception):
    """Invalid manifest: schema violation, parse error or failed validation."""

    def __init__(self, message: str, position: Optional[str] = None):
        super().__init__(f"{message} [{position}]" if position else message)
        self.message = message
        self.position = position


class PreconditionError(Exception):
    """Inputs violate an operation precondition (inadmissible vector, bad factor)."""


class EvaluationError(Exception):
    """A component expression failed at a specific point."""

    def __init__(self, message: str, point: Sequence[float]):
        coords = ", ".join(f"{x:.6g}" for x in point)
        super().__init__(f"{message} at point ({coords})")
        self.point = tuple(float(x) for x in point)


class Backend(str, Enum):
    CHART = "chart"
    FRAME = "frame"


def _stringify(value: Any) -> Any:
    if isinstance(value, list):
        return [_stringify(v) for v in value]
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return repr(value)
    return value


class SampleDomain(BaseModel):
    lower: List[float]
    upper: List[float]
    resolution: int = Field(default_factory=lambda: settings.default_grid, ge=1)

    @model_validator(mode="after")
    def _check_box(self) -> "SampleDomain":
        if len(self.lower) != len(self.upper):
            raise ValueError("domain bounds have different lengths")
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("domain lower bound exceeds upper bound")
        return self


class BracketEntry(BaseModel):
    """One structure function c^k_ij (1-based, i < j); c^k_ji = -c^k_ij is implied."""

    k: int
    i: int
    j: int
    value: str

    _coerce = field_validator("value", mode="before")(_stringify)


class ExpectedProperties(BaseModel):
    contact: Optional[bool] = None
    k_contact: Optional[bool] = None
    sasakian: Optional[bool] = None
    kappa: Optional[float] = None
    mu: Optional[float] = None
    nu: Optional[float] = None
    lam: Optional[float] = None
    phi_sectional: Optional[float] = None
    scalar_curvature: Optional[float] = None
    flat: Optional[bool] = None
    provenance: str = ""


class Manifest(BaseModel):
    name: str
    description: str = ""
    dimension: int
    backend: Backend = Backend.CHART
    coordinates: List[str]
    constants: Dict[str, float] = Field(default_factory=dict)
    metric: Optional[List[List[str]]] = None
    frame_metric: Optional[List[List[str]]] = None
    phi: List[List[str]]
    xi: List[str]
    brackets: List[BracketEntry] = Field(default_factory=list)
    frame_vectors: Optional[List[List[str]]] = None
    domain: SampleDomain
    fd_step: Optional[float] = Field(default=None, gt=0)
    expected: Optional[ExpectedProperties] = None

    _coerce = field_validator(
        "metric", "frame_metric", "phi", "xi", "frame_vectors", mode="before"
    )(_stringify)

    @model_validator(mode="after")
    def _check_shapes(self) -> "Manifest":
        n = self.dimension
        if n < 3 or n % 2 == 0:
            raise ValueError(f"dimension must be odd and at least 3, got {n}")
        if len(self.coordinates) != n or len(set(self.coordinates)) != n:
            raise ValueError("coordinates must be distinct and match the dimension")
        if len(self.domain.lower) != n:
            raise ValueError("domain bounds must match the dimension")
        if self.backend == Backend.CHART:
            if self.metric is None:
                raise ValueError("chart backend requires 'metric'")
            if self.brackets or self.frame_metric is not None or self.frame_vectors is not None:
                raise ValueError("chart backend takes no brackets, frame_metric or frame_vectors")
        elif self.metric is not None:
            raise ValueError("frame backend uses 'frame_metric', not 'metric'")
        for label in ("metric", "frame_metric", "phi", "frame_vectors"):
            matrix = getattr(self, label)
            if matrix is not None and (len(matrix) != n or any(len(row) != n for row in matrix)):
                raise ValueError(f"'{label}' must be a {n}x{n} matrix")
        if len(self.xi) != n:
            raise ValueError(f"'xi' must have {n} components")
        seen = set()
        for entry in self.brackets:
            if not (1 <= entry.k <= n and 1 <= entry.i <= n and 1 <= entry.j <= n):
                raise ValueError(f"bracket index out of range: {entry.k},{entry.i},{entry.j}")
            if entry.i >= entry.j:
                raise ValueError("brackets are declared with i < j; c^k_ji is implied")
            if (entry.k, entry.i, entry.j) in seen:
                raise ValueError(f"duplicate bracket entry {entry.k},{entry.i},{entry.j}")
            seen.add((entry.k, entry.i, entry.j))
        return self


ExprMatrix = Tuple[Tuple[Expr, ...], ...]


@dataclass(frozen=True)
class ManifoldSpec:
    """Parsed, validated manifold. Immutable; all evaluation is pure."""

    name: str
    dimension: int
    backend: Backend
    coordinates: Tuple[str, ...]
    constants: Mapping[str, float]
    metric: ExprMatrix
    phi: ExprMatrix
    xi: Tuple[Expr, ...]
    brackets: Mapping[Tuple[int, int, int], Expr]
    frame_vectors: Optional[ExprMatrix]
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    resolution: int
    fd_step: Optional[float] = None
    description: str = ""
    expected: Optional[ExpectedProperties] = None
    content_hash: str = ""
    source_path: Optional[str] = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return (self.dimension - 1) // 2

    @property
    def is_frame(self) -> bool:
        return self.backend == Backend.FRAME

    @property
    def constant_frame(self) -> bool:
        """Frame backend whose structure functions do not vary: all frame derivatives vanish."""
        return self.is_frame and not any(
            e.depends_on_coordinates() for e in self.brackets.values()
        )

    def _eval(self, e: Expr, p: Sequence[float]) -> float:
        try:
            return e.evaluate(p, self.constants)
        except ExprError as exc:
            raise EvaluationError(f"Failed to evaluate '{e.to_source()}': {exc}", p) from exc

    def _matrix(self, m: ExprMatrix, p: Sequence[float]) -> np.ndarray:
        return np.array([[self._eval(e, p) for e in row] for row in m], dtype=float)

    def metric_at(self, p: Sequence[float]) -> np.ndarray:
        return self._matrix(self.metric, p)

    def phi_at(self, p: Sequence[float]) -> np.ndarray:
        return self._matrix(self.phi, p)

    def xi_at(self, p: Sequence[float]) -> np.ndarray:
        return np.array([self._eval(e, p) for e in self.xi], dtype=float)

    def eta_at(self, p: Sequence[float]) -> np.ndarray:
        return self.metric_at(p) @ self.xi_at(p)

    def brackets_at(self, p: Sequence[float]) -> np.ndarray:
        """Structure functions c[k, i, j] with [E_i, E_j] = sum_k c[k, i, j] E_k."""
        c = np.zeros((self.dimension,) * 3)
        for (k, i, j), e in self.brackets.items():
            value = self._eval(e, p)
            c[k, i, j] = value
            c[k, j, i] = -value
        return c

    def frame_at(self, p: Sequence[float]) -> np.ndarray:
        """Matrix whose column i holds the coordinate components of E_i."""
        if self.frame_vectors is None:
            return np.eye(self.dimension)
        return self._matrix(self.frame_vectors, p).T

    def contains(self, p: Sequence[float]) -> bool:
        return all(lo <= x <= hi for x, lo, hi in zip(p, self.lower, self.upper))

    def sample_points(self, resolution: Optional[int] = None) -> List[np.ndarray]:
        r = resolution or self.resolution
        axes = [
            np.linspace(lo, hi, r) if r > 1 else np.array([(lo + hi) / 2])
            for lo, hi in zip(self.lower, self.upper)
        ]
        return [np.array(p, dtype=float) for p in itertools.product(*axes)]

    def center(self) -> np.ndarray:
        return (np.array(self.lower) + np.array(self.upper)) / 2

    def to_manifest(self) -> Manifest:
        def rows(m: ExprMatrix) -> List[List[str]]:
            return [[e.to_source() for e in row] for row in m]

        brackets = [
            BracketEntry(k=k + 1, i=i + 1, j=j + 1, value=e.to_source())
            for (k, i, j), e in sorted(self.brackets.items())
        ]
        return Manifest(
            name=self.name,
            description=self.description,
            dimension=self.dimension,
            backend=self.backend,
            coordinates=list(self.coordinates),
            constants=dict(self.constants),
            metric=None if self.is_frame else rows(self.metric),
            frame_metric=rows(self.metric) if self.is_frame else None,
            phi=rows(self.phi),
            xi=[e.to_source() for e in self.xi],
            brackets=brackets,
            frame_vectors=rows(self.frame_vectors) if self.frame_vectors else None,
            domain=SampleDomain(
                lower=list(self.lower), upper=list(self.upper), resolution=self.resolution
            ),
            fd_step=self.fd_step,
            expected=self.expected,
        )

    def to_json(self) -> str:
        return self.to_manifest().model_dump_json(indent=2, exclude_none=True)


def _parse_matrix(
    rows: List[List[str]], label: str, chart: Sequence[str], constants: Sequence[str]
) -> ExprMatrix:
    return tuple(
        tuple(_parse_field(text, f"{label}[{i}][{j}]", chart, constants) for j, text in enumerate(row))
        for i, row in enumerate(rows)
    )


def _parse_field(text: str, position: str, chart: Sequence[str], constants: Sequence[str]) -> Expr:
    try:
        return parse(text, chart, constants)
    except ExprSyntaxError as e:
        raise ManifestError(
            f"Failed to parse '{text}': {e.message} at byte offset {e.offset}", position
        ) from e


def build_spec(manifest: Manifest, content_hash: str = "", source_path: Optional[str] = None) -> ManifoldSpec:
    """Parse every component expression and validate the structure at load."""
    chart = manifest.coordinates
    names = list(manifest.constants)
    n = manifest.dimension
    frame = manifest.backend == Backend.FRAME
    if frame:
        metric_rows = manifest.frame_metric or [
            ["1" if i == j else "0" for j in range(n)] for i in range(n)
        ]
    else:
        metric_rows = manifest.metric or []
    metric = _parse_matrix(metric_rows, "frame_metric" if frame else "metric", chart, names)
    phi = _parse_matrix(manifest.phi, "phi", chart, names)
    xi = tuple(_parse_field(t, f"xi[{i}]", chart, names) for i, t in enumerate(manifest.xi))
    brackets = {
        (b.k - 1, b.i - 1, b.j - 1): _parse_field(
            b.value, f"brackets[{b.k},{b.i},{b.j}]", chart, names
        )
        for b in manifest.brackets
    }
    frame_vectors = (
        _parse_matrix(manifest.frame_vectors, "frame_vectors", chart, names)
        if manifest.frame_vectors is not None
        else None
    )
    if frame:
        fixed = [e for row in metric + phi for e in row] + list(xi)
        if any(e.depends_on_coordinates() for e in fixed):
            raise ManifestError("frame backend requires constant frame_metric, phi and xi")
        varying = any(e.depends_on_coordinates() for e in brackets.values())
        if varying and frame_vectors is None:
            raise ManifestError("non-constant structure functions require 'frame_vectors'")

    spec = ManifoldSpec(
        name=manifest.name,
        dimension=n,
        backend=manifest.backend,
        coordinates=tuple(chart),
        constants=dict(manifest.constants),
        metric=metric,
        phi=phi,
        xi=xi,
        brackets=brackets,
        frame_vectors=frame_vectors,
        lower=tuple(manifest.domain.lower),
        upper=tuple(manifest.domain.upper),
        resolution=manifest.domain.resolution,
        fd_step=manifest.fd_step,
        description=manifest.description,
        expected=manifest.expected,
        content_hash=content_hash,
        source_path=source_path,
    )
    validate_metric(spec)
    return spec


def validate_metric(spec: ManifoldSpec, points: Optional[List[np.ndarray]] = None) -> None:
    """Symmetric and positive definite at every sampled point (eigenvalue test)."""
    for p in points if points is not None else spec.sample_points():
        try:
            g = spec.metric_at(p)
        except EvaluationError as e:
            raise ManifestError(f"Failed to evaluate the metric: {e}") from e
        asym = np.abs(g - g.T)
        if asym.max() > 1e-12 * max(1.0, np.abs(g).max()):
            i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
            raise ManifestError("metric is not symmetric", f"g[{i}][{j}]")
        if np.linalg.eigvalsh(g).min() <= 0:
            raise ManifestError(f"metric is not positive definite at {list(p)}")


def content_hash(text: Union[str, bytes]) -> str:
    data = text.encode("utf-8") if isinstance(text, str) else text
    return hashlib.sha256(data).hexdigest()


def parse_manifest(data: Union[str, bytes, Mapping[str, Any]], source_path: Optional[str] = None) -> ManifoldSpec:
    """Validate manifest JSON (text or decoded mapping) and build the ManifoldSpec."""
    if isinstance(data, (str, bytes)):
        try:
            text = data if isinstance(data, str) else data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ManifestError(f"Failed to decode manifest as UTF-8: {e.reason}", f"byte offset {e.start}") from e
    else:
        text = json.dumps(data, sort_keys=True)
    try:
        manifest = Manifest.model_validate_json(text)
    except ValidationError as e:
        first = e.errors()[0]
        position = ".".join(str(part) for part in first.get("loc", ())) or None
        raise ManifestError(f"Failed to validate manifest: {first.get('msg')}", position) from e
    return build_spec(manifest, content_hash(text), source_path)


def load_manifest(path: Union[str, Path]) -> ManifoldSpec:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ManifestError(f"Failed to read manifest: {e}", str(path)) from e
    spec = parse_manifest(raw, str(path))
    logger.info(f"Loaded manifest '{spec.name}' ({spec.backend.value}, dim {spec.dimension}) from {path}")
    return spec
