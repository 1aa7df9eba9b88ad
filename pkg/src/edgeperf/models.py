"""Quadratic latency/precision response surfaces.

Encoding and wireless delay depend on the encoding rate only, inference
delay on the NN size only; decoding delay and precision are full
quadratics in both variables with basis ``(1, n, q, n*q, n**2, q**2)``.

Fits use a QR factorisation of a rescaled design matrix (``n/608``,
``q/100``); coefficients are always reported in the original units.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.linalg import solve_triangular

from . import _kv
from .errors import ConfigError, NonFinite, NonPositiveLatency, RankDeficient
from .measurements import (
    MeasurementGrid,
    MeasurementRecord,
    check_encoding_rate,
    check_nn_size,
    ingest,
)

#: internal rescaling used before solving
SCALE = {"n": 608.0, "q": 100.0}
_RANK_TOL = 1e-10

COMPONENTS = ("t_enc", "t_dec", "t_tx", "t_dl", "precision")


@dataclass(frozen=True)
class QuadraticModel1D:
    c0: float
    c1: float
    c2: float
    variable: str = "q"
    unit: str = "ms"
    residual_rms: float = 0.0

    def __post_init__(self):
        if self.variable not in SCALE:
            raise ValueError(f"variable must be 'n' or 'q', got {self.variable!r}")
        if not all(math.isfinite(c) for c in self.coefficients):
            raise NonFinite(f"non-finite coefficient in {self.coefficients}")

    @property
    def coefficients(self) -> tuple[float, float, float]:
        return (self.c0, self.c1, self.c2)

    def scaled(self, factor: float) -> QuadraticModel1D:
        return replace(self, c0=self.c0 * factor, c1=self.c1 * factor, c2=self.c2 * factor)


@dataclass(frozen=True)
class QuadraticModel2D:
    """Coefficients ordered as ``(1, n, q, n*q, n**2, q**2)``."""

    c0: float
    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    unit: str = "ms"
    residual_rms: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(c) for c in self.coefficients):
            raise NonFinite(f"non-finite coefficient in {self.coefficients}")

    @property
    def coefficients(self) -> tuple[float, ...]:
        return (self.c0, self.c1, self.c2, self.c3, self.c4, self.c5)

    def scaled(self, factor: float) -> QuadraticModel2D:
        c = [x * factor for x in self.coefficients]
        return replace(self, c0=c[0], c1=c[1], c2=c[2], c3=c[3], c4=c[4], c5=c[5])


@dataclass(frozen=True)
class SystemModel:
    t_enc: QuadraticModel1D
    t_dec: QuadraticModel2D
    t_tx: QuadraticModel1D
    t_dl: QuadraticModel1D
    precision: QuadraticModel2D
    profile_name: str = "model"
    notes: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.profile_name:
            raise ValueError("profile_name must be non-empty")
        for name in ("t_enc", "t_tx"):
            if getattr(self, name).variable != "q":
                raise ValueError(f"{name} must be a model over q")
        if self.t_dl.variable != "n":
            raise ValueError("t_dl must be a model over n")
        for name in ("t_enc", "t_dec", "t_tx", "t_dl"):
            if getattr(self, name).unit != "ms":
                raise ValueError(f"{name} must be in milliseconds")

    @property
    def fit_report(self) -> dict[str, float]:
        return {name: getattr(self, name).residual_rms for name in COMPONENTS}

    def with_delays_scaled(self, factor: float) -> SystemModel:
        return replace(
            self,
            t_enc=self.t_enc.scaled(factor),
            t_dec=self.t_dec.scaled(factor),
            t_tx=self.t_tx.scaled(factor),
            t_dl=self.t_dl.scaled(factor),
        )


@dataclass(frozen=True)
class TotalEstimate:
    t_total_ms: float
    fps: float
    precision: float
    t_enc_ms: float = 0.0
    t_dec_ms: float = 0.0
    t_tx_ms: float = 0.0
    t_dl_ms: float = 0.0


# -- evaluation --------------------------------------------------------------

def eval_1d(m: QuadraticModel1D, x):
    """``c0 + c1*x + c2*x**2``; ``x`` may be a scalar or a numpy array."""
    return m.c0 + m.c1 * x + m.c2 * x * x


def eval_2d(m: QuadraticModel2D, n, q):
    return m.c0 + m.c1 * n + m.c2 * q + m.c3 * n * q + m.c4 * n * n + m.c5 * q * q


def clamp01(x: float) -> float:
    return min(max(x, 0.0), 1.0)


def evaluate_total(sm: SystemModel, n: int, q: int) -> TotalEstimate:
    check_nn_size(n)
    check_encoding_rate(q)
    t_enc = eval_1d(sm.t_enc, q)
    t_dec = eval_2d(sm.t_dec, n, q)
    t_tx = eval_1d(sm.t_tx, q)
    t_dl = eval_1d(sm.t_dl, n)
    total = t_enc + t_dec + t_tx + t_dl
    if not total > 0:
        raise NonPositiveLatency(f"fitted total latency {total!r} ms at (n={n}, q={q}) is not positive")
    return TotalEstimate(
        t_total_ms=total,
        fps=1000.0 / total,
        precision=clamp01(eval_2d(sm.precision, n, q)),
        t_enc_ms=t_enc,
        t_dec_ms=t_dec,
        t_tx_ms=t_tx,
        t_dl_ms=t_dl,
    )


def evaluate_arrays(sm: SystemModel, n: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised total latency and clamped precision.

    Uses the same operation order as :func:`evaluate_total`, so each element
    is bit-identical to the scalar path.
    """
    n = np.asarray(n, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    total = eval_1d(sm.t_enc, q) + eval_2d(sm.t_dec, n, q) + eval_1d(sm.t_tx, q) + eval_1d(sm.t_dl, n)
    if not np.all(total > 0):
        i = int(np.flatnonzero(~(total > 0))[0])
        raise NonPositiveLatency(
            f"fitted total latency {total[i]!r} ms at (n={int(n[i])}, q={int(q[i])}) is not positive"
        )
    precision = np.clip(eval_2d(sm.precision, n, q), 0.0, 1.0)
    return total, precision


# -- fitting -----------------------------------------------------------------

def _qr_solve(A: np.ndarray, y: np.ndarray, what: str) -> tuple[np.ndarray, float]:
    Q, R = np.linalg.qr(A, mode="reduced")
    diag = np.abs(np.diag(R))
    if diag.size < A.shape[1] or diag.min() <= _RANK_TOL * diag.max():
        raise RankDeficient(f"design matrix for {what} is rank deficient")
    coef = solve_triangular(R, Q.T @ y)
    resid = y - A @ coef
    return coef, float(np.sqrt(np.mean(resid * resid)))


def _xy(points, what: str) -> tuple[np.ndarray, np.ndarray]:
    pts = list(points)
    if not pts:
        raise RankDeficient(f"no points to fit {what}")
    x = np.array([p[0] for p in pts], dtype=np.float64)
    y = np.array([p[1] for p in pts], dtype=np.float64)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise NonFinite(f"non-finite input while fitting {what}")
    return x, y


def fit_1d(points: Iterable[tuple[float, float]], variable: str = "q", unit: str = "ms") -> QuadraticModel1D:
    """Ordinary least squares for ``y = c0 + c1*x + c2*x**2``."""
    x, y = _xy(points, f"1-D model over {variable}")
    if len(np.unique(x)) < 3:
        raise RankDeficient(f"need at least 3 distinct {variable} values, got {len(np.unique(x))}")
    s = SCALE[variable]
    u = x / s
    A = np.column_stack([np.ones_like(u), u, u * u])
    coef, rms = _qr_solve(A, y, f"1-D model over {variable}")
    c = coef / np.array([1.0, s, s * s])
    return QuadraticModel1D(float(c[0]), float(c[1]), float(c[2]), variable=variable, unit=unit, residual_rms=rms)


def design_2d(n: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Raw-unit basis columns ``(1, n, q, n*q, n**2, q**2)``."""
    return np.column_stack([np.ones_like(n), n, q, n * q, n * n, q * q])


def fit_2d(points: Iterable[tuple[tuple[float, float], float]], unit: str = "ms") -> QuadraticModel2D:
    pts = list(points)
    if len(pts) < 6:
        raise RankDeficient(f"need at least 6 points for a 2-D quadratic, got {len(pts)}")
    nq = np.array([p[0] for p in pts], dtype=np.float64).reshape(-1, 2)
    y = np.array([p[1] for p in pts], dtype=np.float64)
    if not (np.all(np.isfinite(nq)) and np.all(np.isfinite(y))):
        raise NonFinite("non-finite input while fitting 2-D model")
    sn, sq = SCALE["n"], SCALE["q"]
    A = design_2d(nq[:, 0] / sn, nq[:, 1] / sq)
    coef, rms = _qr_solve(A, y, "2-D model")
    c = coef / np.array([1.0, sn, sq, sn * sq, sn * sn, sq * sq])
    return QuadraticModel2D(*(float(v) for v in c), unit=unit, residual_rms=rms)


def _marginal(grid: MeasurementGrid, target: str, axis: str) -> list[tuple[float, float]]:
    """Unweighted mean of cell means along the other axis, per value of ``axis``."""
    groups: dict[int, list[float]] = {}
    for (n, q), cell in grid.cells.items():
        groups.setdefault(n if axis == "n" else q, []).append(getattr(cell, target))
    return [(float(k), math.fsum(v) / len(v)) for k, v in sorted(groups.items())]


def fit_system(grid: MeasurementGrid, profile_name: str | None = None) -> SystemModel:
    """Fit every component of a :class:`SystemModel` to a measurement grid.

    The fit uses per-cell means. Single-variable components are fitted to
    marginal means: ``t_enc`` and ``t_tx`` against q (averaged over n),
    ``t_dl`` against n (averaged over q).
    """
    def guarded(component, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except RankDeficient as exc:
            raise RankDeficient(str(exc), component=component) from None
        except NonFinite as exc:
            raise NonFinite(f"{component}: {exc}") from None

    t_enc = guarded("t_enc", fit_1d, _marginal(grid, "t_enc_ms", "q"), "q")
    t_tx = guarded("t_tx", fit_1d, _marginal(grid, "t_tx_ms", "q"), "q")
    t_dl = guarded("t_dl", fit_1d, _marginal(grid, "t_dl_ms", "n"), "n")
    keys = grid.keys()
    t_dec = guarded("t_dec", fit_2d, [(k, grid.cells[k].t_dec_ms) for k in keys])
    precision = guarded(
        "precision", fit_2d, [(k, grid.cells[k].precision) for k in keys], unit="dimensionless"
    )
    return SystemModel(
        t_enc=t_enc,
        t_dec=t_dec,
        t_tx=t_tx,
        t_dl=t_dl,
        precision=precision,
        profile_name=profile_name or grid.profile_name or "model",
    )


def synthesize_records(
    sm: SystemModel,
    n_values: Sequence[int],
    q_values: Sequence[int],
    *,
    samples_per_cell: int = 1,
    noise_ms: float = 0.0,
    precision_noise: float = 0.0,
    seed: int = 0,
) -> list[MeasurementRecord]:
    """Sample records straight from a model, with optional Gaussian noise.

    Noise is additive, independent per sample and drawn in ``(n, q, sample)``
    order from a seeded PCG64 stream. Negative delays are not clipped; the
    caller picks models that stay well above zero.
    """
    rng = np.random.default_rng(seed)
    out = []
    for n in sorted(n_values):
        for q in sorted(q_values):
            base = (
                eval_1d(sm.t_enc, q),
                eval_2d(sm.t_dec, n, q),
                eval_1d(sm.t_tx, q),
                eval_1d(sm.t_dl, n),
            )
            p = eval_2d(sm.precision, n, q)
            for _ in range(samples_per_cell):
                d = base
                if noise_ms:
                    d = tuple(v + noise_ms * rng.standard_normal() for v in base)
                pr = p + precision_noise * rng.standard_normal() if precision_noise else p
                out.append(
                    MeasurementRecord(
                        nn_size=n,
                        encoding_rate=q,
                        t_enc_ms=float(d[0]),
                        t_dec_ms=float(d[1]),
                        t_tx_ms=float(d[2]),
                        t_dl_ms=float(d[3]),
                        precision=clamp01(float(pr)),
                        image_bytes=0,
                        profile_name=sm.profile_name,
                    )
                )
    return out


def synthesize_grid(sm: SystemModel, n_values, q_values, **kw) -> MeasurementGrid:
    return ingest(synthesize_records(sm, n_values, q_values, **kw))


# -- serialization -----------------------------------------------------------

def model_items(sm: SystemModel) -> list[tuple[str, object]]:
    items: list[tuple[str, object]] = [("profile_name", sm.profile_name)]
    for name in COMPONENTS:
        m = getattr(sm, name)
        if isinstance(m, QuadraticModel1D):
            items.append((f"{name}.variable", m.variable))
        items.append((f"{name}.unit", m.unit))
        for i, c in enumerate(m.coefficients):
            items.append((f"{name}.c{i}", float(c)))
        items.append((f"{name}.residual_rms", float(m.residual_rms)))
    return items


def dumps_model(sm: SystemModel, header: Sequence[str] = ()) -> str:
    return _kv.format_kv(model_items(sm), list(header))


def loads_model(text: str, *, path: str | None = None) -> SystemModel:
    kv = _kv.parse_kv(text, path=path)

    def take(key):
        try:
            return kv.pop(key)
        except KeyError:
            raise ConfigError(f"missing key {key!r}", path=path) from None

    def num(key):
        value, line = take(key)
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{key}: not a number: {value!r}", path=path, line=line) from None

    profile = take("profile_name")[0]
    parts = {}
    for name in COMPONENTS:
        if name in ("t_enc", "t_tx", "t_dl"):
            var = take(f"{name}.variable")[0]
            unit = take(f"{name}.unit")[0]
            parts[name] = QuadraticModel1D(
                *(num(f"{name}.c{i}") for i in range(3)),
                variable=var, unit=unit, residual_rms=num(f"{name}.residual_rms"),
            )
        else:
            unit = take(f"{name}.unit")[0]
            parts[name] = QuadraticModel2D(
                *(num(f"{name}.c{i}") for i in range(6)),
                unit=unit, residual_rms=num(f"{name}.residual_rms"),
            )
    if kv:
        key, (_, line) = next(iter(kv.items()))
        raise ConfigError(f"unknown key {key!r}", path=path, line=line)
    return SystemModel(profile_name=profile, **parts)


def save_model(path: str | Path, sm: SystemModel, header: Sequence[str] = ()) -> None:
    Path(path).write_text(dumps_model(sm, header), encoding="utf-8")


def load_model(path: str | Path) -> SystemModel:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError("file not found", path=str(p)) from None
    return loads_model(text, path=str(p))
