"""Random and calibrated system models for tests, benchmarks and demos."""

from __future__ import annotations

import numpy as np

from .models import SCALE, QuadraticModel1D, QuadraticModel2D, SystemModel, fit_system
from .netsim import DEFAULT_TRUTH, OPTIMIZED, VANILLA, GeneratorSpec, SimConfig, generate_grid

_SN, _SQ = SCALE["n"], SCALE["q"]
_DIV_2D = (1.0, _SN, _SQ, _SN * _SQ, _SN * _SN, _SQ * _SQ)


def _signed(rng: np.random.Generator, lo: float, hi: float, size: int) -> np.ndarray:
    """Magnitudes in ``[lo, hi]`` with random signs, so no coefficient is near 0."""
    return rng.uniform(lo, hi, size) * rng.choice([-1.0, 1.0], size)


def _model_1d(rng, variable: str, base: tuple[float, float]) -> QuadraticModel1D:
    s = SCALE[variable]
    c = np.concatenate([[rng.uniform(*base)], _signed(rng, 0.3, 3.0, 2)])
    return QuadraticModel1D(float(c[0]), float(c[1] / s), float(c[2] / (s * s)), variable=variable)


def _model_2d(rng, base: tuple[float, float], spread: tuple[float, float], unit="ms") -> QuadraticModel2D:
    c = np.concatenate([[rng.uniform(*base)], _signed(rng, *spread, 5)])
    return QuadraticModel2D(*(float(v / d) for v, d in zip(c, _DIV_2D)), unit=unit)


def random_system_model(rng: np.random.Generator, profile_name: str = "random") -> SystemModel:
    """A random model whose delays stay positive and whose precision stays
    inside ``[0.1, 0.9]`` on the whole decision domain.

    Coefficients are drawn in rescaled units (``n/608``, ``q/100``) and
    converted, so every term contributes at a comparable magnitude.
    """
    return SystemModel(
        t_enc=_model_1d(rng, "q", (8.0, 20.0)),
        t_dec=_model_2d(rng, (16.0, 30.0), (0.3, 3.0)),
        t_tx=_model_1d(rng, "q", (8.0, 20.0)),
        t_dl=_model_1d(rng, "n", (8.0, 20.0)),
        precision=_model_2d(rng, (0.4, 0.6), (0.01, 0.06), unit="dimensionless"),
        profile_name=profile_name,
    )


def calibrated_pair(
    seed: int = 42,
    truth: GeneratorSpec = DEFAULT_TRUTH,
    cfg: SimConfig | None = None,
) -> tuple[SystemModel, SystemModel]:
    """``(optimized, vanilla)`` models fitted to simulated campaigns.

    Both campaigns share the ground truth and seed; only the transmission
    profile differs.
    """
    cfg = cfg or SimConfig(rng_seed=seed)
    opt = fit_system(generate_grid(cfg, OPTIMIZED, truth))
    van = fit_system(generate_grid(cfg, VANILLA, truth))
    return opt, van


__all__ = ["calibrated_pair", "random_system_model"]
