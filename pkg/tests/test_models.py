import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from edgeperf.errors import ConfigError, DomainViolation, NonFinite, NonPositiveLatency, RankDeficient
from edgeperf.measurements import ingest
from edgeperf.models import (
    COMPONENTS,
    QuadraticModel1D,
    QuadraticModel2D,
    SystemModel,
    design_2d,
    dumps_model,
    eval_1d,
    eval_2d,
    evaluate_arrays,
    evaluate_total,
    fit_1d,
    fit_2d,
    fit_system,
    load_model,
    loads_model,
    save_model,
    synthesize_grid,
    synthesize_records,
)
from edgeperf.netsim import DEFAULT_TRUTH
from edgeperf.optimizer import DecisionDomain
from edgeperf.synthetic import calibrated_pair, random_system_model

sys.path.insert(0, str(Path(__file__).parent))
from oracles import poly1, poly2  # noqa: E402

N = list(range(128, 609, 32))
Q = list(range(10, 101))
ZERO1Q = QuadraticModel1D(0, 0, 0, "q")
ZERO2 = QuadraticModel2D(0, 0, 0, 0, 0, 0)


def const_model(enc=0.0, dec=0.0, tx=0.0, dl=0.0, prec=0.5):
    return SystemModel(
        t_enc=QuadraticModel1D(enc, 0, 0, "q"),
        t_dec=QuadraticModel2D(dec, 0, 0, 0, 0, 0),
        t_tx=QuadraticModel1D(tx, 0, 0, "q"),
        t_dl=QuadraticModel1D(dl, 0, 0, "n"),
        precision=QuadraticModel2D(prec, 0, 0, 0, 0, 0, unit="dimensionless"),
    )


# -- evaluation ---------------------------------------------------------------

def test_eval_examples():
    assert eval_1d(QuadraticModel1D(2, 0.1, 0.001), 0) == 2
    assert eval_1d(QuadraticModel1D(0, 0, 1, "n"), 608) == 369664
    assert eval_2d(QuadraticModel2D(3, 0, 0, 0, 0, 0), 123, 45) == 3
    assert eval_2d(QuadraticModel2D(0, 0, 0, 1, 0, 0), 2, 5) == 10


@given(st.lists(st.floats(-1e3, 1e3), min_size=6, max_size=6), st.integers(128, 608), st.integers(10, 100))
def test_eval_matches_horner_oracle(c, n, q):
    m1 = QuadraticModel1D(*c[:3])
    m2 = QuadraticModel2D(*c)
    assert eval_1d(m1, q) == pytest.approx(poly1(c, q), rel=1e-9, abs=1e-6)
    assert eval_2d(m2, n, q) == pytest.approx(poly2(c, n, q), rel=1e-9, abs=1e-3)


def test_evaluate_total_examples():
    e = evaluate_total(const_model(dl=33.333), 416, 50)
    assert e.fps == pytest.approx(30.0, rel=1e-4)
    e = evaluate_total(const_model(5, 10, 5, 20), 128, 10)
    assert e.t_total_ms == 40 and e.fps == 25
    with pytest.raises(DomainViolation):
        evaluate_total(const_model(dl=1), 127, 50)
    with pytest.raises(DomainViolation):
        evaluate_total(const_model(dl=1), 128, 101)
    with pytest.raises(NonPositiveLatency):
        evaluate_total(const_model(), 128, 10)


def test_precision_is_clamped():
    assert evaluate_total(const_model(dl=1, prec=1.7), 128, 10).precision == 1.0
    assert evaluate_total(const_model(dl=1, prec=-0.2), 128, 10).precision == 0.0


def test_synthetic_total_monotone_corners():
    opt, van = calibrated_pair()
    for sm in (opt, van):
        assert evaluate_total(sm, 608, 100).t_total_ms > evaluate_total(sm, 128, 10).t_total_ms


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1))
def test_linearity_and_fps_identity(seed):
    sm = random_system_model(np.random.default_rng(seed))
    doubled = sm.with_delays_scaled(2.0)
    for n, q in [(128, 10), (320, 55), (608, 100)]:
        a, b = evaluate_total(sm, n, q), evaluate_total(doubled, n, q)
        assert b.t_total_ms == pytest.approx(2 * a.t_total_ms, rel=1e-12)
        assert a.fps * a.t_total_ms == pytest.approx(1000.0, rel=1e-15)


def test_array_path_bit_identical_to_scalar():
    sm = random_system_model(np.random.default_rng(9))
    n, q = DecisionDomain().flat()
    total, prec = evaluate_arrays(sm, n, q)
    for i in range(0, len(n), 37):
        e = evaluate_total(sm, int(n[i]), int(q[i]))
        assert e.t_total_ms == total[i] and e.precision == prec[i]


# -- fitting ------------------------------------------------------------------

def test_fit_1d_examples():
    xs = range(10, 101, 10)
    m = fit_1d([(x, 2 + 0.1 * x + 0.001 * x * x) for x in xs])
    assert m.coefficients == pytest.approx((2, 0.1, 0.001), abs=1e-6)
    assert m.residual_rms < 1e-12
    m = fit_1d([(1, 5), (2, 5), (3, 5)])
    assert m.coefficients == pytest.approx((5, 0, 0), abs=1e-12)
    with pytest.raises(RankDeficient):
        fit_1d([(1, 1), (2, 2)])
    with pytest.raises(RankDeficient):
        fit_1d([(1, 1), (1, 2), (2, 2), (2, 3)])
    with pytest.raises(NonFinite):
        fit_1d([(1, 1), (2, float("inf")), (3, 2)])


def test_fit_2d_examples():
    c = (1, 0.01, 0.02, 1e-5, 1e-6, 1e-4)
    pts = [((n, q), poly2(c, n, q)) for n in N for q in Q]
    m = fit_2d(pts)
    for a, b in zip(m.coefficients, c):
        assert a == pytest.approx(b, rel=1e-6)
    m = fit_2d([((n, q), 3.0) for n in N for q in Q])
    assert m.coefficients == pytest.approx((3, 0, 0, 0, 0, 0), abs=1e-9)
    with pytest.raises(RankDeficient):
        fit_2d([((416, q), float(q)) for q in Q])
    with pytest.raises(RankDeficient):
        fit_2d([((128, 10), 1.0)] * 5)
    with pytest.raises(NonFinite):
        fit_2d([((n, q), float("nan")) for n in N[:3] for q in Q[:3]])


@settings(max_examples=40)
@given(st.lists(st.floats(-1e3, 1e3).filter(lambda v: abs(v) > 1e-3), min_size=6, max_size=6))
def test_fit_2d_recovers_scaled_coefficients(c_scaled):
    # coefficients of magnitude <= 1e3 in rescaled units; compare in those units
    div = (1, 608, 100, 608 * 100, 608**2, 100**2)
    c = [v / d for v, d in zip(c_scaled, div)]
    pts = [((n, q), eval_2d(QuadraticModel2D(*c), n, q)) for n in N[::3] for q in Q[::5]]
    m = fit_2d(pts)
    for got, want, d in zip(m.coefficients, c, div):
        assert got * d == pytest.approx(want * d, rel=1e-6, abs=1e-6)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_residual_orthogonality(seed):
    rng = np.random.default_rng(seed)
    n = rng.choice(N, 60).astype(float)
    q = rng.choice(Q, 60).astype(float)
    y = rng.normal(0, 5, 60) + 0.01 * n
    m = fit_2d(list(zip(zip(n, q), y)))
    A = design_2d(n / 608, q / 100)
    resid = y - eval_2d(m, n, q)
    for j in range(6):
        assert abs(A[:, j] @ resid) <= 1e-8 * np.linalg.norm(A[:, j]) * np.linalg.norm(resid)


def test_fit_system_exact_on_generated_grid():
    sm = random_system_model(np.random.default_rng(4))
    fitted = fit_system(synthesize_grid(sm, N, Q))
    for comp in COMPONENTS:
        for a, b in zip(getattr(sm, comp).coefficients, getattr(fitted, comp).coefficients):
            assert b == pytest.approx(a, rel=1e-6)
    assert fitted.profile_name == sm.profile_name


def test_fit_system_single_n_names_t_dl():
    sm = random_system_model(np.random.default_rng(1))
    grid = synthesize_grid(sm, [416], Q)
    with pytest.raises(RankDeficient) as info:
        fit_system(grid)
    assert info.value.component == "t_dl" and "t_dl" in str(info.value)


def test_fit_system_few_q_names_component():
    sm = random_system_model(np.random.default_rng(1))
    with pytest.raises(RankDeficient) as info:
        fit_system(synthesize_grid(sm, N, [10, 20]))
    assert info.value.component == "t_enc"


def test_fitted_encoder_range_matches_reference_trend():
    opt, _ = calibrated_pair()
    lo, hi = eval_1d(opt.t_enc, 25), eval_1d(opt.t_enc, 100)
    assert lo == pytest.approx(5.0, abs=0.2) and hi == pytest.approx(11.0, abs=0.2)


def test_precision_non_decreasing_in_q_on_truth():
    p = DEFAULT_TRUTH.precision
    assert p.c2 >= 0 and p.c3 >= 0 and p.c5 >= 0
    opt, _ = calibrated_pair()
    for n in N:
        vals = [eval_2d(opt.precision, n, q) for q in Q]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_synthesize_noise_is_seeded():
    sm = random_system_model(np.random.default_rng(2))
    a = synthesize_records(sm, N[:2], Q[:3], noise_ms=0.1, seed=5)
    b = synthesize_records(sm, N[:2], Q[:3], noise_ms=0.1, seed=5)
    c = synthesize_records(sm, N[:2], Q[:3], noise_ms=0.1, seed=6)
    assert a == b and a != c


# -- serialization ------------------------------------------------------------

@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1))
def test_model_round_trip_exact(seed):
    sm = random_system_model(np.random.default_rng(seed))
    sm = replace(sm, t_tx=replace(sm.t_tx, residual_rms=0.1 + 1e-17 * seed))
    assert loads_model(dumps_model(sm, ["header"])) == sm


def test_model_file_io_and_errors(tmp_path):
    sm = random_system_model(np.random.default_rng(0))
    path = tmp_path / "m.txt"
    save_model(path, sm)
    assert load_model(path) == sm
    text = dumps_model(sm)
    with pytest.raises(ConfigError) as info:
        loads_model(text + "bogus.key = 1\n", path="m.txt")
    assert "bogus.key" in str(info.value) and "m.txt:" in str(info.value)
    with pytest.raises(ConfigError, match="missing key 't_dl.c2'"):
        loads_model("\n".join(l for l in text.splitlines() if not l.startswith("t_dl.c2")))
    with pytest.raises(ConfigError, match=r":\d+: t_enc.c0: not a number"):
        loads_model(text.replace(f"t_enc.c0 = {sm.t_enc.c0!r}", "t_enc.c0 = abc"), path="x")
    with pytest.raises(ConfigError, match="file not found"):
        load_model(tmp_path / "missing.txt")


def test_system_model_invariants():
    with pytest.raises(ValueError):
        SystemModel(ZERO1Q, ZERO2, ZERO1Q, QuadraticModel1D(0, 0, 0, "q"), ZERO2)
    with pytest.raises(ValueError):
        SystemModel(ZERO1Q, ZERO2, ZERO1Q, QuadraticModel1D(0, 0, 0, "n"), ZERO2, profile_name="")
    with pytest.raises(NonFinite):
        QuadraticModel1D(float("inf"), 0, 0)
    with pytest.raises(ValueError):
        QuadraticModel1D(0, 0, 0, variable="x")


def test_fit_report_lists_every_component():
    grid = ingest(synthesize_records(random_system_model(np.random.default_rng(3)), N, Q[::9],
                                     noise_ms=0.1, seed=1))
    report = fit_system(grid).fit_report
    assert set(report) == set(COMPONENTS)
    assert all(0 < v < 0.3 for k, v in report.items() if k != "precision")
