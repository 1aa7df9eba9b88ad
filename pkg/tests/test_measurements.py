import random

import pytest
from hypothesis import given, settings, strategies as st

from edgeperf.errors import DomainViolation, EmptyGrid, MixedProfiles, SchemaError
from edgeperf.measurements import (
    CSV_COLUMNS,
    MeasurementRecord,
    dumps_records,
    grid_records,
    ingest,
    loads_records,
    to_design_matrix,
)


def rec(n=416, q=50, t_tx=5.0, profile="p", **kw):
    base = dict(nn_size=n, encoding_rate=q, t_enc_ms=5.0, t_dec_ms=2.0, t_tx_ms=t_tx,
                t_dl_ms=20.0, precision=0.5, image_bytes=30000, profile_name=profile)
    base.update(kw)
    return MeasurementRecord(**base)


def test_mean_of_two_records():
    grid = ingest([rec(t_tx=4.0), rec(t_tx=6.0)])
    cell = grid.cells[(416, 50)]
    assert cell.t_tx_ms == 5.0 and cell.count == 2


def test_bad_nn_size_names_record_and_field():
    with pytest.raises(DomainViolation) as info:
        ingest([rec(), rec(n=127)])
    assert info.value.index == 1 and info.value.field == "n"
    assert "record 1" in str(info.value)


@pytest.mark.parametrize("kw,field", [
    (dict(n=640), "n"), (dict(n=96), "n"), (dict(q=9), "q"), (dict(q=101), "q"),
    (dict(t_dl_ms=-0.1), "t_dl_ms"), (dict(precision=1.01), "precision"),
    (dict(t_enc_ms=float("nan")), "t_enc_ms"), (dict(image_bytes=-1), "image_bytes"),
])
def test_domain_violations(kw, field):
    with pytest.raises(DomainViolation) as info:
        ingest([rec(**kw)])
    assert info.value.field == field


def test_empty_and_mixed():
    grid = ingest([])
    assert len(grid) == 0
    with pytest.raises(EmptyGrid):
        to_design_matrix(grid, "t_tx_ms")
    with pytest.raises(MixedProfiles):
        ingest([rec(profile="a"), rec(profile="b")])


def test_design_matrix_order():
    grid = ingest([rec(160, 10), rec(128, 20), rec(128, 10)])
    keys, ys = to_design_matrix(grid, "precision")
    assert keys == [(128, 10), (128, 20), (160, 10)]
    assert all(0 <= y <= 1 for y in ys)
    keys, ys = to_design_matrix(ingest([rec()]), "t_dl_ms")
    assert keys == [(416, 50)] and ys == [20.0]
    with pytest.raises(ValueError):
        to_design_matrix(grid, "nope")


record_st = st.builds(
    rec,
    n=st.sampled_from(range(128, 609, 32)),
    q=st.integers(10, 100),
    t_tx=st.floats(0, 100),
    precision=st.floats(0, 1),
    t_enc_ms=st.floats(0, 50),
)


@settings(max_examples=50)
@given(st.lists(record_st, min_size=1, max_size=40), st.randoms())
def test_ingest_permutation_invariant(records, rnd):
    shuffled = list(records)
    rnd.shuffle(shuffled)
    a, b = ingest(records), ingest(shuffled)
    assert a.keys() == b.keys()
    for k in a.keys():
        for name in ("t_tx_ms", "precision", "t_enc_ms", "count"):
            assert getattr(a.cells[k], name) == pytest.approx(getattr(b.cells[k], name), rel=1e-9)
    keys, _ = to_design_matrix(a, "t_tx_ms")
    assert len(keys) == len({(r.nn_size, r.encoding_rate) for r in records})


@settings(max_examples=30)
@given(st.lists(record_st, min_size=1, max_size=20))
def test_csv_round_trip_is_lossless(records):
    assert loads_records(dumps_records(records, ["hdr"])) == records


def test_csv_schema_errors():
    good = dumps_records([rec()])
    with pytest.raises(SchemaError) as info:
        loads_records(good.replace("t_dl_ms", "t_dl_us"))
    assert info.value.column == "t_dl_us"
    with pytest.raises(SchemaError) as info:
        loads_records(good.replace("image_bytes", "extra").replace(",extra", ",extra,image_bytes"))
    with pytest.raises(SchemaError) as info:
        loads_records("profile,n,q\np,128,10\n")
    assert info.value.column == "t_enc_ms"
    with pytest.raises(SchemaError):
        loads_records("")
    with pytest.raises(DomainViolation) as info:
        loads_records(good.replace(",416,", ",abc,"))
    assert "line 2" in str(info.value)


def test_csv_header_order_free_and_comments():
    cols = list(CSV_COLUMNS)
    random.Random(3).shuffle(cols)
    r = rec()
    row = {c: v for c, v in zip(CSV_COLUMNS, dumps_records([r]).splitlines()[1].split(","))}
    text = "# comment\n" + ",".join(cols) + "\n" + ",".join(row[c] for c in cols) + "\n"
    assert loads_records(text) == [r]


def test_grid_records_export():
    grid = ingest([rec(t_tx=4.0), rec(t_tx=6.0), rec(128, 10)])
    out = grid_records(grid)
    assert [(r.nn_size, r.encoding_rate, r.t_tx_ms) for r in out] == [(128, 10, 5.0), (416, 50, 5.0)]
