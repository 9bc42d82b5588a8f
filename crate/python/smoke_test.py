"""Smoke test for the femto_auction extension module.

Build and install first:  pip install maturin && maturin develop -m crates/py/Cargo.toml
Then run:                 python python/smoke_test.py   (or pytest python/)
"""

import csv
import io
import math

import femto_auction as fa


def test_bid_vector():
    b = fa.BidVector.from_increments([0.1, 0.2, 0.4])
    assert b.prices == [0.0, 0.1, 0.30000000000000004, 0.7000000000000001]
    assert b.max_slots == 3 and len(b) == 4
    assert b.is_convex()
    assert math.isclose(b.scaled(2.0).price(3), 1.4)


def test_reverse_auction_is_individually_rational():
    ask = fa.femto_bid_vector([2.0, 3.0], [12.0, 9.0], slots=20)
    other = fa.femto_bid_vector([1.0], [15.0], slots=20)
    r = fa.reverse_auction([ask, other], [10.0, 6.0], slots=20, macro_rate_mbps=0.8, demand_mbps=4.0)
    assert sum(r["slots"]) <= 20
    assert r["efficiency"] >= 0.0
    assert all(u >= -1e-9 for u in r["utilities"])
    greedy = fa.reverse_auction([ask, other], [10.0, 6.0], 20, 0.8, 4.0, solver="greedy")
    assert greedy["efficiency"] <= r["efficiency"] + 1e-12


def test_double_auction_bilateral_trade():
    bid = fa.BidVector([0.0, 3.0, 5.0])
    ask = fa.BidVector([0.0, 1.0, 4.0])
    r = fa.double_auction([[bid]], [ask], slots=2)
    assert r["trades"] == [(0, 0, 1)]
    assert math.isclose(r["efficiency"], 2.0)
    assert all(u >= -1e-9 for u in r["buyer_utilities"] + r["seller_utilities"])
    void = fa.double_auction([[bid]], [ask], slots=2, reserve_price=10.0)
    assert void["terminated_by_reserve"] and void["trades"] == []


def test_matching_and_radio():
    pairs, total = fa.max_weight_matching([[3.0, 1.0], [2.0, 4.0]])
    assert pairs == [(0, 0), (1, 1)] and total == 7.0
    assert math.isclose(fa.path_loss_femto(10.0), 38.46 + 20.0 + 7.0)
    assert math.isclose(fa.path_loss_macro(100.0), 17.39 + 7.52)
    assert math.isclose(fa.shannon_rate_mbps(1.0, 3.0), 2.0)


def test_experiment_roundtrip():
    text = fa.resolve_config("experiment.rounds = 6\n", seed=5)
    assert "experiment.seed = 5" in text
    records, summary = fa.run_experiment("single-mue", text)
    again, _ = fa.run_experiment("single-mue", text)
    assert records == again
    rows = list(csv.DictReader(io.StringIO(records)))
    assert len(rows) == 6 and rows[0]["schema"] == "records/1"
    assert list(csv.DictReader(io.StringIO(summary)))[0]["rounds"] == "6"


def test_errors_raise_value_error():
    for call in (lambda: fa.path_loss_femto(0.0), lambda: fa.resolve_config("nope.key = 1\n")):
        try:
            call()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"ok  {name}")
