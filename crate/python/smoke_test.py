"""Smoke test for the bt_coeff extension module.

Build and install first:  pip install --no-build-isolation ./crates/py
"""

import json

import bt_coeff


def main():
    x = bt_coeff.Padic(3, "1/3")
    assert x.valuation == -1
    assert (x * bt_coeff.Padic(3, "3")) == bt_coeff.Padic(3, "1")

    zero = bt_coeff.Padic(2, "0")
    disc = bt_coeff.Ball.z(zero, 1)
    assert disc.contains(bt_coeff.Padic(2, "6"))
    assert not disc.contains(bt_coeff.Padic(2, "5"))
    assert not disc.contains(None)
    assert disc.complement().contains(None)
    assert disc.measure() == (1, 3)

    reg = bt_coeff.Registry(3, 1, 1)
    assert json.loads(reg.counts())["ok"]
    assert len(reg.minimal()) == 3 * 4

    cx = bt_coeff.Complex(2, 1, 1, 1)
    report = json.loads(cx.verify(seed=1, lifts=10))
    assert report["verdict"] == "exact", report
    assert report["dims"]["c1"] == 12
    matrix = json.loads(cx.matrix())
    assert len(matrix["order"]) == 6
    assert bt_coeff.example_matches()
    assert bt_coeff.tree_dot(2, 1).startswith("digraph")
    print("smoke test passed")


if __name__ == "__main__":
    main()
