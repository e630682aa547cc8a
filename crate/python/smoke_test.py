"""Smoke test for the Python extension module.

Build and run from the repository root:

    cargo build --release -p logflatten-py --features extension-module
    cp target/release/liblogflatten.so python/logflatten.so
    python3 python/smoke_test.py
"""

import json
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import logflatten as lf  # noqa: E402


def main():
    n2 = lf.Monoid.natural(2)
    assert n2.rank == 2 and n2.is_sharp() and n2.is_saturated()
    assert lf.Monoid([[2], [3]]).saturate().same_set(lf.Monoid.natural(1))

    # integrality of the worked example, and its counterexample
    h = lf.Hom(n2, n2, [[1, 1], [0, 1]])
    v = h.is_integral()
    assert v.status == "NotIntegral", v
    assert v.counterexample == ([1, 0], [0, 1], [0, 1], [0, 0])

    # blow-up of the origin
    b = lf.blow_up(n2.maximal_ideal())
    assert b.is_invertible()
    assert [p for p, _ in b.charts] == [[0, 1], [1, 0]]
    assert b.fan.rays == [[0, 1], [1, 0], [1, 1]]
    assert b.fan.to_svg().startswith("<svg")

    # flattening and certificate re-checking, including a JSON round trip
    c = lf.flatten(h)
    assert c.overall == "Verified" and not c.fast_exit
    assert c.ideal.generators == [[0, 1], [1, 0]]
    assert c.base_fan.is_smooth() and lf.verify(c)
    again = lf.Certificate.from_json(c.to_json())
    assert again.verify() and again.to_json() == c.to_json()
    tampered = json.loads(c.to_json())
    tampered["overall"] = "Failed"
    assert not lf.Certificate.from_json(json.dumps(tampered)).verify()

    # resolution of a singular cone, realised by a single ideal
    cone = lf.Cone([[1, 0], [1, 3]])
    smooth, centres = cone.face_fan().resolve()
    assert smooth.is_smooth() and len(centres) == 2
    k = lf.subdivision_to_ideal(cone.dual().hilbert_basis(), smooth)
    assert lf.blow_up(k).fan == smooth

    # big integers survive the boundary
    big = 10**30
    m = lf.Monoid([[big, 1], [0, 1]])
    assert m.generators[0][0] == big
    assert lf.Monoid.from_json(m.to_json()) == m

    try:
        lf.Monoid.from_json("{\"rank\": 2")
    except ValueError as e:
        assert "line 1" in str(e)
    else:
        raise AssertionError("malformed JSON accepted")

    print("python smoke test: ok (logflatten %s)" % lf.__version__)


if __name__ == "__main__":
    main()
