"""Smoke test for the abreu_lab extension module.

Build and install first:

    pip install maturin
    pip install --no-build-isolation -e crates/python

then run ``python python/smoke_test.py``.
"""

import json
import math

import abreu_lab


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    square = abreu_lab.Polytope.fixture("square")
    assert square.dim == 2 and square.num_facets == 4
    assert close(square.volume, 4.0, 1e-14)

    ext = square.extremal()
    assert ext["is_constant"] and close(ext["coefficients"][0], 4.0, 1e-12)

    hirz = abreu_lab.Polytope.fixture("hirzebruch")
    mono = hirz.monotone_point()
    assert mono["preferred_point_exact"] == ["14/9", "7/9"]
    assert mono["common_value_exact"] == "7/9"
    assert hirz.extremal()["exact"] == ["36/7", "0", "0"]
    assert hirz.rationality()["minimal_scale"] == "20"
    assert hirz.delzant(use_reference=True)["is_delzant"]
    assert [c for _, c in hirz.cone_angles()] == ["conical", "conical", "smooth", "smooth"]

    again = abreu_lab.Polytope.from_json(hirz.to_json())
    assert again.vertices == hirz.vertices
    json.loads(hirz.to_json())

    psi = hirz.psi(1.0, [2.0, -1.0])
    assert close(psi[0], -2.0 * hirz.volume, 1e-10) and close(psi[1], hirz.volume, 1e-10)

    norm, p = abreu_lab.Polytope.from_vertices([[0, 0], [3, 0], [2, 2], [0, 1]]).normalize()
    assert all(close(v, 1.0, 1e-12) for v in (sum(a * b for a, b in zip(n, p)) + c for n, c in zip(norm.normals, norm.offsets)))

    shifted = abreu_lab.Polytope.fixture("simplex").cone_labels(1.0, [0.4, 0.3])
    sol = shifted.soliton()
    assert close(sol["a"][0], 0.562778715960626, 1e-9) and abs(sol["a"][1]) < 1e-9

    g = abreu_lab.Potential.guillemin(square)
    assert close(g.scalar_curvature([0.3, -0.2]), 4.0, 1e-12)
    assert g.boundary_check(square)["passed"]
    assert g.einstein_residual(square)["deviation"] < 1e-10

    c = 9.0 / 7.0
    closed = abreu_lab.Potential.hirzebruch(c)
    domain = abreu_lab.Polytope.hirzebruch("9/7")
    assert close(closed.scalar_curvature([1.5, 0.5]), 36.0 / 7.0 / c, 1e-9)
    solved, report = abreu_lab.solve(domain, a=[0.0, 0.0], resolution=18)
    assert report["converged"], report
    cmp = abreu_lab.compare(solved, closed, domain)
    assert cmp["h_max_relative"] < 1e-6, cmp

    try:
        abreu_lab.Polytope([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0])
    except ValueError as e:
        assert "unbounded" in str(e).lower(), e
    else:
        raise AssertionError("unbounded input accepted")

    assert not math.isnan(solved.value([1.5, 0.5]))
    print(f"abreu_lab {abreu_lab.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
