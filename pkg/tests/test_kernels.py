import itertools
import os
import subprocess
import sys

import numpy as np
import pytest

from chbell import _kernels, make_state
from chbell.prediction import coincidence_grid, singles_grid


def _tables(f, step):
    s = make_state(f)
    ang = np.arange(0, 180, step, dtype=float)
    p = coincidence_grid(s, ang, ang)
    return ang, p, singles_grid(s, ang), singles_grid(s, ang)


def _brute(p, s1, s2, objective):
    n = len(s1)
    best, arg = -np.inf, None
    for i, l, j, k in itertools.product(range(n), repeat=4):
        num = p[i, j] - p[i, k] + p[l, j] + p[l, k]
        den = s1[l] + s2[j]
        v = num - den if objective == "CH" else num / max(den, 1e-9)
        if v > best + 1e-12:
            best, arg = v, (i, l, j, k)
    return best, arg


@pytest.mark.parametrize("f", [1.0, 0.4])
def test_best_ch_matches_brute_force(backend, f):
    _, p, s1, s2 = _tables(f, 15)
    v, *idx = _kernels.best_ch(p, p, p, p, s1, s2, 1e-12)
    bv, barg = _brute(p, s1, s2, "CH")
    assert v == pytest.approx(bv, abs=1e-12)
    assert tuple(idx) == barg


@pytest.mark.parametrize("f", [1.0, 0.4, 0.05])
def test_best_ratio_matches_brute_force(backend, f):
    _, p, s1, s2 = _tables(f, 15)
    v, *idx = _kernels.best_ratio(p, p, p, p, s1, s2, 1e-12)
    bv, barg = _brute(p, s1, s2, "R")
    assert v == pytest.approx(bv, abs=1e-12)
    assert tuple(idx) == barg


@pytest.mark.skipif("numba" not in _kernels.implementations(), reason="numba unavailable")
@pytest.mark.parametrize("f", [1.0, 0.4, 0.01])
def test_backends_agree_fine_grid(f):
    _, p, s1, s2 = _tables(f, 2)
    impls = _kernels.implementations()
    for k in (0, 1):
        a = impls["numpy"][k](p, p, p, p, s1, s2, 1e-12)
        b = impls["numba"][k](p, p, p, p, s1, s2, 1e-12)
        assert a[1:] == b[1:]
        assert a[0] == pytest.approx(b[0], abs=1e-14)


def test_match_heads_backends_agree():
    rng = np.random.default_rng(3)
    t1 = np.sort(rng.integers(0, 10**6, 2000)).astype(np.uint64)
    t2 = np.sort(rng.integers(0, 10**6, 2500)).astype(np.uint64)
    out = {name: fns[2](t1, t2, 0, 0, 200) for name, fns in _kernels.implementations().items()}
    vals = list(out.values())
    assert all(v == vals[0] for v in vals)


def test_backend_flag_value():
    assert _kernels.BACKEND in ("numba", "numpy")


def test_env_flag_selects_numpy():
    env = dict(os.environ, CHBELL_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from chbell import _kernels; print(_kernels.BACKEND, _kernels.best_ch.__name__)"],
        env=env, capture_output=True, text=True, check=True,
    ).stdout.split()
    assert out == ["numpy", "best_ch_numpy"]
