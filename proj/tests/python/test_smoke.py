import json
import math
import os
import pathlib

import numpy as np
import pytest

import degenlab

EXAMPLES = pathlib.Path(os.environ.get("DEGENLAB_EXAMPLES_DIR", pathlib.Path(__file__).parents[2] / "configs" / "examples"))
MESH = {"lengths": [1, 1], "cells": [8, 8]}


def test_version():
    assert degenlab.__version__.startswith("degenlab ")


def test_constant_data_gives_constant_solution():
    x, u, res = degenlab.solve(MESH, {"s": 0.75}, {}, f2=1.0)
    assert x.shape == (81, 2)
    assert np.max(np.abs(u - 1.0)) < 1e-10
    assert res < 1e-10


def test_dtn_is_hermitian_and_kills_constants():
    L, dofs = degenlab.dtn(MESH, {"s": 0.5}, {"V": 1.0, "q": 0.5})
    assert L.shape == (len(dofs), len(dofs))
    assert np.linalg.norm(L - L.conj().T) < 1e-12 * np.linalg.norm(L)
    _, _, _ = degenlab.solve(MESH, {"s": 0.5}, {}, f2=1.0)
    L0, _ = degenlab.dtn(MESH, {"s": 0.5}, {})
    assert np.linalg.norm(L0 @ np.ones(L0.shape[1])) < 1e-11 * np.linalg.norm(L0)


def test_cache_key_ignores_key_order():
    a = degenlab.cache_key(MESH, {"s": 0.5}, {"V": 1.0, "q": 0.5})
    b = degenlab.cache_key({"cells": [8, 8], "lengths": [1, 1]}, {"s": 0.5}, {"q": 0.5, "V": 1.0})
    assert a == b and len(a) == 64


def test_xi_invariants():
    d = degenlab.construct_xi([0.0, 0.0, 2.0], 5.0, 0.75, 3)
    xi = np.array(d["xi"])
    assert abs(np.sum(xi * xi)) < 1e-12
    assert math.isclose(np.linalg.norm(xi), math.sqrt(2) * 5.0, rel_tol=1e-12)


def test_phase_only_pairing_of_constant():
    # int_0^1 y^{1-2s} dy = 1 / (2 - 2s) at k = 0
    t = degenlab.phase_only_pairing({"V": 1.0}, {}, 0.75, [1.0, 1.0], [0.0, 0.0])
    assert abs(t - 2.0) < 1e-12


def test_error_kind_is_exposed():
    with pytest.raises(degenlab.DegenlabError) as e:
        degenlab.construct_xi([1.0, 0.0], 2.0, 0.75, 2)
    assert "DimensionTooSmall" in str(e.value)


def test_run_example(tmp_path):
    manifest = degenlab.run(str(EXAMPLES / "forward-constant.json"), out_dir=tmp_path, no_cache=True)
    assert all(c["passed"] for c in manifest["checks"])
    on_disk = json.loads((tmp_path / "manifest.json").read_text())
    assert on_disk["configDigest"] == manifest["configDigest"]
