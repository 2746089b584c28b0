"""Weighted degenerate elliptic forward solver, DtN maps, CGO and reconstruction tools."""

import json

from . import _core
from ._core import DegenlabError, __version__, construct_xi

__all__ = [
    "DegenlabError",
    "__version__",
    "cache_key",
    "construct_xi",
    "dtn",
    "nearest_eigenvalue",
    "phase_only_pairing",
    "run",
    "solve",
]


def _dump(section):
    return json.dumps(section if section is not None else {})


def run(config, out_dir="out", no_cache=False, seed=None, threads=None):
    """Run an experiment config (dict or path) and return the manifest as a dict."""
    if not isinstance(config, dict):
        with open(config) as f:
            config = json.load(f)
    return json.loads(_core.run_config(json.dumps(config), str(out_dir), no_cache, seed, threads))


def cache_key(mesh, weight, potentials):
    return _core.cache_key(_dump(mesh), _dump(weight), _dump(potentials))


def solve(mesh, weight=None, potentials=None, f2=0.0, F0=0.0, lam=0.0):
    """Returns (vertices, u, residual) for constant Dirichlet data f2 and constant load F0."""
    return _core.solve(_dump(mesh), _dump(weight), _dump(potentials), f2, F0, lam)


def nearest_eigenvalue(mesh, weight=None, potentials=None, lam=0.0):
    return _core.nearest_eigenvalue(_dump(mesh), _dump(weight), _dump(potentials), lam)


def dtn(mesh, weight=None, potentials=None):
    """Returns (matrix, sigma2_dofs) in the nodal hat basis."""
    return _core.dtn(_dump(mesh), _dump(weight), _dump(potentials))


def phase_only_pairing(p1, p2, s, extents, k):
    return _core.phase_only_pairing(_dump(p1), _dump(p2), s, list(extents), list(k))
