"""Built-in problems for the command line."""

import numpy as np

from .constructions import random_weierstrass, weierstrass_pencil
from .qnlab import make_volterra

PENCIL_PRESETS = ("jordan-2", "weierstrass-random", "index-1")
QN_PRESETS = ("volterra", "neg-volterra")
PRESETS = PENCIL_PRESETS + QN_PRESETS


def pencil_preset(name, seed=0):
    """Return ``(E, A)`` for a pencil preset; ``seed`` drives the random ones."""
    if name == "jordan-2":
        # E x' = x with E the 2x2 shift: index 2, no finite spectrum
        return np.array([[0.0, 1.0], [0.0, 0.0]]), np.eye(2)
    rng = np.random.default_rng(seed)
    if name == "weierstrass-random":
        E, A, _, _ = random_weierstrass(rng)
        return E, A
    if name == "index-1":
        eigs = -rng.uniform(0.5, 2.0, 3) + 1j * rng.uniform(-1.0, 1.0, 3)
        return weierstrass_pencil(np.diag(eigs), [1, 1, 1], rng=rng)
    raise ValueError(f"unknown pencil preset {name!r}")


def qn_preset(name, n=400):
    if name == "volterra":
        return make_volterra(n)
    if name == "neg-volterra":
        return make_volterra(n, negated=True)
    raise ValueError(f"unknown quasi-nilpotent preset {name!r}")
