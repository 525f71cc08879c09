"""Synthetic instances and the JSON instance format."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .constraints import (
    BoundedKnapsack,
    GraphicMatroid,
    Matchoid,
    PartitionMatroid,
    UniformMatroid,
    constraint_from_dict,
    genre_limits,
    measure_extendibility,
)
from .objectives import (
    LogDetDPP,
    ModularFunction,
    RecommendationCut,
    WeightedCoverage,
    gaussian_kernel,
    objective_from_dict,
)


@dataclass
class Instance:
    objective: object
    constraint: object
    name: str = "instance"
    metadata: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.objective.n

    @property
    def p(self) -> int:
        return self.constraint.p

    @property
    def objective_class(self) -> str:
        return self.objective.objective_class

    def to_dict(self) -> dict:
        return {"name": self.name, "ground_size": self.n, "declared_p": self.p,
                "objective": self.objective.to_dict(), "constraint": self.constraint.to_dict(),
                "metadata": self.metadata}


GENERATORS = {}


def _generator(kind):
    def deco(fn):
        GENERATORS[kind] = fn
        return fn
    return deco


@_generator("coverage+uniform")
def _coverage_uniform(n, rng, k=3, universe=None, max_cover=4, weights="integer"):
    universe = universe or max(1, 2 * n)
    covers = [rng.choice(universe, size=rng.integers(1, max_cover + 1), replace=False).tolist()
              for _ in range(n)]
    w = rng.integers(1, 6, size=universe).astype(float) if weights == "integer" else rng.random(universe)
    return WeightedCoverage(covers, w, universe), UniformMatroid(n, k)


@_generator("coverage+partition")
def _coverage_partition(n, rng, blocks=3, cap=1, universe=None, max_cover=4):
    f, _ = _coverage_uniform(n, rng, universe=universe, max_cover=max_cover)
    labels = rng.integers(0, blocks, size=n)
    parts = [[i for i in range(n) if labels[i] == b] for b in range(blocks)]
    parts = [b for b in parts if b]
    return f, PartitionMatroid(n, parts, [cap] * len(parts))


@_generator("coverage+graphic")
def _coverage_graphic(n, rng, vertices=None, universe=None, max_cover=4):
    vertices = vertices or max(3, n // 2 + 1)
    edges = []
    for _ in range(n):
        a, b = rng.choice(vertices, size=2, replace=False)
        edges.append((int(a), int(b)))
    f, _ = _coverage_uniform(n, rng, universe=universe, max_cover=max_cover)
    return f, GraphicMatroid(vertices, edges)


def _similarity(n, rng, dim=4):
    # inner products of non-negative feature rows
    X = rng.random((n, dim))
    return X @ X.T


@_generator("cut+genre-limits")
def _cut_genres(n, rng, genres=3, genre_cap=1, k=None, lam=0.9, max_genres=None):
    max_genres = max_genres or genres
    s = _similarity(n, rng)
    members = [[] for _ in range(genres)]
    for i in range(n):
        count = int(rng.integers(1, max_genres + 1))
        for g in rng.choice(genres, size=count, replace=False):
            members[int(g)].append(i)
    k = k if k is not None else max(1, n // 3)
    return RecommendationCut(s, range(n), lam), genre_limits(n, members, genre_cap, k)


@_generator("cut+uniform")
def _cut_uniform(n, rng, k=3, lam=0.9):
    return RecommendationCut(_similarity(n, rng), range(n), lam), UniformMatroid(n, k)


@_generator("cut+matchoid")
def _cut_matchoid(n, rng, members=3, p=2, cap=2, lam=0.9):
    return RecommendationCut(_similarity(n, rng), range(n), lam), _random_matchoid(n, rng, members, p, cap)


@_generator("cut+knapsack")
def _cut_knapsack(n, rng, p=2, capacity=None, lam=0.9):
    sizes = rng.uniform(1.0, float(p), size=n)
    capacity = capacity if capacity is not None else float(np.round(sizes.sum() / 3, 3))
    return RecommendationCut(_similarity(n, rng), range(n), lam), BoundedKnapsack(np.round(sizes, 3), capacity)


def _random_matchoid(n, rng, members, p, cap):
    """Each element joins between 1 and ``p`` of ``members`` uniform-matroid ground sets."""
    p = min(p, members)
    grounds = [set() for _ in range(members)]
    for i in range(n):
        count = int(rng.integers(1, p + 1))
        for ell in rng.choice(members, size=count, replace=False):
            grounds[int(ell)].add(i)
    # make sure the multiplicity p is attained
    if n:
        for ell in range(p):
            grounds[ell].add(0)
    return Matchoid(n, [(g, UniformMatroid(n, cap)) for g in grounds])


@_generator("logdet+matchoid")
def _logdet_matchoid(n, rng, regions=4, radius=0.45, cap=2, h=0.5, alpha=1.0):
    pts = rng.random((n, 2))
    side = int(np.ceil(np.sqrt(regions)))
    centers = np.array([((i % side + 0.5) / side, (i // side + 0.5) / side) for i in range(regions)])
    d = np.linalg.norm(pts[:, None, :] - centers[None, :, :], axis=2)
    inside = d <= radius
    # every point belongs to at least its nearest region
    inside[np.arange(n), d.argmin(axis=1)] = True
    grounds = [set(np.flatnonzero(inside[:, r]).tolist()) for r in range(regions)]
    K = gaussian_kernel(pts, h)
    f = LogDetDPP(K, alpha, regularized=True)
    g = Matchoid(n, [(gr, UniformMatroid(n, cap)) for gr in grounds])
    return f, g


@_generator("logdet+uniform")
def _logdet_uniform(n, rng, k=3, h=0.5, alpha=1.0):
    pts = rng.random((n, 2))
    return LogDetDPP(gaussian_kernel(pts, h), alpha), UniformMatroid(n, k)


@_generator("modular+knapsack")
def _modular_knapsack(n, rng, p=2, capacity=None):
    sizes = np.round(rng.uniform(1.0, float(p), size=n), 3)
    capacity = capacity if capacity is not None else float(np.round(sizes.sum() / 3, 3))
    return ModularFunction(rng.integers(1, 10, size=n).astype(float)), BoundedKnapsack(sizes, capacity)


@_generator("modular+uniform")
def _modular_uniform(n, rng, k=3):
    return ModularFunction(rng.random(n)), UniformMatroid(n, k)


@_generator("modular+copies")
def _modular_copies(n, rng, k=5, p=1):
    """``p`` identical uniform matroids over the whole ground set: a p-matchoid."""
    members = [(range(n), UniformMatroid(n, k)) for _ in range(p)]
    return ModularFunction(rng.random(n)), Matchoid(n, members)


@_generator("modular+matchoid")
def _modular_matchoid(n, rng, members=3, p=2, cap=2):
    return ModularFunction(rng.integers(1, 10, size=n).astype(float)), _random_matchoid(n, rng, members, p, cap)


@_generator("coverage+matchoid")
def _coverage_matchoid(n, rng, members=3, p=2, cap=2):
    f, _ = _coverage_uniform(n, rng)
    return f, _random_matchoid(n, rng, members, p, cap)


def generate_instance(kind: str, n: int, seed: int = 0, **params) -> Instance:
    """Deterministic synthetic instance of the given ``kind`` (see ``GENERATORS``)."""
    if kind not in GENERATORS:
        raise ValueError(f"unknown instance kind {kind!r}; choose from {sorted(GENERATORS)}")
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng(seed)
    try:
        f, g = GENERATORS[kind](n, rng, **params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind!r}: {exc}") from None
    name = f"{kind}:n={n},seed={seed}" + "".join(f",{k}={v}" for k, v in sorted(params.items()))
    return Instance(f, g, name, {"kind": kind, "n": n, "seed": seed, "params": params})


def parse_generate_spec(spec: str) -> Instance:
    """``KIND:key=val,key=val`` -> instance; ``n`` and ``seed`` are ordinary keys."""
    kind, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"malformed generator parameter {item!r}")
        params[key.strip()] = _parse_scalar(val.strip())
    n = int(params.pop("n", 10))
    seed = int(params.pop("seed", 0))
    return generate_instance(kind.strip(), n, seed, **params)


def _parse_scalar(text):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------

def load_matrix_csv(path: str) -> np.ndarray:
    """Dense, header-free, comma-separated matrix."""
    M = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    return M


def save_matrix_csv(path: str, M) -> None:
    np.savetxt(path, np.asarray(M, dtype=float), delimiter=",", fmt="%.17g")


def instance_from_dict(d: dict, base_dir: str = ".", verify_p: bool = True) -> Instance:
    n = d.get("ground_size")

    def load(rel):
        return load_matrix_csv(os.path.join(base_dir, rel))

    obj_d = dict(d["objective"])
    con_d = dict(d["constraint"])
    for key in ("genres_json",):
        if key in con_d:
            with open(os.path.join(base_dir, con_d.pop(key))) as fh:
                con_d["genres"] = json.load(fh)
    if "points_json" in obj_d:
        with open(os.path.join(base_dir, obj_d.pop("points_json"))) as fh:
            obj_d["points"] = json.load(fh)
    f = objective_from_dict(obj_d, load)
    g = constraint_from_dict(con_d, n if n is not None else f.n)
    if n is not None and (f.n != n or g.n != n):
        raise ValueError(f"ground_size {n} disagrees with objective ({f.n}) or constraint ({g.n})")
    if f.n != g.n:
        raise ValueError(f"objective has {f.n} elements but constraint has {g.n}")
    declared = d.get("declared_p")
    if declared is not None:
        if declared < g.p and isinstance(g, Matchoid):
            raise ValueError(f"declared p={declared} below the matchoid multiplicity {g.p}")
        if verify_p and g.n <= 10:
            measured = measure_extendibility(g)
            if measured > declared:
                raise ValueError(f"declared p={declared} but measured extendibility is {measured}")
        g.p = int(declared)
    return Instance(f, g, d.get("name", "instance"), d.get("metadata", {}))


def load_instance(path: str) -> Instance:
    with open(path) as fh:
        d = json.load(fh)
    return instance_from_dict(d, os.path.dirname(os.path.abspath(path)))


def save_instance(path: str, inst: Instance) -> None:
    with open(path, "w") as fh:
        json.dump(inst.to_dict(), fh, indent=1, sort_keys=True)


def load_permutation(path: str, n: int) -> list:
    with open(path) as fh:
        order = [int(line) for line in fh if line.strip()]
    if sorted(order) != list(range(n)):
        raise ValueError(f"{path} is not a permutation of 0..{n - 1}")
    return order


def seeded_permutation(n: int, seed: int) -> list:
    """Fisher–Yates shuffle driven by a PCG64 stream."""
    rng = np.random.Generator(np.random.PCG64(seed))
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        order[i], order[j] = order[j], order[i]
    return order
