"""Seeded generators for every benchmark instance family.

All generators are pure functions of their parameters and seed: identical
inputs give byte-identical graph files.  Randomness comes from
counter-based sub-streams of the master seed, so adding a generator call
never perturbs any other stream.  Bernoulli edge sets are sampled with
geometric gap skipping, which costs O(edges) rather than O(pairs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .errors import InvalidDenseParams, NotBipartite
from .graph_core import (
    NO_GROUP,
    SIDE_L,
    SIDE_R,
    Graph,
    build_graph,
)

# Sub-stream tags within DOMAIN_INSTANCE.
_TAG_BASE_BIPARTITE = 1
_TAG_BALANCED = 2

_FP_GUARD = 1e-9  # absorbs float noise before flooring exact powers


@dataclass(frozen=True)
class BlowupParams:
    """Parameters of the clique-blowup family.

    ``n`` left vertices, ``k * n`` right vertices, edge probability ``p``,
    and each left vertex expanded into a clique of ``ell`` vertices.
    """

    n: int
    k: int
    ell: int
    p: float
    seed: int = 0

    def __post_init__(self):
        if min(self.n, self.k, self.ell) < 1:
            raise ValueError("n, k, ell must be >= 1")
        if not (0.0 <= self.p < 1.0):
            raise ValueError("p must lie in [0, 1)")

    @property
    def num_blowup_vertices(self) -> int:
        return self.k * self.n + self.ell * self.n


@dataclass(frozen=True)
class DenseParams:
    """Dense regime: everything is a power of the total size ``m``."""

    m: int
    eps: float
    delta: float

    def __post_init__(self):
        if not (0.0 < self.eps < 1.0 / 3.0):
            raise InvalidDenseParams("eps must lie in (0, 1/3)")
        if not (self.eps / 4.0 < self.delta < self.eps):
            raise InvalidDenseParams("delta must lie in (eps/4, eps)")
        if self.m < 2:
            raise InvalidDenseParams("m must be >= 2")


@dataclass(frozen=True)
class DenseDerivation:
    """Rounded dense parameters plus the exact reals they came from."""

    params: "BlowupParams"
    exact_n: float
    exact_k: float
    exact_ell: float
    exact_p: float
    rounded_down: tuple[str, ...]
    warnings: tuple[str, ...]


@dataclass(frozen=True)
class RelationReport:
    """Which of the blowup parameter relations hold (warnings, not errors)."""

    p_lower_ok: bool  # p >= 50 ln(k) / n
    p_upper_ok: bool  # p <= 0.1
    ell_ok: bool  # ell >= 10 k p n
    p_lower_bound: float
    ell_lower_bound: float
    messages: tuple[str, ...]

    @property
    def all_ok(self) -> bool:
        return self.p_lower_ok and self.p_upper_ok and self.ell_ok


@dataclass(frozen=True)
class CloudMeta:
    """Layout of the clouds of a bipartite blowup.

    Cloud ``c`` covers vertices ``[c*K, (c+1)*K)``; cloud indices factor as
    ``c = copy * base_n + base_vertex``.
    """

    cloud_size: int  # K
    copies: int  # M
    base_n: int

    @property
    def num_clouds(self) -> int:
        return self.copies * self.base_n

    def members(self, cloud: int) -> range:
        start = cloud * self.cloud_size
        return range(start, start + self.cloud_size)

    def cloud_of(self, vertex: int) -> int:
        return vertex // self.cloud_size

    def copy_and_base(self, cloud: int) -> tuple[int, int]:
        return divmod(cloud, self.base_n)


# ---------------------------------------------------------------------------
# Bernoulli pair sampling


def _bernoulli_indices(total: int, p: float, gen: np.random.Generator) -> np.ndarray:
    """Indices of an iid Bernoulli(p) subset of range(total), via gap skipping."""
    if total <= 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    log_q = math.log1p(-p)
    picked: list[np.ndarray] = []
    pos = -1
    while pos < total:
        remaining = total - pos
        block = int(remaining * p * 1.1 + 10.0 * math.sqrt(remaining * p + 1.0) + 16)
        gaps = np.floor(np.log1p(-gen.random(block)) / log_q).astype(np.int64) + 1
        idx = pos + np.cumsum(gaps)
        picked.append(idx[idx < total])
        pos = int(idx[-1])
    return np.concatenate(picked)


# ---------------------------------------------------------------------------
# Families


def gen_base_bipartite(n: int, k: int, p: float, seed: int = 0) -> Graph:
    """Random bipartite base: |L| = n, |R| = k*n, iid edge probability p."""
    left, right = n, k * n
    gen = rngmod.stream(seed, rngmod.DOMAIN_INSTANCE, _TAG_BASE_BIPARTITE)
    idx = _bernoulli_indices(left * right, p, gen)
    edges = [(int(t // right), int(n + t % right)) for t in idx]
    side = np.concatenate(
        [np.full(left, SIDE_L, np.int8), np.full(right, SIDE_R, np.int8)]
    )
    return build_graph(left + right, edges, labels=side, kind="base-bipartite")


def gen_clique_blowup(params: BlowupParams, base: Graph | None = None) -> Graph:
    """Explicit clique blowup of the bipartite base.

    Left vertex ``u`` becomes the clique ``[u*ell, (u+1)*ell)`` (group id
    ``u``); right vertex ``j`` keeps index ``n*ell + j``.  Every base edge
    ``(u, w)`` joins all of ``u``'s clique to ``w``.  Only intended for
    desk-scale sizes; large instances are simulated implicitly on the base.
    """
    n, k, ell = params.n, params.k, params.ell
    if base is None:
        base = gen_base_bipartite(n, k, params.p, params.seed)
    elif base.n != n + k * n:
        raise ValueError("base graph does not match blowup parameters")
    edges: list[tuple[int, int]] = []
    for u in range(n):
        lo = u * ell
        edges.extend(
            (lo + a, lo + b) for a in range(ell) for b in range(a + 1, ell)
        )
    offset = n * ell
    for u in range(n):
        for w in base.neighbors(u):
            j = int(w) - n  # base right index
            edges.extend((u * ell + a, offset + j) for a in range(ell))
    side = np.concatenate(
        [np.full(n * ell, SIDE_L, np.int8), np.full(k * n, SIDE_R, np.int8)]
    )
    group = np.concatenate(
        [
            np.repeat(np.arange(n, dtype=np.int64), ell),
            np.full(k * n, NO_GROUP, np.int64),
        ]
    )
    return build_graph(
        n * ell + k * n, edges, labels=side, groups=group, kind="clique-blowup"
    )


def validate_relations(params: BlowupParams) -> RelationReport:
    """Check the blowup parameter relations; violations are warnings only."""
    p_lower = 50.0 * math.log(params.k) / params.n if params.k > 1 else 0.0
    ell_lower = 10.0 * params.k * params.p * params.n
    p_lower_ok = params.p >= p_lower
    p_upper_ok = params.p <= 0.1
    ell_ok = params.ell >= ell_lower
    messages = []
    if not p_lower_ok:
        messages.append(f"p={params.p} below 50 ln(k)/n = {p_lower:.6g}")
    if not p_upper_ok:
        messages.append(f"p={params.p} above 0.1")
    if not ell_ok:
        messages.append(f"ell={params.ell} below 10*k*p*n = {ell_lower:.6g}")
    return RelationReport(
        p_lower_ok, p_upper_ok, ell_ok, p_lower, ell_lower, tuple(messages)
    )


def derive_dense_params(dense: DenseParams, seed: int = 0) -> DenseDerivation:
    """Instantiate blowup parameters from the dense power-law recipe.

    Counts are floored (conservative toward the parameter relations);
    the edge probability keeps its exact real value.
    """
    m, eps, delta = dense.m, dense.eps, dense.delta
    exact_n = m**eps
    exact_k = m ** (1.0 - 3.0 * eps)
    exact_ell = m ** (1.0 - eps)
    exact_p = m**-delta
    n = int(math.floor(exact_n + _FP_GUARD))
    k = int(math.floor(exact_k + _FP_GUARD))
    ell = int(math.floor(exact_ell + _FP_GUARD))
    rounded = tuple(
        name
        for name, before, after in (
            ("n", exact_n, n),
            ("k", exact_k, k),
            ("ell", exact_ell, ell),
        )
        if abs(before - after) > _FP_GUARD
    )
    params = BlowupParams(n=n, k=k, ell=ell, p=exact_p, seed=seed)
    warnings = validate_relations(params).messages
    return DenseDerivation(params, exact_n, exact_k, exact_ell, exact_p, rounded, warnings)


def gen_bipartite_blowup(base: Graph, cloud_size: int, copies: int) -> tuple[Graph, CloudMeta]:
    """Replace each vertex of ``copies`` disjoint base copies by a cloud.

    A cloud is an independent set of ``cloud_size`` vertices; each base
    edge becomes a complete join between the two clouds.  The result stays
    bipartite and its alpha equals ``alpha(base) * cloud_size * copies``.
    """
    if base.side is None:
        raise NotBipartite("bipartite blowup needs a labeled base")
    K = int(cloud_size)
    meta = CloudMeta(cloud_size=K, copies=int(copies), base_n=base.n)
    base_edges = sorted(base.edge_set())
    edges: list[tuple[int, int]] = []
    for m in range(copies):
        shift = m * base.n
        for u, w in base_edges:
            cu = (shift + u) * K
            cw = (shift + w) * K
            edges.extend((cu + a, cw + b) for a in range(K) for b in range(K))
    side = np.repeat(np.tile(np.asarray(base.side, np.int8), copies), K)
    group = np.repeat(np.arange(meta.num_clouds, dtype=np.int64), K)
    g = build_graph(
        base.n * K * copies,
        edges,
        labels=side,
        groups=group,
        kind="bipartite-blowup",
    )
    return g, meta


def gen_star_tree(k: int) -> Graph:
    """Spider with root 0, mid vertices 1..k, and leaf i+k below mid i.

    The unique maximum independent set is the root plus all leaves
    (size k+1).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    edges = [(0, i) for i in range(1, k + 1)]
    edges += [(i, k + i) for i in range(1, k + 1)]
    return build_graph(2 * k + 1, edges, kind="star-tree")


def star_tree_regions(k: int) -> tuple[int, np.ndarray, np.ndarray]:
    """(root, mid vertices, leaf vertices) of :func:`gen_star_tree`."""
    return 0, np.arange(1, k + 1), np.arange(k + 1, 2 * k + 1)


def gen_hard_tree(k: int, copies: int, apex: bool = True) -> Graph:
    """Disjoint spiders, optionally joined into one tree by an apex vertex.

    Copy ``c`` occupies ``[c*(2k+1), (c+1)*(2k+1))`` laid out like
    :func:`gen_star_tree`; the apex (last index) attaches to every copy
    root.  Group ids mark the copy; the apex has no group.
    """
    if k < 1 or copies < 1:
        raise ValueError("k and copies must be >= 1")
    span = 2 * k + 1
    edges: list[tuple[int, int]] = []
    for c in range(copies):
        base = c * span
        edges += [(base, base + i) for i in range(1, k + 1)]
        edges += [(base + i, base + k + i) for i in range(1, k + 1)]
    n = copies * span + (1 if apex else 0)
    group = np.repeat(np.arange(copies, dtype=np.int64), span)
    if apex:
        apex_v = copies * span
        edges += [(apex_v, c * span) for c in range(copies)]
        group = np.concatenate([group, np.array([NO_GROUP], np.int64)])
    return build_graph(n, edges, groups=group, kind="hard-tree")


def gen_random_balanced_bipartite(n: int, d: float, seed: int = 0) -> Graph:
    """2n vertices, sides assigned uniformly, cross edges with probability d/n."""
    if d >= n:
        raise ValueError("d must be < n")
    gen = rngmod.stream(seed, rngmod.DOMAIN_INSTANCE, _TAG_BALANCED)
    side = (gen.random(2 * n) < 0.5).astype(np.int8)  # 0 = L, 1 = R
    left = np.flatnonzero(side == SIDE_L)
    right = np.flatnonzero(side == SIDE_R)
    idx = _bernoulli_indices(left.size * right.size, d / n, gen)
    edges = []
    if idx.size:
        us = left[idx // right.size]
        ws = right[idx % right.size]
        edges = list(zip(us.tolist(), ws.tolist()))
    return build_graph(2 * n, edges, labels=side, kind="balanced-bipartite")


def balanced_bipartite_flags(n: int, d: float) -> tuple[str, ...]:
    """Regime notes for the balanced bipartite family (never fatal)."""
    notes = []
    if d > math.log(n) / 100.0:
        notes.append(f"d={d} above ln(n)/100 = {math.log(n) / 100.0:.6g}")
    return tuple(notes)


def gen_appendix_anchor(n: int) -> Graph:
    """Independent block I joined to an n-clique C, plus a hub over I.

    Layout: I = [0, n), C = [n, 2n), hub = 2n.  alpha = n (the block I);
    minimum-degree greedy is drawn to the hub and returns size 2.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    edges: list[tuple[int, int]] = []
    edges += [(i, n + c) for i in range(n) for c in range(n)]
    edges += [(n + a, n + b) for a in range(n) for b in range(a + 1, n)]
    hub = 2 * n
    edges += [(i, hub) for i in range(n)]
    return build_graph(2 * n + 1, edges, kind="anchor")


def gen_appendix_multicopy(n: int, eps: float) -> Graph:
    """n disjoint units, each an independent s-block joined to an n-clique.

    s = floor(n**eps).  Unit c occupies ``[c*(n+s), (c+1)*(n+s))`` with the
    independent block first; group ids mark the unit.  alpha = n * s.
    """
    s = int(math.floor(n**eps + _FP_GUARD))
    if s < 1:
        raise ValueError("n**eps must be >= 1")
    span = n + s
    edges: list[tuple[int, int]] = []
    for c in range(n):
        base = c * span
        block = range(base, base + s)
        clique = range(base + s, base + span)
        edges += [(i, j) for i in block for j in clique]
        edges += [
            (a, b) for a in clique for b in clique if a < b
        ]
    group = np.repeat(np.arange(n, dtype=np.int64), span)
    return build_graph(n * span, edges, groups=group, kind="multicopy")


def multicopy_block_size(n: int, eps: float) -> int:
    return int(math.floor(n**eps + _FP_GUARD))


# ---------------------------------------------------------------------------
# Closed-form alphas and sidecar metadata


def formula_alpha(family: str, **kw) -> int | None:
    """Known closed-form alpha for a family, or None."""
    if family == "star-tree":
        return kw["k"] + 1
    if family == "hard-tree":
        return kw["copies"] * (kw["k"] + 1)
    if family == "anchor":
        return kw["n"]
    if family == "multicopy":
        return kw["n"] * multicopy_block_size(kw["n"], kw["eps"])
    if family == "bipartite-blowup":
        return kw["alpha_base"] * kw["cloud_size"] * kw["copies"]
    return None


def sidecar_text(family: str, params: dict, seed: int | None, alpha: int | None) -> str:
    """Key-value sidecar recorded next to generated graph files."""
    lines = [f"family = {family}"]
    for key in sorted(params):
        lines.append(f"{key} = {params[key]}")
    if seed is not None:
        lines.append(f"seed = {seed}")
    if alpha is not None:
        lines.append(f"alpha = {alpha}")
    return "\n".join(lines) + "\n"
