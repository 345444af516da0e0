"""Problem instances: the five-vertex fixture graph and a planted generator.

The fixture is a hand-checked 7-edge digraph whose full path catalog is small
enough to audit by hand; its totals are pinned by golden tests.

The generator lays vertices on a jittered grid, derives raw edge costs from a
tiny UAV-flavored model (edge length and hover-point distance for party 1,
ground-risk and noise-exposure costs for party 2), discretizes them to
integers >= 2, then plants a breadth-first tree from the source with all
weights 1. Any path leaving the tree pays at least one weight >= 2, so for
every endpoint the tree path strictly dominates every alternative in every
objective of both parties. That makes the common Pareto set per endpoint
nonempty by construction (it is exactly the tree path), which downstream
consensus experiments rely on.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .oracles import exact_path_catalog
from .shortestpath import SOURCE, WeightedDigraph

_FIXTURE_EDGES = {
    (1, 2): ((1, 2), (2, 4)),
    (1, 3): ((3, 2), (3, 5)),
    (2, 3): ((3, 3), (2, 1)),
    (2, 5): ((9, 2), (6, 1)),
    (3, 4): ((2, 1), (1, 1)),
    (3, 5): ((1, 3), (4, 3)),
    (4, 5): ((2, 1), (1, 1)),
}

KIND_FIXTURE = "fixture"
KIND_PLANTED = "planted-uav"

# Physical-ish constants for the raw party-2 costs. They only shape weight
# magnitudes before discretization; the planted tree is what guarantees the
# common solution, so these can be tuned freely.
P_CRASH = 1e-4          # crash probability per edge traversal
S_H = 12.0              # lethal area, m^2
ALT_REF = 40.0          # altitude softening scale for ground risk, m
PSI_MU = math.log(35.0)  # lognormal noise-exposure peak altitude
PSI_SIGMA = 0.5
DENSITY_BASE = 0.2
RETRY_BOUND = 5
WEIGHT_SPAN = 8         # discretized weights fall in 2 .. 2 + WEIGHT_SPAN
SPOT_CHECK_WALKS = 10_000


def fixture_graph() -> WeightedDigraph:
    """The five-vertex reference graph used across tests and examples."""
    return WeightedDigraph(5, dict(_FIXTURE_EDGES))


@dataclass(frozen=True)
class InstanceSpec:
    """Parameters for one generated instance.

    grid_cols defaults to ceil(sqrt(n)); density_seed defaults to seed. The
    jitter amplitude feeds both vertex positions and the upward perturbation
    of off-tree weights; zero jitter leaves weights untouched after
    discretization.
    """

    kind: str
    n: int
    seed: int = 0
    grid_cols: Optional[int] = None
    hover_points: int = 3
    jitter: float = 0.15
    density_seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in (KIND_FIXTURE, KIND_PLANTED):
            raise ValueError(f"unknown instance kind {self.kind!r}")
        if self.n < 2:
            raise ValueError("instance needs at least 2 vertices")
        if self.grid_cols is not None and self.grid_cols < 1:
            raise ValueError("grid_cols must be positive")
        if self.hover_points < 1:
            raise ValueError("need at least one hover point")
        if self.jitter < 0:
            raise ValueError("jitter must be nonnegative")

    @property
    def cols(self) -> int:
        return self.grid_cols if self.grid_cols is not None else math.ceil(math.sqrt(self.n))

    @property
    def rows(self) -> int:
        return math.ceil(self.n / self.cols)


class _DensityField:
    """Smooth positive field: a base level plus three Gaussian bumps."""

    def __init__(self, rng: random.Random, cols: int, rows: int):
        self.bumps = []
        for _ in range(3):
            cx = rng.uniform(0, max(cols - 1, 1))
            cy = rng.uniform(0, max(rows - 1, 1))
            amp = rng.uniform(0.5, 2.0)
            spread = rng.uniform(0.8, 2.0)
            self.bumps.append((cx, cy, amp, spread))

    def at(self, x: float, y: float) -> float:
        total = DENSITY_BASE
        for cx, cy, amp, spread in self.bumps:
            d2 = (x - cx) ** 2 + (y - cy) ** 2
            total += amp * math.exp(-d2 / (2 * spread * spread))
        return total


def _noise_exposure(alt: float) -> float:
    """Lognormal annoyance profile over altitude; peaks near low cruise."""
    return math.exp(-((math.log(alt) - PSI_MU) ** 2) / (2 * PSI_SIGMA**2)) / (
        alt * PSI_SIGMA * math.sqrt(2 * math.pi)
    )


def _grid_pairs(spec: InstanceSpec) -> List[Tuple[int, int]]:
    pairs = []
    cols = spec.cols
    for v in range(1, spec.n + 1):
        r, c = divmod(v - 1, cols)
        if c + 1 < cols and v + 1 <= spec.n:
            pairs.append((v, v + 1))
        if v + cols <= spec.n:
            pairs.append((v, v + cols))
    return pairs


def _discretize(raw: Dict[Tuple[int, int], float]) -> Dict[Tuple[int, int], int]:
    lo = min(raw.values())
    hi = max(raw.values())
    if hi <= lo:
        return {uv: 2 for uv in raw}
    return {uv: 2 + math.ceil((val - lo) / (hi - lo) * WEIGHT_SPAN) for uv, val in raw.items()}


def _bfs_tree(spec: InstanceSpec, adjacency: Dict[int, List[int]]) -> Tuple[Dict[int, int], set]:
    """First-visit BFS from the source over ascending neighbors."""
    depth = {SOURCE: 0}
    tree_edges = set()
    frontier = [SOURCE]
    while frontier:
        nxt = []
        for u in frontier:
            for v in sorted(adjacency[u]):
                if v not in depth:
                    depth[v] = depth[u] + 1
                    tree_edges.add((u, v))
                    nxt.append(v)
        frontier = nxt
    if len(depth) != spec.n:
        raise ValueError("grid prefix not connected")
    return depth, tree_edges


def _build_planted(spec: InstanceSpec, rng: random.Random) -> Tuple[WeightedDigraph, Dict[int, int]]:
    cols, rows = spec.cols, spec.rows
    density_rng = random.Random(spec.density_seed if spec.density_seed is not None else spec.seed)
    field_ = _DensityField(density_rng, cols, rows)
    altitude = {v: 25.0 + 25.0 * density_rng.random() for v in range(1, spec.n + 1)}

    positions = {}
    for v in range(1, spec.n + 1):
        r, c = divmod(v - 1, cols)
        if spec.jitter > 0:
            positions[v] = (c + rng.uniform(-spec.jitter, spec.jitter), r + rng.uniform(-spec.jitter, spec.jitter))
        else:
            positions[v] = (float(c), float(r))
    hovers = [
        (rng.uniform(0, max(cols - 1, 1)), rng.uniform(0, max(rows - 1, 1)))
        for _ in range(spec.hover_points)
    ]

    pairs = _grid_pairs(spec)
    raw_len: Dict[Tuple[int, int], float] = {}
    raw_hover: Dict[Tuple[int, int], float] = {}
    raw_fatal: Dict[Tuple[int, int], float] = {}
    raw_noise: Dict[Tuple[int, int], float] = {}
    for u, v in pairs:
        (xu, yu), (xv, yv) = positions[u], positions[v]
        mid = ((xu + xv) / 2, (yu + yv) / 2)
        alt = (altitude[u] + altitude[v]) / 2
        raw_len[(u, v)] = math.dist(positions[u], positions[v])
        raw_hover[(u, v)] = min(math.dist(mid, h) for h in hovers)
        shelter = 1.0 / (1.0 + alt / ALT_REF)
        raw_fatal[(u, v)] = P_CRASH * S_H * field_.at(*mid) * shelter
        raw_noise[(u, v)] = field_.at(*mid) * _noise_exposure(alt)

    w_len = _discretize(raw_len)
    w_hover = _discretize(raw_hover)
    w_fatal = _discretize(raw_fatal)
    w_noise = _discretize(raw_noise)

    adjacency: Dict[int, List[int]] = {v: [] for v in range(1, spec.n + 1)}
    for u, v in pairs:
        adjacency[u].append(v)
        adjacency[v].append(u)
    depth, tree_edges = _bfs_tree(spec, adjacency)

    jitter_up = math.ceil(spec.jitter * 10)
    edges = {}
    for u, v in pairs:
        base = ((w_len[(u, v)], w_hover[(u, v)]), (w_fatal[(u, v)], w_noise[(u, v)]))
        for uv in ((u, v), (v, u)):
            if uv in tree_edges:
                edges[uv] = ((1, 1), (1, 1))
            elif spec.jitter > 0 and jitter_up > 0:
                edges[uv] = tuple(
                    tuple(w + rng.randrange(jitter_up + 1) for w in ws) for ws in base
                )
            else:
                edges[uv] = base
    return WeightedDigraph(spec.n, edges), depth


def _verify_planted(g: WeightedDigraph, depth: Dict[int, int], spec: InstanceSpec) -> None:
    """Exhaustive check for small n, randomized spot check above that."""
    if g.n <= 12:
        cat = exact_path_catalog(g)
        for endpoint, ec in cat.per_endpoint.items():
            if not ec.common:
                raise ValueError(f"endpoint {endpoint} has empty common set")
            d = depth[endpoint]
            want = ((d, d), (d, d))
            if all(obj != want for _, obj in ec.common):
                raise ValueError(f"tree path to {endpoint} missing from common set")
        return
    check_rng = random.Random(f"planted-check-{spec.seed}")
    cap = 2 * g.n
    for _ in range(SPOT_CHECK_WALKS):
        totals = [0, 0, 0, 0]
        u = SOURCE
        for _ in range(check_rng.randrange(1, cap)):
            succ = g.successors(u)
            if not succ:
                break
            v = succ[check_rng.randrange(len(succ))]
            w1, w2 = g.weights(u, v)
            totals[0] += w1[0]
            totals[1] += w1[1]
            totals[2] += w2[0]
            totals[3] += w2[1]
            u = v
            if any(t < depth[u] for t in totals):
                raise ValueError(f"random walk beats tree path at vertex {u}")


def generate_planted_uav(spec: InstanceSpec, rng: Optional[random.Random] = None) -> WeightedDigraph:
    """Build a planted instance, revalidating and retrying a bounded number of times."""
    if spec.kind != KIND_PLANTED:
        raise ValueError(f"spec kind must be {KIND_PLANTED!r}")
    rng = rng if rng is not None else random.Random(spec.seed)
    failures = []
    for _ in range(RETRY_BOUND):
        g, depth = _build_planted(spec, rng)
        try:
            _verify_planted(g, depth, spec)
        except ValueError as exc:
            failures.append(str(exc))
            continue
        return g
    raise RuntimeError(f"generator failed validation {RETRY_BOUND} times: {failures[-1]}")


def instance_for(spec: InstanceSpec) -> WeightedDigraph:
    if spec.kind == KIND_FIXTURE:
        return fixture_graph()
    return generate_planted_uav(spec)


def provenance_comment(spec: InstanceSpec) -> str:
    parts = [f"kind={spec.kind}", f"n={spec.n}", f"seed={spec.seed}"]
    if spec.grid_cols is not None:
        parts.append(f"grid_cols={spec.grid_cols}")
    parts.append(f"hover={spec.hover_points}")
    parts.append(f"jitter={spec.jitter}")
    if spec.density_seed is not None:
        parts.append(f"density_seed={spec.density_seed}")
    return "# spec: " + " ".join(parts)


def write_instance(g: WeightedDigraph, *, comment: Optional[str] = None) -> str:
    """Serialize to the `bpmosp v1` text format."""
    k1, k2 = g.k
    lines = ["bpmosp v1"]
    if comment is not None:
        for line in comment.splitlines():
            lines.append(line if line.startswith("#") else f"# {line}")
    lines.append(f"{g.n} 2 {k1} {k2}")
    for (u, v), (w1, w2) in g.edge_items():
        left = " ".join(str(w) for w in w1)
        right = " ".join(str(w) for w in w2)
        lines.append(f"{u} {v} {left} | {right}")
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> WeightedDigraph:
    """Parse the `bpmosp v1` format; failures name the offending line."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != "bpmosp v1":
        raise ValueError("line 1: expected header 'bpmosp v1'")
    n = k1 = k2 = None
    edges: Dict[Tuple[int, int], Tuple[Tuple[int, ...], Tuple[int, ...]]] = {}
    first_line: Dict[Tuple[int, int], int] = {}
    for no, raw in enumerate(lines[1:], start=2):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        if n is None:
            parts = s.split()
            if len(parts) != 4:
                raise ValueError(f"line {no}: expected 'n M k1 k2'")
            try:
                n, parties, k1, k2 = (int(p) for p in parts)
            except ValueError:
                raise ValueError(f"line {no}: expected four integers 'n M k1 k2'") from None
            if parties != 2:
                raise ValueError(f"line {no}: only two-party instances supported, got M={parties}")
            if n < 2 or k1 < 1 or k2 < 1:
                raise ValueError(f"line {no}: sizes out of range")
            continue
        if s.count("|") != 1:
            raise ValueError(f"line {no}: expected exactly one '|' between party weights")
        left, right = s.split("|")
        try:
            lt = [int(t) for t in left.split()]
            rt = [int(t) for t in right.split()]
        except ValueError:
            raise ValueError(f"line {no}: non-integer token") from None
        if len(lt) != 2 + k1 or len(rt) != k2:
            raise ValueError(f"line {no}: expected 'u v' + {k1} weights | {k2} weights")
        u, v = lt[0], lt[1]
        if not (1 <= u <= n and 1 <= v <= n):
            raise ValueError(f"line {no}: vertex outside 1..{n}")
        if u == v:
            raise ValueError(f"line {no}: self loop at vertex {u}")
        if (u, v) in edges:
            raise ValueError(f"line {no}: duplicate edge {u}->{v} (first on line {first_line[(u, v)]})")
        w1, w2 = tuple(lt[2:]), tuple(rt)
        if any(w < 1 for w in w1 + w2):
            raise ValueError(f"line {no}: non-positive weight")
        edges[(u, v)] = (w1, w2)
        first_line[(u, v)] = no
    if n is None:
        raise ValueError("line 2: missing counts line 'n M k1 k2'")
    return WeightedDigraph(n, edges)
