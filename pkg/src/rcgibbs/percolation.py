"""Active-bond clusters, connectivity events, integrated activity law.

The integrated law mixes, over the two-copy overlap distribution, the
activity pattern of the slice representation. Its key computational fact:
conditionally on one copy's configuration inside a slice, the bond
activities are independent coin flips whose probabilities come from the
slice base, so patterns can be accumulated without enumerating bond
assignments.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import TooLargeError, ZeroSliceError
from .gibbs import GibbsSpec, effective_bonds
from .lattice import ball, boundary_vertices
from .rcr import (
    RcrBase,
    assignment_measure,
    monotone_base,
    reconstruct,
    _bond_locals,
    _local_of,
)
from .twocopy import (
    make_slice,
    nonoverlap_distribution,
    symmetrized_spec,
    _config_weight,
    _pair_weight_tables,
)


class UnionFind:
    """Array union-find with path halving and union by size."""

    __slots__ = ("parent", "size")

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def activity_pattern(base: RcrBase, assignment) -> int:
    """Bitmask of active bonds for a full assignment of subset indices."""
    mask = 0
    for j, (bb, a) in enumerate(zip(base.bonds, assignment)):
        if bb.subsets[a] != bb.full_mask:
            mask |= 1 << j
    return mask


def chain_components(n_vertices: int, bond_vertices, active_mask: int):
    """Vertex sets of the chains formed by the active bonds.

    Two active bonds belong to one chain when they share a vertex; each
    component is returned as the frozenset of vertices its bonds cover.
    """
    uf = UnionFind(n_vertices)
    covered = set()
    for j, verts in enumerate(bond_vertices):
        if (active_mask >> j) & 1:
            covered.update(verts)
            for u in verts[1:]:
                uf.union(verts[0], u)
    comps: dict[int, set] = {}
    for v in covered:
        comps.setdefault(uf.find(v), set()).add(v)
    return [frozenset(c) for c in comps.values()]


def regions_connected(n_vertices: int, bond_vertices, active_mask: int, A, B) -> bool:
    """True when an active chain touches both vertex sets.

    Requires at least one active bond meeting each side; overlapping
    regions are not automatically connected.
    """
    A = set(A)
    B = set(B)
    if not A or not B or active_mask == 0:
        return False
    for comp in chain_components(n_vertices, bond_vertices, active_mask):
        if comp & A and comp & B:
            return True
    return False


def base_connection_probability(
    spec: GibbsSpec,
    base: RcrBase,
    A,
    B,
    max_states: int = 1 << 16,
    max_assignments: int = 10**7,
):
    """Probability of the active-chain connection event under the bond
    marginal of the given base (spins summed out, counts exact)."""
    bond_vertices = tuple(bb.vertices for bb in base.bonds)
    conn_cache: dict[int, bool] = {}
    num = 0
    den = 0
    for assign, nu, n in assignment_measure(spec, base, max_states, max_assignments):
        if n == 0:
            continue
        w = nu * n
        den += w
        mask = activity_pattern(base, assign)
        ok = conn_cache.get(mask)
        if ok is None:
            ok = regions_connected(base.n_vertices, bond_vertices, mask, A, B)
            conn_cache[mask] = ok
        if ok:
            num += w
    if den == 0:
        raise ZeroSliceError("representation carries no compatible configuration")
    return num / den


@dataclass(eq=False)
class IntegratedRC:
    """Distribution of the active-bond pattern, integrated over overlaps.

    patterns maps a bond bitmask (bit j = effective bond j active) to its
    probability. bond_vertices keeps the full vertex set per bond for
    connectivity queries.
    """

    n_vertices: int
    bond_vertices: tuple[tuple[int, ...], ...]
    patterns: dict
    exact: bool
    _conn_cache: dict = field(default_factory=dict, repr=False)

    def total(self):
        return sum(self.patterns.values())

    def connection_probability(self, A, B):
        A, B = frozenset(A), frozenset(B)
        key = (A, B)
        acc = 0
        for mask, p in self.patterns.items():
            ck = (mask, key)
            ok = self._conn_cache.get(ck)
            if ok is None:
                ok = regions_connected(self.n_vertices, self.bond_vertices, mask, A, B)
                self._conn_cache[ck] = ok
            if ok:
                acc += p
        return acc

    def active_marginal(self, j: int):
        return sum(p for mask, p in self.patterns.items() if (mask >> j) & 1)

    def conditional_active(self, j: int):
        """Per conditioning pattern on the other bonds: P(bond j active | rest).

        Only conditioning events of positive probability appear.
        """
        groups: dict[int, list] = {}
        for mask, p in self.patterns.items():
            rest = mask & ~(1 << j)
            tot_act = groups.setdefault(rest, [0, 0])
            tot_act[0] += p
            if (mask >> j) & 1:
                tot_act[1] += p
        return {rest: act / tot for rest, (tot, act) in groups.items() if tot > 0}


def domination_probability(irc: IntegratedRC, bond_index: int):
    """Supremum over positive-probability exterior patterns of the
    conditional activity of one bond; 0 when nothing conditions it."""
    cond = irc.conditional_active(bond_index)
    return max(cond.values(), default=0)


# ---------------------------------------------------------------------------
# Slice activity terms


def _slice_pattern_terms(spec, sigma, base_factory, validate):
    """Unnormalized activity-pattern weights contributed by one overlap slice.

    Returns (slice_total, pattern dict); both carry the raw two-copy weight
    w(omega) * w(sigma - omega) summed over the slice.
    """
    try:
        slice_spec = symmetrized_spec(spec, sigma)
    except ZeroSliceError:
        return 0, {}
    if base_factory is None:
        base = monotone_base(slice_spec)
    else:
        base = base_factory(slice_spec)
        if validate:
            got = reconstruct(slice_spec, base)
            want = nonoverlap_distribution(spec, sigma)
            for o, p in want.items():
                diff = got.prob(o) - p
                if abs(diff) > 1e-9:
                    raise ValueError("slice base does not reproduce the slice measure")
    S = spec.alphabet.size
    lookups = _pair_weight_tables(spec)
    one = Fraction(1) if spec.exact else 1.0
    idx = spec.alphabet.index
    sl = make_slice(spec, sigma)
    locs = _bond_locals(slice_spec, base)
    by_q: dict[tuple, object] = {}
    total = 0
    for vals in itertools.product(*sl.admissible):
        c1 = tuple(idx(v) for v in vals)
        w = _config_weight(c1, S, lookups, one)
        if w == 0:
            continue
        c2 = tuple(idx(s - v) for s, v in zip(sl.sigma, vals))
        w = w * _config_weight(c2, S, lookups, one)
        if w == 0:
            continue
        total += w
        qs = []
        for bb, (positions, vmaps, dims) in zip(base.bonds, locs):
            li = _local_of(c1, positions, vmaps, dims)
            sup = bb.support_weight(li)
            act = bb.active_weight(li)
            qs.append(act / sup)
        key = tuple(qs)
        by_q[key] = by_q.get(key, 0) + w
    patterns: dict[int, object] = {}
    for qs, w in by_q.items():
        _expand_pattern(qs, w, patterns)
    return total, patterns


def _expand_pattern(qs, weight, out, bond=0, mask=0):
    if weight == 0:
        return
    if bond == len(qs):
        out[mask] = out.get(mask, 0) + weight
        return
    q = qs[bond]
    if q != 0:
        _expand_pattern(qs, weight * q, out, bond + 1, mask | (1 << bond))
    one_minus = 1 - q
    if one_minus != 0:
        _expand_pattern(qs, weight * one_minus, out, bond + 1, mask)


def _iter_sigmas(spec: GibbsSpec):
    per_vertex = []
    for v in spec.region:
        dom = spec.domain_values(v)
        sums = sorted({a + b for a in dom for b in dom})
        per_vertex.append(sums)
    return itertools.product(*per_vertex)


def integrated_rc(
    spec: GibbsSpec,
    base_factory=None,
    validate: bool | None = None,
    max_total: int = 1 << 20,
    max_bonds: int = 20,
) -> IntegratedRC:
    """Integrated activity-pattern distribution over all overlap slices.

    base_factory maps a slice spec to its representation; None selects the
    nested-level default, which is symmetric under slice reflection by
    construction. Custom factories are validated against the slice measure
    unless validate=False.
    """
    n_bonds = len(effective_bonds(spec))
    if n_bonds > max_bonds:
        raise TooLargeError(f"{n_bonds} bonds exceeds pattern cap {max_bonds}")
    nst = spec.n_states()
    if nst * nst > max_total:
        raise TooLargeError(f"{nst}^2 two-copy states exceeds cap {max_total}")
    if validate is None:
        validate = base_factory is not None
    if (
        base_factory is None
        and spec.full_binary()
        and not spec.exact
        and nst > 1 << 6
    ):
        return _integrated_rc_binary(spec)
    bond_vertices = None
    patterns: dict[int, object] = {}
    grand = 0
    for sigma in _iter_sigmas(spec):
        total, pats = _slice_pattern_terms(spec, sigma, base_factory, validate)
        if total == 0:
            continue
        grand += total
        for mask, w in pats.items():
            patterns[mask] = patterns.get(mask, 0) + w
        if bond_vertices is None:
            bond_vertices = tuple(eb.vertices for eb in effective_bonds(spec))
    if grand == 0:
        raise ZeroSliceError("zero measure")
    if spec.exact:
        patterns = {m: Fraction(w, 1) / grand for m, w in patterns.items()}
    else:
        patterns = {m: w / grand for m, w in patterns.items()}
    return IntegratedRC(
        spec.graph.n_vertices,
        bond_vertices or tuple(eb.vertices for eb in effective_bonds(spec)),
        patterns,
        spec.exact,
    )


def slice_connection_prob(
    spec: GibbsSpec, sigma, A, B, base_factory=None, validate: bool | None = None
):
    """Probability of the active connection event inside one overlap slice."""
    if validate is None:
        validate = base_factory is not None
    total, pats = _slice_pattern_terms(spec, tuple(sigma), base_factory, validate)
    if total == 0:
        raise ZeroSliceError("overlap configuration has probability zero")
    bond_vertices = tuple(eb.vertices for eb in effective_bonds(spec))
    acc = 0
    for mask, w in pats.items():
        if regions_connected(spec.graph.n_vertices, bond_vertices, mask, A, B):
            acc += w
    return acc / total


def sigma_connection_profile(
    spec: GibbsSpec,
    A,
    B,
    base_factory=None,
    validate: bool | None = None,
    max_total: int = 1 << 20,
):
    """Per-slice connection probabilities with their overlap weights.

    Returns (rows, pbar) where rows list (sigma, rho, conn prob given
    sigma) over slices of positive weight and pbar is the integrated
    connection probability.
    """
    if validate is None:
        validate = base_factory is not None
    nst = spec.n_states()
    if nst * nst > max_total:
        raise TooLargeError(f"{nst}^2 two-copy states exceeds cap {max_total}")
    bond_vertices = tuple(eb.vertices for eb in effective_bonds(spec))
    rows = []
    grand = 0
    acc = 0
    conn_cache: dict[int, bool] = {}
    for sigma in _iter_sigmas(spec):
        total, pats = _slice_pattern_terms(spec, sigma, base_factory, validate)
        if total == 0:
            continue
        grand += total
        num = 0
        for mask, w in pats.items():
            ok = conn_cache.get(mask)
            if ok is None:
                ok = regions_connected(spec.graph.n_vertices, bond_vertices, mask, A, B)
                conn_cache[mask] = ok
            if ok:
                num += w
        rows.append((sigma, total, num / total))
        acc += num
    if grand == 0:
        raise ZeroSliceError("zero measure")
    rows = [(s, t / grand, p) for s, t, p in rows]
    return rows, acc / grand


# ---------------------------------------------------------------------------
# Vectorized path for binary float specs with the default base


def _binary_q_table(table, n_coords):
    """q[(x1, x2)] over full binary local pairs for one effective bond.

    q is the active-coin probability of the slice the pair induces: one
    minus the ratio of the slice's minimal factor to the pair's factor.
    """
    n_local = 1 << n_coords
    q = np.zeros((n_local, n_local))
    for x1 in range(n_local):
        for x2 in range(n_local):
            f = float(table[x1]) * float(table[x2])
            if f <= 0:
                continue
            free = [
                n_coords - 1 - c
                for c in range(n_coords)
                if ((x1 >> (n_coords - 1 - c)) & 1) != ((x2 >> (n_coords - 1 - c)) & 1)
            ]
            fmin = f
            for sub in range(1 << len(free)):
                y1 = x1
                y2 = x2
                for t, bitpos in enumerate(free):
                    if (sub >> t) & 1:
                        y1 ^= 1 << bitpos
                        y2 ^= 1 << bitpos
                g = float(table[y1]) * float(table[y2])
                if g < fmin:
                    fmin = g
            q[x1, x2] = 1.0 - fmin / f
    return q


def _integrated_rc_binary(spec: GibbsSpec, max_work: int = 1 << 26) -> IntegratedRC:
    from .gibbs import _packed_weights_binary

    bonds = effective_bonds(spec)
    B = len(bonds)
    n = len(spec.region)
    N = 1 << n
    if N * N * (1 << B) > max_work * 8:
        raise TooLargeError("pattern tensor too large for the vectorized path")
    w = _packed_weights_binary(spec, bonds)
    tot = w.sum()
    if tot <= 0:
        raise ZeroSliceError("zero measure")
    w = w / tot
    pos = {v: p for p, v in enumerate(spec.region)}
    idx = np.arange(N, dtype=np.int64)
    locals_per_bond = []
    qtabs = []
    for eb in bonds:
        positions = [pos[v] for v in eb.inside]
        li = np.zeros(N, dtype=np.int64)
        for p in positions:
            li = (li << 1) | ((idx >> p) & 1)
        locals_per_bond.append(li)
        qtabs.append(_binary_q_table(eb.table, len(positions)))
    patterns = np.zeros(1 << B)
    chunk = max(1, (max_work // 8) // max(1, N * (1 << B)) * 8)
    for lo in range(0, N, chunk):
        hi = min(lo + chunk, N)
        R = hi - lo
        W = (w[lo:hi, None] * w[None, :]).reshape(R * N)
        M = W[:, None]
        for b in range(B):
            qb = qtabs[b][
                locals_per_bond[b][lo:hi, None], locals_per_bond[b][None, :]
            ].reshape(R * N)
            coins = np.stack([1.0 - qb, qb], axis=1)  # (RN, 2)
            M = (M[:, :, None] * coins[:, None, :]).reshape(R * N, -1)
        patterns += M.sum(axis=0)
    pat_dict = {int(m): float(p) for m, p in enumerate(patterns) if p > 0}
    return IntegratedRC(
        spec.graph.n_vertices,
        tuple(eb.vertices for eb in bonds),
        pat_dict,
        False,
    )


# ---------------------------------------------------------------------------
# Finite-volume extremality diagnostic


def extremality_diagnostic(
    specs,
    A_region,
    epsilon: float,
    radii=None,
    base_factory=None,
    max_total: int = 1 << 20,
):
    """Tabulate connection decay from a region to nested shells.

    For each spec in an increasing family and each radius, computes the
    integrated probability of connecting A_region to the shell boundary
    and the overlap weight of slices whose connection probability is at
    most epsilon. Reports whether each finite-volume criterion holds. This
    is evidence at finite scales, not a proof of extremality.
    """
    A = frozenset(A_region)
    rows = []
    for spec in specs:
        graph = spec.graph
        rset = set(spec.region)
        if radii is None:
            rr = range(1, 9)
        else:
            rr = radii
        for r in rr:
            lam1 = frozenset(ball(graph, A, r)) & rset
            dlam1 = boundary_vertices(graph, lam1)
            if not dlam1:
                continue
            profile, pbar = sigma_connection_profile(
                spec, A, dlam1, base_factory=base_factory, max_total=max_total
            )
            p_eps = sum(rho for _, rho, p in profile if p <= epsilon)
            rows.append(
                {
                    "volume": len(spec.region),
                    "radius": r,
                    "shell_size": len(dlam1),
                    "connection_prob": float(pbar),
                    "condition_a": bool(pbar <= epsilon),
                    "p_eps": float(p_eps),
                    "condition_b": bool(p_eps >= 1 - epsilon),
                }
            )
    return rows
