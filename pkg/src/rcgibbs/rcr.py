"""Random-cluster representations: Bernoulli bases, level solvers, typed bases.

A base assigns to every bond a probability over subsets of its local
configuration space. The represented measure weights a spin configuration
by the product over bonds of the total probability of subsets containing
the local configuration. Subsets are bitmasks over the (possibly
domain-restricted) local configuration space; a bond value is "active"
when its subset is a strict subset of that space.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InfeasibleError, NonSymmetrizableError, TooLargeError
from .gibbs import (
    EffectiveBond,
    FiniteDistribution,
    GibbsSpec,
    effective_bonds,
    local_index,
)
from .rng import stream


# ---------------------------------------------------------------------------
# Level systems and Bernoulli solvers


@dataclass(frozen=True)
class LevelSystem:
    """Energy levels of one bond with candidate subsets.

    factors are the distinct Boltzmann factors in strictly decreasing
    order; level_masks[i] collects the local configurations at factor i;
    subsets are candidate bitmasks, each a union of whole levels.
    """

    factors: tuple
    level_masks: tuple[int, ...]
    subsets: tuple[int, ...]

    def __post_init__(self):
        k = len(self.factors)
        if k != len(self.level_masks) or k == 0:
            raise ValueError("factors and level masks must align")
        for a, b in zip(self.factors, self.factors[1:]):
            if not a > b:
                raise ValueError("levels must be strictly decreasing")
        if self.factors[-1] < 0:
            raise ValueError("negative level factor")
        for i, mi in enumerate(self.level_masks):
            if mi == 0:
                raise ValueError("empty level")
            for mj in self.level_masks[i + 1:]:
                if mi & mj:
                    raise ValueError("overlapping levels")
        union = 0
        for m in self.level_masks:
            union |= m
        for s in self.subsets:
            if s == 0:
                raise ValueError("empty candidate subset")
            if s & ~union:
                raise ValueError("subset leaves the configuration space")
            for m in self.level_masks:
                if s & m not in (0, m):
                    raise ValueError("candidate subset splits an energy level")

    def membership_matrix(self) -> np.ndarray:
        rows = []
        for m in self.level_masks:
            rows.append([1.0 if (s & m) == m else 0.0 for s in self.subsets])
        return np.asarray(rows)


@dataclass(frozen=True)
class BernoulliSolution:
    probs: tuple
    scale: float
    degenerate: bool
    residual: float


def monotone_probabilities(factors):
    """Closed-form base probabilities for nested level subsets.

    With strictly decreasing factors w1 > ... > wk >= 0 the i-th nested
    subset (levels 1..i) gets (w_i - w_{i+1}) / w_1, taking w_{k+1} = 0.
    Exact when the factors are rational.
    """
    factors = tuple(factors)
    for a, b in zip(factors, factors[1:]):
        if not a > b:
            raise ValueError("levels must be strictly decreasing")
    if factors[-1] < 0 or factors[0] <= 0:
        raise ValueError("factors must be nonnegative with positive top level")
    k = len(factors)
    probs = []
    for i in range(k):
        nxt = factors[i + 1] if i + 1 < k else 0
        probs.append((factors[i] - nxt) / factors[0])
    return tuple(probs)


def monotone_system(factors, level_masks) -> LevelSystem:
    subsets = []
    acc = 0
    for m in level_masks:
        acc |= m
        subsets.append(acc)
    return LevelSystem(tuple(factors), tuple(level_masks), tuple(subsets))


def _is_monotone_family(system: LevelSystem) -> bool:
    acc = 0
    if len(system.subsets) != len(system.level_masks):
        return False
    for m, s in zip(system.level_masks, system.subsets):
        acc |= m
        if s != acc:
            return False
    return True


def _solve_linear_base(A: np.ndarray, w: np.ndarray, tol: float):
    """Solve A p = c w, sum(p) = 1, p >= 0 with c a free scalar.

    Returns (p, c, degenerate) or raises InfeasibleError. Minimum-norm
    solution is preferred; an LP feasibility fallback handles the case
    where the minimum-norm point violates nonnegativity.
    """
    k, m = A.shape
    B = np.hstack([A, -w.reshape(-1, 1)])
    u, s, vt = np.linalg.svd(B)
    smax = s[0] if len(s) else 0.0
    cut = max(B.shape) * np.finfo(float).eps * max(smax, 1.0)
    rank = int(np.sum(s > cut))
    null = vt[rank:].T  # (m+1, d)
    d = null.shape[1]
    if d == 0:
        raise InfeasibleError("no exact solution to the level system")
    e = np.zeros(m + 1)
    e[:m] = 1.0
    r = e @ null
    if np.linalg.norm(r) < 1e-14:
        raise InfeasibleError("solutions cannot be normalized")
    alpha = r / float(r @ r)
    x = null @ alpha
    p, c = x[:m], float(x[m])
    degenerate = d > 1
    if p.min() < -tol:
        sol = _lp_feasible(B, m)
        if sol is None:
            raise InfeasibleError("no nonnegative normalized solution")
        p, c = sol[:m], float(sol[m])
        degenerate = True
    p = np.clip(p, 0.0, None)
    residual = float(np.max(np.abs(A @ p - c * w))) if k else 0.0
    scale = max(1.0, float(np.max(np.abs(w)))) if k else 1.0
    if residual > tol * scale:
        raise InfeasibleError(f"residual {residual} exceeds tolerance")
    return p, c, degenerate


def _lp_feasible(B: np.ndarray, m: int):
    from scipy.optimize import linprog

    k = B.shape[0]
    A_eq = np.vstack([B, np.concatenate([np.ones(m), [0.0]])])
    b_eq = np.concatenate([np.zeros(k), [1.0]])
    bounds = [(0, None)] * m + [(None, None)]
    res = linprog(np.zeros(m + 1), A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    return res.x if res.success else None


def solve_bernoulli(system: LevelSystem, tol: float = 1e-10) -> BernoulliSolution:
    """Base probabilities for one bond from its level system.

    The monotone family short-circuits to the exact closed form. General
    candidate families are solved numerically as a one-parameter linear
    feasibility problem; rank-deficient systems return the minimum-norm
    solution flagged as degenerate.
    """
    if _is_monotone_family(system):
        probs = monotone_probabilities(system.factors)
        scale = 1 / system.factors[0]
        return BernoulliSolution(probs, float(scale), False, 0.0)
    A = system.membership_matrix()
    w = np.asarray([float(f) for f in system.factors])
    p, c, degenerate = _solve_linear_base(A, w, tol)
    residual = float(np.max(np.abs(A @ p - c * w)))
    return BernoulliSolution(tuple(float(x) for x in p), c, degenerate, residual)


# ---------------------------------------------------------------------------
# Bases over a spec's bonds


@dataclass(frozen=True, eq=False)
class BondBase:
    """Subset probabilities for one bond over its restricted local space.

    dims[i] is the domain size of inside vertex i; a slice-local index is
    big-endian over dims. value_lists[i] maps domain position to alphabet
    value index. subsets are bitmasks over prod(dims) local configurations.
    """

    vertices: tuple[int, ...]
    inside: tuple[int, ...]
    dims: tuple[int, ...]
    value_lists: tuple[tuple[int, ...], ...]
    subsets: tuple[int, ...]
    probs: tuple
    levels: tuple | None = None
    level_masks: tuple[int, ...] | None = None

    @property
    def n_local(self) -> int:
        n = 1
        for d in self.dims:
            n *= d
        return n

    @property
    def full_mask(self) -> int:
        return (1 << self.n_local) - 1

    def value_maps(self):
        return [
            {vi: pos for pos, vi in enumerate(vl)} for vl in self.value_lists
        ]

    def support_weight(self, local: int):
        """Total probability of subsets containing the local configuration."""
        acc = 0
        for s, p in zip(self.subsets, self.probs):
            if (s >> local) & 1:
                acc += p
        return acc

    def active_weight(self, local: int):
        """Probability of active subsets containing the configuration."""
        full = self.full_mask
        acc = 0
        for s, p in zip(self.subsets, self.probs):
            if s != full and (s >> local) & 1:
                acc += p
        return acc


@dataclass(frozen=True, eq=False)
class RcrBase:
    bonds: tuple[BondBase, ...]
    n_vertices: int
    exact: bool


def slice_local_factors(spec: GibbsSpec, eb: EffectiveBond):
    """Factors of an effective bond over the domain-restricted local space.

    Returns (dims, value_lists, factors) with factors in slice-local order.
    """
    S = spec.alphabet.size
    value_lists = tuple(spec.domain_indices(v) for v in eb.inside)
    dims = tuple(len(vl) for vl in value_lists)
    factors = []
    for combo in itertools.product(*value_lists):
        factors.append(eb.table[local_index(S, combo)])
    return dims, value_lists, tuple(factors)


def bond_level_system(factors) -> tuple[tuple, tuple[int, ...]]:
    """Distinct factors in decreasing order with their config bitmasks."""
    distinct = sorted(set(factors), reverse=True)
    masks = []
    for f in distinct:
        m = 0
        for i, g in enumerate(factors):
            if g == f:
                m |= 1 << i
        masks.append(m)
    return tuple(distinct), tuple(masks)


def monotone_base(spec: GibbsSpec) -> RcrBase:
    """Bernoulli base with nested level subsets for every effective bond.

    This is the default representation: the i-th candidate subset keeps
    the configurations in the top i energy levels, with the closed-form
    probabilities of monotone_probabilities. Exact for rational factors.
    For domain-restricted specs the subsets live on the restricted space,
    so a bond inside the pinned region has a single level and is never
    active.
    """
    bonds = []
    for eb in effective_bonds(spec):
        dims, value_lists, factors = slice_local_factors(spec, eb)
        levels, level_masks = bond_level_system(factors)
        if levels[0] <= 0:
            raise ValueError(f"bond {eb.index} forbids every restricted configuration")
        probs = monotone_probabilities(levels)
        subsets = []
        acc = 0
        for m in level_masks:
            acc |= m
            subsets.append(acc)
        bonds.append(
            BondBase(
                vertices=eb.vertices,
                inside=eb.inside,
                dims=dims,
                value_lists=value_lists,
                subsets=tuple(subsets),
                probs=probs,
                levels=levels,
                level_masks=level_masks,
            )
        )
    return RcrBase(tuple(bonds), spec.graph.n_vertices, spec.exact)


def _iter_configs(spec: GibbsSpec):
    dom = [spec.domain_indices(v) for v in spec.region]
    return itertools.product(*dom)


def _bond_locals(spec: GibbsSpec, base: RcrBase):
    """Per bond: (region positions of inside vertices, domain position maps)."""
    pos = {v: p for p, v in enumerate(spec.region)}
    out = []
    for bb in base.bonds:
        positions = tuple(pos[v] for v in bb.inside)
        out.append((positions, bb.value_maps(), bb.dims))
    return out


def _local_of(cfg, positions, vmaps, dims):
    li = 0
    for p, vm, d in zip(positions, vmaps, dims):
        li = li * d + vm[cfg[p]]
    return li


def reconstruct(spec: GibbsSpec, base: RcrBase, max_states: int = 1 << 20) -> FiniteDistribution:
    """Spin distribution represented by the base.

    The weight of a configuration is the product over bonds of the total
    base probability of subsets containing it; this must reproduce the
    underlying Gibbs measure for a valid representation.
    """
    nst = spec.n_states()
    if nst > max_states:
        raise TooLargeError(f"{nst} states exceeds cap {max_states}")
    locs = _bond_locals(spec, base)
    vals = spec.alphabet.values
    one = Fraction(1) if (spec.exact and base.exact) else 1.0
    table = {}
    for cfg in _iter_configs(spec):
        w = one
        for bb, (positions, vmaps, dims) in zip(base.bonds, locs):
            w = w * bb.support_weight(_local_of(cfg, positions, vmaps, dims))
            if w == 0:
                break
        table[tuple(vals[i] for i in cfg)] = w
    return FiniteDistribution(table, sites=spec.region, normalize=True)


def _compat_bitsets(spec: GibbsSpec, base: RcrBase, max_states: int):
    """Per bond, per subset: bitset over configurations compatible with it."""
    nst = spec.n_states()
    if nst > max_states:
        raise TooLargeError(f"{nst} states exceeds cap {max_states}")
    locs = _bond_locals(spec, base)
    bitsets = []
    for bb, (positions, vmaps, dims) in zip(base.bonds, locs):
        per_subset = [0] * len(bb.subsets)
        for ci, cfg in enumerate(_iter_configs(spec)):
            li = _local_of(cfg, positions, vmaps, dims)
            for j, s in enumerate(bb.subsets):
                if (s >> li) & 1:
                    per_subset[j] |= 1 << ci
        bitsets.append(per_subset)
    return bitsets, nst


def assignment_measure(
    spec: GibbsSpec,
    base: RcrBase,
    max_states: int = 1 << 16,
    max_assignments: int = 10**7,
):
    """Unnormalized weights nu(eta) * n_eta over full bond assignments.

    n_eta counts spin configurations compatible with every bond subset.
    Yields (assignment tuple, nu, n) for assignments with nu > 0.
    """
    n_assign = 1
    for bb in base.bonds:
        n_assign *= len(bb.subsets)
    if n_assign > max_assignments:
        raise TooLargeError(f"{n_assign} assignments exceeds cap {max_assignments}")
    bitsets, nst = _compat_bitsets(spec, base, max_states)
    full = (1 << nst) - 1
    B = len(base.bonds)
    out = []

    def rec(i, assign, nu, bits):
        if nu == 0:
            return
        if i == B:
            out.append((tuple(assign), nu, bits.bit_count()))
            return
        bb = base.bonds[i]
        for j, p in enumerate(bb.probs):
            assign.append(j)
            rec(i + 1, assign, nu * p, bits & bitsets[i][j])
            assign.pop()

    rec(0, [], Fraction(1) if base.exact else 1.0, full)
    return out


def joint_spin_bond(
    spec: GibbsSpec,
    base: RcrBase,
    max_states: int = 1 << 12,
    max_assignments: int = 10**6,
) -> FiniteDistribution:
    """Joint law of spin configuration and bond assignment.

    Outcomes are (value tuple, assignment tuple) pairs supported on
    compatible combinations; the spin marginal recovers the represented
    measure.
    """
    locs = _bond_locals(spec, base)
    vals = spec.alphabet.values
    nst = spec.n_states()
    if nst > max_states:
        raise TooLargeError(f"{nst} states exceeds cap {max_states}")
    n_assign = 1
    for bb in base.bonds:
        n_assign *= len(bb.subsets)
    if nst * n_assign > max_assignments:
        raise TooLargeError("joint support exceeds cap")
    table: dict = {}
    for cfg in _iter_configs(spec):
        locals_per_bond = [
            _local_of(cfg, positions, vmaps, dims)
            for (positions, vmaps, dims) in locs
        ]
        outcome_cfg = tuple(vals[i] for i in cfg)
        for assign in itertools.product(
            *[range(len(bb.subsets)) for bb in base.bonds]
        ):
            nu = Fraction(1) if base.exact else 1.0
            ok = True
            for bb, j, li in zip(base.bonds, assign, locals_per_bond):
                if not (bb.subsets[j] >> li) & 1:
                    ok = False
                    break
                nu *= bb.probs[j]
            if ok and nu != 0:
                table[(outcome_cfg, assign)] = nu
    if not table:
        raise ValueError("no compatible spin-bond pair")
    return FiniteDistribution(table, normalize=True)


def bond_marginal(
    spec: GibbsSpec,
    base: RcrBase,
    max_states: int = 1 << 16,
    max_assignments: int = 10**7,
) -> FiniteDistribution:
    """Marginal of the joint spin-bond distribution on bond assignments.

    P(eta) is proportional to nu(eta) times the number of compatible spin
    configurations. Outcomes are tuples of subset indices, one per bond in
    base order.
    """
    table = {}
    for assign, nu, n in assignment_measure(spec, base, max_states, max_assignments):
        if n:
            table[assign] = table.get(assign, 0) + nu * n
    if not table:
        raise ValueError("no compatible spin configuration for any assignment")
    return FiniteDistribution(table, normalize=True)


def symmetrize_base(spec: GibbsSpec, base: RcrBase, sigma) -> RcrBase:
    """Average each bond's subset law with its reflection through sigma.

    The reflected subset maps each local configuration to the one whose
    values are sigma minus the original values. Rejects bases whose
    reflected subsets leave the restricted space or split energy levels.
    """
    sig_by_vertex = dict(zip(spec.region, sigma))
    vals = spec.alphabet.values
    idx = spec.alphabet.index
    new_bonds = []
    for bb in base.bonds:
        maps = bb.value_maps()
        perm = []
        for combo in itertools.product(*[range(d) for d in bb.dims]):
            refl = 0
            for v, pos_in_dom, vl, vm, d in zip(
                bb.inside, combo, bb.value_lists, maps, bb.dims
            ):
                value = vals[vl[pos_in_dom]]
                rv = sig_by_vertex[v] - value
                if rv not in vals or idx(rv) not in vm:
                    raise NonSymmetrizableError(
                        f"reflection leaves the restricted space at vertex {v}"
                    )
                refl = refl * d + vm[idx(rv)]
            perm.append(refl)

        def refl_mask(mask):
            out = 0
            for i, target in enumerate(perm):
                if (mask >> i) & 1:
                    out |= 1 << target
            return out

        half = Fraction(1, 2) if base.exact else 0.5
        acc: dict[int, object] = {}
        for s, p in zip(bb.subsets, bb.probs):
            r = refl_mask(s)
            acc[s] = acc.get(s, 0) + p * half
            acc[r] = acc.get(r, 0) + p * half
        if bb.level_masks is not None:
            for s in acc:
                for m in bb.level_masks:
                    if s & m not in (0, m):
                        raise NonSymmetrizableError(
                            "reflected subset splits an energy level"
                        )
        subsets = tuple(sorted(acc))
        probs = tuple(acc[s] for s in subsets)
        new_bonds.append(
            BondBase(
                vertices=bb.vertices,
                inside=bb.inside,
                dims=bb.dims,
                value_lists=bb.value_lists,
                subsets=subsets,
                probs=probs,
                levels=bb.levels,
                level_masks=bb.level_masks,
            )
        )
    return RcrBase(tuple(new_bonds), base.n_vertices, base.exact)


# ---------------------------------------------------------------------------
# Typed (two-family) bases


@dataclass(frozen=True, eq=False)
class TypedBondBase:
    vertices: tuple[int, ...]
    inside: tuple[int, ...]
    dims: tuple[int, ...]
    value_lists: tuple[tuple[int, ...], ...]
    subsets_a: tuple[int, ...]
    probs_a: tuple
    subsets_b: tuple[int, ...]
    probs_b: tuple

    @property
    def n_local(self) -> int:
        n = 1
        for d in self.dims:
            n *= d
        return n

    @property
    def full_mask(self) -> int:
        return (1 << self.n_local) - 1

    def value_maps(self):
        return [{vi: pos for pos, vi in enumerate(vl)} for vl in self.value_lists]


@dataclass(frozen=True, eq=False)
class TypedRcrBase:
    bonds: tuple[TypedBondBase, ...]
    n_vertices: int
    exact: bool


def mns_base(spec: GibbsSpec):
    """Blue/red two-family base for two independent copies of a pair model.

    Takes the single-copy spec (pair bonds with two symmetric energy
    levels each, as in a +-J model) and returns (typed base, product spec).
    Blue values keep the top level of the paired bond (both copies agree
    with the coupling) with probability 1 - w3/w1; red values keep the
    middle level (copies disagree with each other) with probability
    1 - w3/w2, where w1 > w2 > w3 are the paired Boltzmann factors.
    """
    from .twocopy import two_copy_spec

    spec2 = two_copy_spec(spec)
    bonds = []
    for eb in effective_bonds(spec2):
        dims, value_lists, factors = slice_local_factors(spec2, eb)
        levels, masks = bond_level_system(factors)
        if len(levels) != 3:
            raise ValueError(
                f"bond {eb.index}: paired bond needs exactly 3 energy levels, "
                f"got {len(levels)} (is the coupling zero?)"
            )
        w1, w2, w3 = levels
        full = (1 << len(factors)) - 1
        p_blue = 1 - w3 / w1
        p_red = 1 - w3 / w2
        bonds.append(
            TypedBondBase(
                vertices=eb.vertices,
                inside=eb.inside,
                dims=dims,
                value_lists=value_lists,
                subsets_a=(masks[0], full),
                probs_a=(p_blue, 1 - p_blue),
                subsets_b=(masks[1], full),
                probs_b=(p_red, 1 - p_red),
            )
        )
    return TypedRcrBase(tuple(bonds), spec2.graph.n_vertices, spec2.exact), spec2


def typed_reconstruct(
    spec2: GibbsSpec, base: TypedRcrBase, max_states: int = 1 << 20
) -> FiniteDistribution:
    """Spin distribution represented by a two-family base."""
    nst = spec2.n_states()
    if nst > max_states:
        raise TooLargeError(f"{nst} states exceeds cap {max_states}")
    pos = {v: p for p, v in enumerate(spec2.region)}
    locs = []
    for bb in base.bonds:
        locs.append((tuple(pos[v] for v in bb.inside), bb.value_maps(), bb.dims))
    vals = spec2.alphabet.values
    one = Fraction(1) if (spec2.exact and base.exact) else 1.0
    table = {}
    for cfg in _iter_configs(spec2):
        w = one
        for bb, (positions, vmaps, dims) in zip(base.bonds, locs):
            li = _local_of(cfg, positions, vmaps, dims)
            sa = sum(p for s, p in zip(bb.subsets_a, bb.probs_a) if (s >> li) & 1)
            sb = sum(p for s, p in zip(bb.subsets_b, bb.probs_b) if (s >> li) & 1)
            w = w * sa * sb
            if w == 0:
                break
        table[tuple(vals[i] for i in cfg)] = w
    return FiniteDistribution(table, sites=spec2.region, normalize=True)


def typed_joint(
    spec2: GibbsSpec,
    base: TypedRcrBase,
    max_states: int = 1 << 16,
    max_assignments: int = 10**7,
) -> FiniteDistribution:
    """Joint law of the two bond-variable families, spins summed out.

    Outcomes are tuples of (alpha subset index, beta subset index) per
    bond; the weight of an assignment is its base probability times the
    number of spin configurations compatible with both families.
    """
    n_assign = 1
    for bb in base.bonds:
        n_assign *= len(bb.subsets_a) * len(bb.subsets_b)
    if n_assign > max_assignments:
        raise TooLargeError(f"{n_assign} assignments exceeds cap {max_assignments}")
    nst = spec2.n_states()
    if nst > max_states:
        raise TooLargeError(f"{nst} states exceeds cap {max_states}")
    pos = {v: p for p, v in enumerate(spec2.region)}
    bits = []
    for bb in base.bonds:
        positions = tuple(pos[v] for v in bb.inside)
        vmaps, dims = bb.value_maps(), bb.dims
        per_a = [0] * len(bb.subsets_a)
        per_b = [0] * len(bb.subsets_b)
        for ci, cfg in enumerate(_iter_configs(spec2)):
            li = _local_of(cfg, positions, vmaps, dims)
            for j, s in enumerate(bb.subsets_a):
                if (s >> li) & 1:
                    per_a[j] |= 1 << ci
            for j, s in enumerate(bb.subsets_b):
                if (s >> li) & 1:
                    per_b[j] |= 1 << ci
        bits.append((per_a, per_b))
    full = (1 << nst) - 1
    B = len(base.bonds)
    table: dict = {}

    def rec(i, assign, nu, acc):
        if nu == 0:
            return
        if i == B:
            n = acc.bit_count()
            if n:
                table[tuple(assign)] = table.get(tuple(assign), 0) + nu * n
            return
        bb = base.bonds[i]
        per_a, per_b = bits[i]
        for ja, pa in enumerate(bb.probs_a):
            for jb, pb in enumerate(bb.probs_b):
                assign.append((ja, jb))
                rec(i + 1, assign, nu * pa * pb, acc & per_a[ja] & per_b[jb])
                assign.pop()

    rec(0, [], Fraction(1) if base.exact else 1.0, full)
    if not table:
        raise ValueError("no compatible spin configuration for any assignment")
    return FiniteDistribution(table, normalize=True)


@dataclass(frozen=True)
class TypedSolution:
    probs_a: tuple
    probs_b: tuple
    scale: float
    residual: float
    non_unique: bool


_MNS_A = ((1, 1), (0, 1), (0, 1))
_MNS_B = ((0, 1), (1, 1), (0, 1))


def solve_typed(
    factors,
    A_alpha,
    A_beta,
    tol: float = 1e-10,
    max_iter: int = 100,
    restarts: int = 8,
    seed: int = 0,
    zero_alpha=(),
    zero_beta=(),
) -> TypedSolution:
    """Nonnegative normalized solution of the bilinear two-family system.

    Solves [A_alpha p_a]_k [A_beta p_b]_k = c * w_k with both probability
    vectors summing to 1. The blue/red membership pattern short-circuits
    to its closed form; otherwise alternating nonnegative least squares
    with random restarts is used and the final residual is checked against
    tol. zero_alpha / zero_beta force the listed probability entries to 0
    (extra constraints beyond the membership pattern).
    """
    if zero_alpha or zero_beta:
        return _solve_typed_forced(
            factors, A_alpha, A_beta, zero_alpha, zero_beta, tol, max_iter, restarts, seed
        )
    w = np.asarray([float(f) for f in factors])
    Aa = np.asarray(A_alpha, dtype=float)
    Ab = np.asarray(A_beta, dtype=float)
    k = len(w)
    if Aa.shape[0] != k or Ab.shape[0] != k:
        raise ValueError("membership matrices must have one row per level")

    if (
        k == 3
        and Aa.shape == (3, 2)
        and Ab.shape == (3, 2)
        and tuple(map(tuple, Aa.astype(int))) == _MNS_A
        and tuple(map(tuple, Ab.astype(int))) == _MNS_B
        and w[2] > 0
    ):
        p2a = w[2] / w[0]
        p2b = w[2] / w[1]
        if 0 <= p2a <= 1 and 0 <= p2b <= 1:
            c = w[2] / (w[0] * w[1])
            pa = (1 - p2a, p2a)
            pb = (1 - p2b, p2b)
            res = _bilinear_residual(Aa, Ab, np.asarray(pa), np.asarray(pb), c, w)
            return TypedSolution(pa, pb, c, res, False)

    non_unique = bool(
        np.linalg.matrix_rank(Aa) < Aa.shape[1] or np.linalg.matrix_rank(Ab) < Ab.shape[1]
    )
    scale = max(1.0, float(np.max(np.abs(w))))
    best = None
    for attempt in range(restarts):
        rng = stream(seed, 90, attempt)
        pb = rng.random(Ab.shape[1])
        pb /= pb.sum()
        for _ in range(max_iter):
            pa = _nnls_half_step(Aa, Ab @ pb, w)
            if pa is None:
                break
            pb_new = _nnls_half_step(Ab, Aa @ pa, w)
            if pb_new is None:
                break
            pb = pb_new
            g = (Aa @ pa) * (Ab @ pb)
            c = float(g @ w / (w @ w))
            res = float(np.max(np.abs(g - c * w)))
            if best is None or res < best[0]:
                best = (res, pa, pb, c)
            if res <= tol * scale:
                return TypedSolution(
                    tuple(map(float, pa)), tuple(map(float, pb)), c, res, non_unique
                )
    if best is not None and best[0] <= 1e-8 * scale:
        res, pa, pb, c = best
        return TypedSolution(
            tuple(map(float, pa)), tuple(map(float, pb)), float(c), res, True
        )
    raise InfeasibleError("no nonnegative normalized solution found")


def _solve_typed_forced(
    factors, A_alpha, A_beta, zero_alpha, zero_beta, tol, max_iter, restarts, seed
) -> TypedSolution:
    """Zero-forced entries are dropped, solved, and re-expanded."""
    Aa = np.asarray(A_alpha, dtype=float)
    Ab = np.asarray(A_beta, dtype=float)
    keep_a = [j for j in range(Aa.shape[1]) if j not in set(zero_alpha)]
    keep_b = [j for j in range(Ab.shape[1]) if j not in set(zero_beta)]
    if not keep_a or not keep_b:
        raise InfeasibleError("every candidate is forced to zero")
    sub = solve_typed(
        factors, Aa[:, keep_a], Ab[:, keep_b],
        tol=tol, max_iter=max_iter, restarts=restarts, seed=seed,
    )
    pa = [0.0] * Aa.shape[1]
    for j, p in zip(keep_a, sub.probs_a):
        pa[j] = p
    pb = [0.0] * Ab.shape[1]
    for j, p in zip(keep_b, sub.probs_b):
        pb[j] = p
    return TypedSolution(tuple(pa), tuple(pb), sub.scale, sub.residual, sub.non_unique)


def _nnls_half_step(A: np.ndarray, other: np.ndarray, w: np.ndarray):
    """Best nonnegative normalized p with A p * other proportional to w.

    Rows where the partner family vanishes are consistent only with a
    vanishing target; the scale is refit afterwards, so the step solves a
    plain nonnegative least-squares on the surviving rows.
    """
    from scipy.optimize import nnls

    keep = np.abs(other) > 1e-13
    if np.any(~keep & (np.abs(w) > 1e-13)):
        return None
    A_red = A[keep]
    if A_red.shape[0] == 0:
        return np.full(A.shape[1], 1.0 / A.shape[1])
    t_red = w[keep] / other[keep]
    x, _ = nnls(A_red, t_red)
    s = x.sum()
    if s <= 0:
        return None
    return x / s


def _bilinear_residual(Aa, Ab, pa, pb, c, w) -> float:
    return float(np.max(np.abs((Aa @ pa) * (Ab @ pb) - c * w)))
