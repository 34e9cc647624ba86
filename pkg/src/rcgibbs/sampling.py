"""Generic single-site heat-bath sampling and Monte Carlo connection estimates.

The Monte Carlo path for the integrated connection probability samples two
independent copies, reads off the overlap assignment, and flips the
slice's conditional activity coin per bond: one minus the ratio of the
slice-minimal symmetrized factor to the pair's factor. Work is split into
a fixed number of tasks with counter-based streams, so estimates are
deterministic for any thread count.
"""

from __future__ import annotations

import itertools
import math

from .errors import UsageError
from .gibbs import GibbsSpec, effective_bonds
from .percolation import regions_connected
from .rng import run_tasks, stream


def _site_conditionals(spec: GibbsSpec):
    """Per region vertex: incident effective bonds with lookup metadata."""
    S = spec.alphabet.size
    bonds = effective_bonds(spec)
    by_vertex = {v: [] for v in spec.region}
    for eb in bonds:
        for v in eb.inside:
            by_vertex[v].append(eb)
    return by_vertex


def heat_bath_chain(spec: GibbsSpec, rng, n_sweeps: int, state=None):
    """Run single-site heat-bath sweeps; returns the configuration as a
    vertex -> value-index dict."""
    S = spec.alphabet.size
    by_vertex = _site_conditionals(spec)
    doms = {v: spec.domain_indices(v) for v in spec.region}
    if state is None:
        state = {
            v: doms[v][int(rng.integers(0, len(doms[v])))] for v in spec.region
        }
    for _ in range(n_sweeps):
        for v in spec.region:
            weights = []
            for vi in doms[v]:
                w = 1.0
                for eb in by_vertex[v]:
                    li = 0
                    for u in eb.inside:
                        li = li * S + (vi if u == v else state[u])
                    w *= float(eb.table[li])
                weights.append(w)
            tot = sum(weights)
            if tot <= 0:
                continue  # frozen site under current neighbors
            u01 = rng.random() * tot
            acc = 0.0
            for vi, w in zip(doms[v], weights):
                acc += w
                if u01 <= acc:
                    state[v] = vi
                    break
    return state


def _pair_activity_coin(spec, eb, cache, x1_vals, x2_vals):
    """Activity probability of one bond given both copies' local values."""
    key = (eb.index, x1_vals, x2_vals)
    q = cache.get(key)
    if q is not None:
        return q
    S = spec.alphabet.size
    idx = spec.alphabet.index
    vals = spec.alphabet.values
    sig = tuple(a + b for a, b in zip(x1_vals, x2_vals))
    adm = []
    for v, s in zip(eb.inside, sig):
        dom = spec.domain_values(v)
        domset = set(dom)
        adm.append(tuple(a for a in dom if s - a in domset))
    own = None
    fmin = None
    for combo in itertools.product(*adm):
        refl = tuple(s - a for s, a in zip(sig, combo))
        li1 = 0
        li2 = 0
        for a, b in zip(combo, refl):
            li1 = li1 * S + idx(a)
            li2 = li2 * S + idx(b)
        f = float(eb.table[li1]) * float(eb.table[li2])
        if fmin is None or f < fmin:
            fmin = f
        if combo == x1_vals:
            own = f
    q = 0.0 if not own else 1.0 - fmin / own
    cache[key] = q
    return q


def mc_connection_probability(
    spec: GibbsSpec,
    A,
    B,
    n_samples: int,
    seed: int,
    burn_in: int = 300,
    gap: int = 2,
    n_tasks: int = 8,
    threads: int = 1,
) -> dict:
    """Monte Carlo estimate of the integrated connection probability.

    Two independent heat-bath chains provide the copy pair; each sampled
    pair contributes one Bernoulli connection indicator after per-bond
    activity coins. The standard error is binomial over all samples
    (chains are thinned by `gap` sweeps).
    """
    if n_samples < 1:
        raise UsageError("n_samples must be positive")
    bonds = effective_bonds(spec)
    bond_vertices = tuple(eb.vertices for eb in bonds)
    A = frozenset(A)
    B = frozenset(B)
    vals = spec.alphabet.values
    per_task = -(-n_samples // n_tasks)

    def task(t):
        rng1 = stream(seed, 300, t, 0)
        rng2 = stream(seed, 300, t, 1)
        rngc = stream(seed, 300, t, 2)
        s1 = heat_bath_chain(spec, rng1, burn_in)
        s2 = heat_bath_chain(spec, rng2, burn_in)
        cache: dict = {}
        hits = 0
        n_done = 0
        for _ in range(per_task):
            s1 = heat_bath_chain(spec, rng1, gap, s1)
            s2 = heat_bath_chain(spec, rng2, gap, s2)
            mask = 0
            for j, eb in enumerate(bonds):
                x1 = tuple(vals[s1[v]] for v in eb.inside)
                x2 = tuple(vals[s2[v]] for v in eb.inside)
                q = _pair_activity_coin(spec, eb, cache, x1, x2)
                if q > 0 and rngc.random() < q:
                    mask |= 1 << j
            if regions_connected(spec.graph.n_vertices, bond_vertices, mask, A, B):
                hits += 1
            n_done += 1
        return hits, n_done

    results = run_tasks(task, list(range(n_tasks)), threads=threads)
    hits = sum(h for h, _ in results)
    n = sum(c for _, c in results)
    p = hits / n
    se = math.sqrt(max(p * (1 - p), 1e-300) / n)
    return {"estimate": p, "stderr": se, "n_samples": n, "seed": seed}
