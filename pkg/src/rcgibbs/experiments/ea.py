"""Quenched +-J glass on a square box: two-copy sampling and blue/red bonds.

Two independent heat-bath chains sample the quenched model; given the pair
of configurations, blue bonds appear on bonds satisfied by both copies
with probability 1 - exp(-4|K|) and red bonds where the copies' bond
products disagree with probability 1 - exp(-2|K|). Cluster statistics of
blue bonds are taken inside the non-overlap (disagreement) region.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..lattice import build_grid
from ..models import ising_spec
from ..rng import run_tasks, stream


@dataclass(frozen=True)
class QuenchedCouplings:
    """One +-J disorder realization on an L x L box.

    horizontal[y, x] couples (x, y)-(x+1, y); vertical[y, x] couples
    (x, y)-(x, y+1); wrap couplings are zeroed for open boundaries.
    """

    L: int
    J: float
    periodic: bool
    seed: int
    horizontal: np.ndarray
    vertical: np.ndarray


def quenched_couplings(L: int, J: float, seed: int, periodic: bool = False) -> QuenchedCouplings:
    if L < 2 or L > 256:
        raise ValueError("L must be between 2 and 256")
    rng = stream(seed, 11)
    h = (rng.integers(0, 2, (L, L)) * 2 - 1).astype(float) * J
    v = (rng.integers(0, 2, (L, L)) * 2 - 1).astype(float) * J
    if not periodic:
        h[:, L - 1] = 0.0
        v[L - 1, :] = 0.0
    h.setflags(write=False)
    v.setflags(write=False)
    return QuenchedCouplings(L, J, periodic, seed, h, v)


def coupling_list(qc: QuenchedCouplings, beta_scale: float = 1.0):
    """Couplings aligned with build_grid's bond ordering.

    Returns (graph, [coupling per bond]) with zero-coupling entries absent
    (open-boundary wrap bonds are not in the graph at all).
    """
    g = build_grid(qc.L, qc.L, qc.periodic)
    L = qc.L
    lookup = {}
    for y in range(L):
        for x in range(L):
            if qc.horizontal[y, x] != 0.0:
                a, b = y * L + x, y * L + (x + 1) % L
                lookup[tuple(sorted((a, b)))] = beta_scale * qc.horizontal[y, x]
            if qc.vertical[y, x] != 0.0:
                a, b = y * L + x, ((y + 1) % L) * L + x
                lookup[tuple(sorted((a, b)))] = beta_scale * qc.vertical[y, x]
    return g, [lookup[b] for b in g.bonds]


def glass_spec(qc: QuenchedCouplings, beta_scale: float = 1.0):
    g, Js = coupling_list(qc, beta_scale)
    return ising_spec(g, Js)


def _neighbor_field(s: np.ndarray, h: np.ndarray, v: np.ndarray) -> np.ndarray:
    h3 = h[None, :, :]
    v3 = v[None, :, :]
    return (
        h3 * np.roll(s, -1, axis=2)
        + np.roll(h3 * s, 1, axis=2)
        + v3 * np.roll(s, -1, axis=1)
        + np.roll(v3 * s, 1, axis=1)
    )


def heat_bath_sweeps(s, qc: QuenchedCouplings, beta: float, rng, n_sweeps: int):
    """Checkerboard single-site heat bath, in place; s has shape (R, L, L)."""
    L = qc.L
    yy, xx = np.mgrid[0:L, 0:L]
    masks = [((xx + yy) % 2 == par) for par in (0, 1)]
    for _ in range(n_sweeps):
        for mask in masks:
            f = beta * _neighbor_field(s, qc.horizontal, qc.vertical)
            p_plus = 1.0 / (1.0 + np.exp(-2.0 * f))
            u = rng.random(s.shape)
            flip = np.where(u < p_plus, 1, -1).astype(s.dtype)
            s[:, mask] = flip[:, mask]
    return s


def bond_energy(s, qc: QuenchedCouplings) -> np.ndarray:
    """Per-replica energy series entry (negative satisfied-coupling sum)."""
    e = -(qc.horizontal[None] * s * np.roll(s, -1, axis=2)).sum(axis=(1, 2))
    e -= (qc.vertical[None] * s * np.roll(s, -1, axis=1)).sum(axis=(1, 2))
    return e


def integrated_autocorr(x: np.ndarray) -> tuple[float, bool]:
    """Sokal-windowed integrated autocorrelation time of one series."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 8:
        return 1.0, False
    x = x - x.mean()
    var = float(np.dot(x, x)) / n
    if var == 0:
        return 1.0, True
    tau = 1.0
    converged = False
    for m in range(1, n // 2):
        rho = float(np.dot(x[:-m], x[m:])) / ((n - m) * var)
        tau += 2.0 * rho
        if m >= 6.0 * tau:
            converged = True
            break
    return max(tau, 1.0), converged


def sample_blue_red(s1, s2, qc: QuenchedCouplings, beta: float, rng):
    """Draw blue/red bond indicators given the two spin fields.

    Returns ((blue_h, blue_v), (red_h, red_v), no_mask); arrays match the
    coupling layout, entries on zero couplings are always False.
    """
    out_blue = []
    out_red = []
    r = s1 * s2
    for coup, axis in ((qc.horizontal, 2), (qc.vertical, 1)):
        K = beta * coup[None, :, :]
        absK = np.abs(K)
        sat1 = K * s1 * np.roll(s1, -1, axis=axis) > 0
        sat2 = K * s2 * np.roll(s2, -1, axis=axis) > 0
        blue_adm = sat1 & sat2
        p_blue = 1.0 - np.exp(-4.0 * absK)
        blue = blue_adm & (rng.random(s1.shape) < p_blue)
        red_adm = (r * np.roll(r, -1, axis=axis) < 0) & (absK > 0)
        p_red = 1.0 - np.exp(-2.0 * absK)
        red = red_adm & (rng.random(s1.shape) < p_red)
        out_blue.append((blue, blue_adm))
        out_red.append((red, red_adm))
    no_mask = s1 != s2
    return out_blue, out_red, no_mask


class WrapUnionFind:
    """Union-find on torus sites tracking displacements to detect wrapping."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.dx = [0] * n
        self.dy = [0] * n
        self.wrap_x = False
        self.wrap_y = False

    def find(self, v: int):
        path = []
        while self.parent[v] != v:
            path.append(v)
            v = self.parent[v]
        ox = oy = 0
        for u in reversed(path):
            ox += self.dx[u]
            oy += self.dy[u]
            self.parent[u] = v
            self.dx[u] = ox
            self.dy[u] = oy
        return v

    def union(self, a: int, b: int, dxab: int, dyab: int):
        ra = self.find(a)
        rb = self.find(b)
        if ra == rb:
            mx = self.dx[a] + dxab - self.dx[b]
            my = self.dy[a] + dyab - self.dy[b]
            if mx != 0:
                self.wrap_x = True
            if my != 0:
                self.wrap_y = True
            return
        # attach rb under ra: offset of rb chosen so b's position is consistent
        self.parent[rb] = ra
        self.dx[rb] = self.dx[a] + dxab - self.dx[b]
        self.dy[rb] = self.dy[a] + dyab - self.dy[b]


def _cluster_stats(bh, bv, site_mask, L: int, periodic: bool):
    """Cluster sizes of bonds restricted to masked sites, with crossings.

    bh[y, x] joins (x, y)-(x+1, y); bv joins (x, y)-(x, y+1); a bond
    counts only when both endpoints are masked.
    """
    keep_h = bh & site_mask & np.roll(site_mask, -1, axis=1)
    keep_v = bv & site_mask & np.roll(site_mask, -1, axis=0)
    uf = WrapUnionFind(L * L)
    for y, x in np.argwhere(keep_h):
        a = y * L + x
        b = y * L + (x + 1) % L
        uf.union(a, b, 1, 0)
    for y, x in np.argwhere(keep_v):
        a = y * L + x
        b = ((y + 1) % L) * L + x
        uf.union(a, b, 0, 1)
    sizes: dict[int, int] = {}
    covered = set()
    for y, x in np.argwhere(keep_h):
        covered.add(y * L + x)
        covered.add(y * L + (x + 1) % L)
    for y, x in np.argwhere(keep_v):
        covered.add(y * L + x)
        covered.add((((y + 1) % L)) * L + x)
    roots = {}
    for v in covered:
        roots[v] = uf.find(v)
        sizes[roots[v]] = sizes.get(roots[v], 0) + 1
    largest = max(sizes.values(), default=0)
    if periodic:
        cross_x, cross_y = uf.wrap_x, uf.wrap_y
    else:
        left = {roots[v] for v in covered if v % L == 0}
        right = {roots[v] for v in covered if v % L == L - 1}
        top = {roots[v] for v in covered if v // L == 0}
        bottom = {roots[v] for v in covered if v // L == L - 1}
        cross_x = bool(left & right)
        cross_y = bool(top & bottom)
    return largest, sorted(sizes.values(), reverse=True), cross_x, cross_y


def _one_disorder(args):
    (k, L, J, beta_scale, seed, n_sweeps, n_samples, periodic) = args
    qc = quenched_couplings(L, J, stream(seed, 7, k).integers(0, 2**31), periodic)
    rng1 = stream(seed, 100, k, 0)
    rng2 = stream(seed, 100, k, 1)
    rngb = stream(seed, 100, k, 2)
    R = max(1, min(32, n_samples))
    per = -(-n_samples // R)
    s1 = (rng1.integers(0, 2, (R, L, L)) * 2 - 1).astype(np.int8)
    s2 = (rng2.integers(0, 2, (R, L, L)) * 2 - 1).astype(np.int8)
    beta = beta_scale

    calib = min(128, max(16, n_sweeps // 4))
    heat_bath_sweeps(s1, qc, beta, rng1, max(0, n_sweeps - calib))
    heat_bath_sweeps(s2, qc, beta, rng2, max(0, n_sweeps - calib))
    series = []
    for _ in range(calib):
        heat_bath_sweeps(s1, qc, beta, rng1, 1)
        heat_bath_sweeps(s2, qc, beta, rng2, 1)
        series.append(bond_energy(s1, qc)[0])
    tau, converged = integrated_autocorr(np.asarray(series))
    gap = int(min(16, max(1, math.ceil(2 * tau))))
    equilibrated = bool(converged and n_sweeps >= 20 * tau)

    blue_count = blue_adm = red_count = red_adm = 0
    largest_no = []
    largest_ov = []
    cross_x = []
    cross_y = []
    size_counts: dict[int, int] = {}
    collected = 0
    for _ in range(per):
        heat_bath_sweeps(s1, qc, beta, rng1, gap)
        heat_bath_sweeps(s2, qc, beta, rng2, gap)
        blue, red, no_mask = sample_blue_red(s1, s2, qc, beta, rngb)
        (bh, bh_adm), (bv, bv_adm) = blue
        (rh, rh_adm), (rv, rv_adm) = red
        blue_count += int(bh.sum() + bv.sum())
        blue_adm += int(bh_adm.sum() + bv_adm.sum())
        red_count += int(rh.sum() + rv.sum())
        red_adm += int(rh_adm.sum() + rv_adm.sum())
        for rep in range(R):
            if collected >= n_samples:
                break
            big_no, sizes, cx, cy = _cluster_stats(
                bh[rep], bv[rep], no_mask[rep], L, periodic
            )
            big_ov, _, _, _ = _cluster_stats(
                bh[rep], bv[rep], ~no_mask[rep], L, periodic
            )
            largest_no.append(big_no / (L * L))
            largest_ov.append(big_ov / (L * L))
            cross_x.append(cx)
            cross_y.append(cy)
            for sz in sizes:
                size_counts[sz] = size_counts.get(sz, 0) + 1
            collected += 1
    return {
        "tau": tau,
        "gap": gap,
        "equilibrated": equilibrated,
        "blue_count": blue_count,
        "blue_adm": blue_adm,
        "red_count": red_count,
        "red_adm": red_adm,
        "largest_no": largest_no,
        "largest_ov": largest_ov,
        "cross_x": cross_x,
        "cross_y": cross_y,
        "size_counts": size_counts,
    }


def _mean_se(xs) -> dict:
    xs = np.asarray(xs, dtype=float)
    if len(xs) == 0:
        return {"mean": 0.0, "se": 0.0}
    se = float(xs.std(ddof=1) / math.sqrt(len(xs))) if len(xs) > 1 else 0.0
    return {"mean": float(xs.mean()), "se": se}


def ea_mns_percolation(
    L: int,
    J: float,
    beta_scale: float = 1.0,
    seed: int = 0,
    n_sweeps: int = 1000,
    n_samples: int = 200,
    n_disorder: int = 1,
    periodic: bool = False,
    threads: int = 1,
) -> dict:
    """Sample blue/red bonds over disorder and report cluster statistics.

    Per disorder realization: quenched couplings, two independent
    checkerboard heat-bath chains with the given burn-in, a sampling gap
    estimated from the energy autocorrelation time, and per-sample bond
    draws. Reports blue/red densities on their admissible bonds with
    binomial standard errors, the largest blue cluster fraction inside the
    disagreement and agreement regions, box crossing (or wrapping)
    frequencies, and the aggregated cluster-size counts.
    """
    args = [
        (k, L, J, beta_scale, seed, n_sweeps, n_samples, periodic)
        for k in range(n_disorder)
    ]
    per_disorder = run_tasks(_one_disorder, args, threads=threads)
    if not all(d["equilibrated"] for d in per_disorder):
        warnings.warn("autocorrelation diagnostics did not converge; treat results as unequilibrated")
    blue_count = sum(d["blue_count"] for d in per_disorder)
    blue_adm = sum(d["blue_adm"] for d in per_disorder)
    red_count = sum(d["red_count"] for d in per_disorder)
    red_adm = sum(d["red_adm"] for d in per_disorder)
    p_blue = blue_count / blue_adm if blue_adm else 0.0
    p_red = red_count / red_adm if red_adm else 0.0
    size_counts: dict[int, int] = {}
    for d in per_disorder:
        for sz, c in d["size_counts"].items():
            size_counts[sz] = size_counts.get(sz, 0) + c
    return {
        "L": L,
        "J": J,
        "beta_scale": beta_scale,
        "seed": seed,
        "periodic": periodic,
        "n_disorder": n_disorder,
        "n_samples": n_samples,
        "n_sweeps": n_sweeps,
        "blue_density": {
            "mean": p_blue,
            "se": math.sqrt(max(p_blue * (1 - p_blue), 1e-300) / blue_adm) if blue_adm else 0.0,
            "closed_form": 1 - math.exp(-4 * beta_scale * J),
            "n_admissible": blue_adm,
        },
        "red_density": {
            "mean": p_red,
            "se": math.sqrt(max(p_red * (1 - p_red), 1e-300) / red_adm) if red_adm else 0.0,
            "closed_form": 1 - math.exp(-2 * beta_scale * J),
            "n_admissible": red_adm,
        },
        "largest_blue_nonoverlap_fraction": _mean_se(
            [x for d in per_disorder for x in d["largest_no"]]
        ),
        "largest_blue_overlap_fraction": _mean_se(
            [x for d in per_disorder for x in d["largest_ov"]]
        ),
        "crossing_x": _mean_se([float(x) for d in per_disorder for x in d["cross_x"]]),
        "crossing_y": _mean_se([float(x) for d in per_disorder for x in d["cross_y"]]),
        "equilibration": {
            "tau_max": max(d["tau"] for d in per_disorder),
            "gaps": sorted({d["gap"] for d in per_disorder}),
            "all_equilibrated": bool(all(d["equilibrated"] for d in per_disorder)),
        },
        "cluster_size_counts": sorted(size_counts.items()),
    }


def mc_bond_joint(
    qc: QuenchedCouplings,
    beta_scale: float,
    seed: int,
    n_samples: int,
    burn_in: int = 500,
    gap: int = 4,
) -> tuple[dict, int]:
    """Monte Carlo histogram of (blue mask, red mask) over the box's bonds.

    Bond bit order follows build_grid's sorted bond list, so the histogram
    is directly comparable with the exact two-family joint.
    """
    L = qc.L
    g = build_grid(L, L, qc.periodic)
    bond_index = {b: i for i, b in enumerate(g.bonds)}
    hmap = np.full((L, L), -1, dtype=int)
    vmap = np.full((L, L), -1, dtype=int)
    for y in range(L):
        for x in range(L):
            if qc.horizontal[y, x] != 0.0:
                hmap[y, x] = bond_index[tuple(sorted((y * L + x, y * L + (x + 1) % L)))]
            if qc.vertical[y, x] != 0.0:
                vmap[y, x] = bond_index[tuple(sorted((y * L + x, ((y + 1) % L) * L + x)))]
    rng1 = stream(seed, 201)
    rng2 = stream(seed, 202)
    rngb = stream(seed, 203)
    R = min(4096, n_samples)
    per = -(-n_samples // R)
    s1 = (rng1.integers(0, 2, (R, L, L)) * 2 - 1).astype(np.int8)
    s2 = (rng2.integers(0, 2, (R, L, L)) * 2 - 1).astype(np.int8)
    heat_bath_sweeps(s1, qc, beta_scale, rng1, burn_in)
    heat_bath_sweeps(s2, qc, beta_scale, rng2, burn_in)
    counts: dict[tuple[int, int], int] = {}
    collected = 0
    hsel = np.argwhere(hmap >= 0)
    vsel = np.argwhere(vmap >= 0)
    hbits = np.array([1 << hmap[y, x] for y, x in hsel], dtype=object)
    vbits = np.array([1 << vmap[y, x] for y, x in vsel], dtype=object)
    for _ in range(per):
        heat_bath_sweeps(s1, qc, beta_scale, rng1, gap)
        heat_bath_sweeps(s2, qc, beta_scale, rng2, gap)
        blue, red, _ = sample_blue_red(s1, s2, qc, beta_scale, rngb)
        (bh, _), (bv, _) = blue
        (rh, _), (rv, _) = red
        for rep in range(R):
            if collected >= n_samples:
                break
            bmask = int(sum(hbits[bh[rep][tuple(hsel.T)]])) + int(
                sum(vbits[bv[rep][tuple(vsel.T)]])
            )
            rmask = int(sum(hbits[rh[rep][tuple(hsel.T)]])) + int(
                sum(vbits[rv[rep][tuple(vsel.T)]])
            )
            counts[(bmask, rmask)] = counts.get((bmask, rmask), 0) + 1
            collected += 1
    return counts, collected
