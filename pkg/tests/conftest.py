import itertools
from fractions import Fraction

from rcgibbs.gibbs import BondTable, GibbsSpec, Interaction, SPIN
from rcgibbs.lattice import hypergraph
from rcgibbs.rng import stream


def random_binary_spec(
    m: int,
    seed: int = 0,
    n_min: int = 3,
    n_max: int = 6,
    exact: bool = False,
    allow_forbidden: bool = False,
    with_boundary: bool = False,
) -> GibbsSpec:
    """Seeded random pair-bond model on a path plus random extra edges."""
    rng = stream(seed, 1000, m)
    n = n_min + int(rng.integers(0, n_max - n_min + 1))
    bonds = [(i, i + 1) for i in range(n - 1)]
    extra = list(itertools.combinations(range(n), 2))
    for i in rng.permutation(len(extra))[: int(rng.integers(0, 3))]:
        if extra[i] not in bonds:
            bonds.append(extra[i])
    region = tuple(range(n))
    boundary = {}
    if with_boundary:
        bonds.append((n - 1, n))
        boundary[n] = -1 if rng.random() < 0.5 else 1
        g = hypergraph(n + 1, bonds)
    else:
        g = hypergraph(n, bonds)
    tables = {}
    for k, b in enumerate(g.bonds):
        size = 2 ** len(b)
        if exact:
            facs = [
                Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 9)))
                for _ in range(size)
            ]
            if allow_forbidden and rng.random() < 0.2:
                facs[int(rng.integers(0, size))] = Fraction(0)
            tables[k] = BondTable.from_factors(facs)
        else:
            exps = rng.uniform(-2.0, 2.0, size).tolist()
            if allow_forbidden and rng.random() < 0.2:
                exps[int(rng.integers(0, size))] = None
            tables[k] = BondTable.from_exponents(exps)
    return GibbsSpec(g, SPIN, Interaction(tables), region, boundary)


def brute_gibbs(spec: GibbsSpec):
    """Independent reference: direct product-of-factors enumeration."""
    from rcgibbs.gibbs import effective_bonds, local_index

    S = spec.alphabet.size
    vals = spec.alphabet.values
    bonds = effective_bonds(spec)
    table = {}
    for cfg in itertools.product(*[spec.domain_indices(v) for v in spec.region]):
        w = Fraction(1) if spec.exact else 1.0
        for eb in bonds:
            pos = [spec.region.index(v) for v in eb.inside]
            w *= eb.table[local_index(S, tuple(cfg[p] for p in pos))]
        table[tuple(vals[i] for i in cfg)] = w
    Z = sum(table.values())
    return {o: w / Z for o, w in table.items() if True}


def acceptance_line(index: int, name: str, passed: bool, detail: str = ""):
    status = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {index:2d} [{status}] {name}" + (f" :: {detail}" if detail else ""))
    assert passed, f"criterion {index} ({name}) failed: {detail}"
