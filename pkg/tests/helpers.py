"""Test-only utilities: a randomized SMILES writer and small datasets."""

from __future__ import annotations

import random

import numpy as np

from gwpscreen.molgraph import (
    BondOrder,
    DuplicateBond,
    MolecularGraph,
    MultiFragmentInput,
    SmilesSyntaxError,
    UnbalancedParenthesis,
    UnclosedRingBond,
    UnknownElement,
    UnsupportedFeature,
    ValenceViolation,
)

# (smiles, expected error, byte offset)
INVALID_FIXTURES = [
    ("C(", UnbalancedParenthesis, 1),
    ("C)", UnbalancedParenthesis, 1),
    ("C1CC", UnclosedRingBond, 1),
    ("Xx", UnknownElement, 0),
    ("C.C", MultiFragmentInput, 1),
    ("C/C=C/C", UnsupportedFeature, 1),
    ("[13C]", UnsupportedFeature, 1),
    ("CC(=O)(=O)C", ValenceViolation, 1),
    ("c1cccc1x", UnknownElement, 7),
    ("", SmilesSyntaxError, 0),
    ("C11", DuplicateBond, 2),
]

_BOND_SYMBOL = {BondOrder.SINGLE: "-", BondOrder.DOUBLE: "=", BondOrder.TRIPLE: "#", BondOrder.AROMATIC: ":"}


def _atom_token(graph: MolecularGraph, i: int) -> str:
    a = graph.atoms[i]
    sym = a.element.lower() if a.aromatic else a.element
    h = a.implicit_h
    hpart = "" if h == 0 else ("H" if h == 1 else f"H{h}")
    if a.charge == 0:
        chg = ""
    else:
        sign = "+" if a.charge > 0 else "-"
        chg = sign if abs(a.charge) == 1 else f"{sign}{abs(a.charge)}"
    return f"[{sym}{hpart}{chg}]"


def random_smiles(graph: MolecularGraph, rng: random.Random) -> str:
    """A random depth-first re-traversal of ``graph`` with explicit H and bond symbols."""
    n = len(graph.atoms)
    start = rng.randrange(n)
    children: dict[int, list[int]] = {i: [] for i in range(n)}
    seen = {start}
    tree_bonds: set[int] = set()
    order = []

    def dfs(a: int) -> None:
        order.append(a)
        nbrs = list(graph.adjacency[a])
        rng.shuffle(nbrs)
        for b, k in nbrs:
            if b not in seen:
                seen.add(b)
                tree_bonds.add(k)
                children[a].append(b)
                dfs(b)

    dfs(start)
    rank = {a: r for r, a in enumerate(order)}
    closures: dict[int, list[int]] = {i: [] for i in range(n)}
    for k, bond in enumerate(graph.bonds):
        if k not in tree_bonds:
            i, j = bond.endpoints
            closures[i].append(k)
            closures[j].append(k)
    digit_of: dict[int, int] = {}
    free: list[int] = list(range(1, 100))

    def label(d: int) -> str:
        return str(d) if d < 10 else f"%{d}"

    def emit(a: int) -> str:
        out = [_atom_token(graph, a)]
        for k in sorted(closures[a], key=lambda k: rank[graph.bonds[k].other(a)]):
            if k in digit_of:
                d = digit_of.pop(k)
                out.append(label(d))
                free.append(d)
                free.sort()
            else:
                d = free.pop(0)
                digit_of[k] = d
                out.append(_BOND_SYMBOL[graph.bonds[k].order] + label(d))
        kids = children[a]
        for idx, b in enumerate(kids):
            sym = _BOND_SYMBOL[graph.bond_between(a, b).order]
            branch = sym + emit(b)
            out.append(branch if idx == len(kids) - 1 else f"({branch})")
        return "".join(out)

    return emit(start)


_ATOMS = ["C", "N", "O", "F", "Cl", "Br", "I", "S", "P", "B", "c", "n", "o", "s", "[CH4]", "[NH4+]", "[O-]",
          "[N+]", "[nH]", "[Si]", "[13C]", "[C@H]", "*", "Xx", "[Fe]", "[CH2", "H"]
_OTHER = ["(", ")", "=", "#", ":", "-", "/", "\\", ".", "1", "2", "3", "%10", "%1", "@", "+", " ", "[", "]", "é"]


def grammar_strings(rng: random.Random, n: int, seeds: list[str]):
    """Yield ``n`` strings: random token sequences and mutated valid SMILES."""
    for i in range(n):
        if i % 2 and seeds:
            s = list(rng.choice(seeds))
            for _ in range(rng.randint(1, 3)):
                op = rng.random()
                pos = rng.randrange(len(s) + 1)
                tok = rng.choice(_ATOMS + _OTHER)
                if op < 0.4:
                    s.insert(pos, tok)
                elif op < 0.7 and s:
                    del s[min(pos, len(s) - 1)]
                elif s:
                    s[min(pos, len(s) - 1)] = tok
            yield "".join(s)
        else:
            k = rng.randint(0, 12)
            yield "".join(rng.choice(_ATOMS) if rng.random() < 0.6 else rng.choice(_OTHER) for _ in range(k))


def fuzz_parser(n: int, seed: int, seeds: list[str]) -> dict:
    """Parse ``n`` generated strings; collect crashes and circuit-rank violations."""
    from gwpscreen.molgraph import SmilesError, parse_smiles

    rng = random.Random(seed)
    stats = {"n": 0, "valid": 0, "rejected": 0, "crashes": [], "rank_violations": [], "bad_offsets": []}
    for text in grammar_strings(rng, n, seeds):
        stats["n"] += 1
        try:
            g = parse_smiles(text)
        except SmilesError as exc:
            stats["rejected"] += 1
            if not (isinstance(exc.offset, int) and 0 <= exc.offset <= len(text)):
                stats["bad_offsets"].append(text)
            continue
        except Exception as exc:  # anything else is a crash
            stats["crashes"].append((text, repr(exc)))
            continue
        stats["valid"] += 1
        if len(g.rings) != len(g.bonds) - len(g.atoms) + 1:
            stats["rank_violations"].append(text)
    return stats


def _loss(theta, layout, x, y, act) -> float:
    from gwpscreen.nnet import _fallback

    return float(np.mean((_fallback.forward(theta, layout, x, act) - y) ** 2))


def gradient_check(n_nets: int, seed: int, grad_fn, step: float = 1e-5) -> list[float]:
    """Relative error of ``grad_fn`` against central differences on random nets.

    Nets have 1-3 hidden layers of 1-8 neurons; activations alternate so
    both appear equally often.  Returns one relative error per net.
    """
    from gwpscreen.nnet import Hyperparameters, layer_layout, n_parameters

    rng = np.random.default_rng(seed)
    errors = []
    for i in range(n_nets):
        act = i % 2
        hp = Hyperparameters(int(rng.integers(1, 4)), int(rng.integers(1, 9)))
        dim = int(rng.integers(1, 6))
        layout = layer_layout(dim, hp)
        theta = rng.normal(0.0, 0.8, n_parameters(layout))
        rows = int(rng.integers(1, 7))
        x = rng.normal(size=(rows, dim))
        y = rng.normal(size=rows)
        analytic = np.zeros_like(theta)
        grad_fn(theta, layout, x, y, act, analytic)
        numeric = np.empty_like(theta)
        for k in range(theta.size):
            hi, lo = theta.copy(), theta.copy()
            hi[k] += step
            lo[k] -= step
            numeric[k] = (_loss(hi, layout, x, y, act) - _loss(lo, layout, x, y, act)) / (2 * step)
        denom = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-12)
        errors.append(float(np.linalg.norm(analytic - numeric) / denom))
    return errors


def small_prepared(n: int = 60, seed: int = 0):
    """Featurized synthetic halocarbons ready for the tuner."""
    from gwpscreen.descriptors import featurize_batch
    from gwpscreen.molgraph import parse_smiles
    from gwpscreen.synthetic import halocarbon_dataset
    from gwpscreen.tuner import prepare_dataset

    records = halocarbon_dataset(n, seed=seed)
    fm = featurize_batch([parse_smiles(r.smiles) for r in records], ids=[r.id for r in records])
    return prepare_dataset(fm, [r.gwp100 for r in records], seed)


def constant_member(input_dim: int, value: float, trial: int = 0):
    """A successful trial whose network always outputs ``value``."""
    from gwpscreen.nnet import Hyperparameters, MlpModel, layer_layout, n_parameters
    from gwpscreen.tuner import TrialResult

    hp = Hyperparameters(1, 2)
    theta = np.zeros(n_parameters(layer_layout(input_dim, hp)))
    theta[-1] = value
    model = MlpModel(input_dim, hp, theta)
    return TrialResult(trial, trial, hp, 0.1 * (trial + 1), 0.9, 100.0, 0.9, (), (), model)


def linear_task(trained: bool, seed: int = 0):
    """Ensemble and data for a truth driven by PC1 alone, PC3 structurally ignored.

    Scores are i.i.d. in [-0.1, 0.1] over 4 PCs; the QT-scale truth is
    ``0.5 + 3 PC1``, and the quantile transform is fitted so that it is
    close to the identity on [0, 1].  With ``trained=False`` the network
    is built by hand (one tanh unit reading PC1 through a tiny weight, so it
    is linear to O(eps^2)); otherwise a small tanh net is trained on the
    task and the fan-out weights of PC3 are then zeroed.
    """
    from gwpscreen.nnet import Hyperparameters, MlpModel, layer_layout, mlp_init, n_parameters, train
    from gwpscreen.preprocess import FeaturePipeline, quantile_fit
    from gwpscreen.tuner import EnsembleModel, TrialResult

    rng = np.random.default_rng(seed)
    p = 4
    pipe = FeaturePipeline.fit(rng.normal(size=(40, p)), [f"d{j}" for j in range(p)], threshold=1.0)
    qt = quantile_fit(np.linspace(0.0, 1.0, 1001))
    x = rng.uniform(-0.1, 0.1, size=(200, p))
    u = 0.5 + 3.0 * x[:, 0]
    if trained:
        hp = Hyperparameters(1, 8, batch_size=20, epochs=1500, seed=seed)
        loose = np.delete(x, 2, axis=1)
        small = train(mlp_init(p - 1, hp), loose, u)
        # re-embed with a zero column for PC3
        w1, b1 = small.layers()[0]
        w2, b2 = small.layers()[1]
        w1_full = np.insert(w1, 2, 0.0, axis=1)
        theta = np.concatenate([w1_full.ravel(), b1, w2.ravel(), b2])
        model = MlpModel(p, hp, theta)
    else:
        hp = Hyperparameters(1, 1)
        eps = 1e-4
        theta = np.zeros(n_parameters(layer_layout(p, hp)))
        theta[0] = eps          # PC1 -> hidden
        theta[p + 1] = 3.0 / eps  # hidden -> output
        theta[p + 2] = 0.5
        model = MlpModel(p, hp, theta)
    member = TrialResult(0, seed, hp, 0.0, 1.0, 0.0, 1.0, (), (), model)
    return EnsembleModel(pipe, qt, (member,)), x, qt.inverse(u)


ACCEPTANCE: list[str] = []


def record(criterion: int, ok: bool, detail: str) -> bool:
    """Log one acceptance line (printed now and in the session summary)."""
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok
