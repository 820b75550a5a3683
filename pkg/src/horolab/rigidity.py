"""Polynomial sublevel bounds, commensurability arithmetic, joinings, orbits.

Subgroups are joint kernels of characters on the octagon lattice (targets Z
or Z/m), which keeps every commensurability computation exact integer
arithmetic on the abelianization Z^4. Kernels of characters contain the
commutator subgroup, hence are normal; conjugating by a lattice word leaves
them unchanged, so a graph-joining twist g0 only translates the second
coordinate.

The finite-cover self-joining sampler advances a pair of cover trajectories
([g u_t], [g0 g u_t]) with each side reduced in its own cover bookkeeping;
projection tests histogram the base-surface cells against Monte-Carlo Haar
volumes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .psl2 import GroupElement, batch_frame_angle, batch_mobius_i, make_flow
from .surface import Character, FuchsianSpec, reduce_batch

__all__ = [
    "Poly",
    "GoodCheck",
    "SubgroupSpec",
    "JoiningModel",
    "JoiningSampler",
    "CellPartition",
    "good_check",
    "weak_good_ratio",
    "intersection_index",
    "abelian_class_count",
    "build_joining",
    "projection_test",
    "orbit_density",
    "orbit_density_sweep",
]


# ---------------------------------------------------------------------------
# (C, alpha)-good polynomial checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Poly:
    """Real polynomial with ascending coefficients, degree capped at 3."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs)
        while len(c) > 1 and c[-1] == 0.0:
            c = c[:-1]
        if len(c) > 4:
            raise ValueError("degree must be at most 3")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        out = 0.0
        for c in reversed(self.coeffs):
            out = out * x + c
        return out

    def derivative(self) -> "Poly":
        if self.degree == 0:
            return Poly((0.0,))
        return Poly(tuple(j * c for j, c in enumerate(self.coeffs) if j > 0))

    def real_roots(self) -> np.ndarray:
        if self.degree == 0:
            return np.array([])
        r = np.roots(list(reversed(self.coeffs)))
        return np.sort(r[np.abs(r.imag) < 1e-9].real)

    def shifted(self, c: float) -> "Poly":
        return Poly((self.coeffs[0] + c,) + self.coeffs[1:])

    def sup_abs(self, J: tuple[float, float]) -> float:
        a, b = J
        pts = [a, b]
        pts += [float(r) for r in self.derivative().real_roots() if a < r < b]
        return max(abs(self(t)) for t in pts)

    def sublevel_measure(self, J: tuple[float, float], eps: float) -> float:
        """Lebesgue measure of {x in J : |p(x)| < eps}, exact via root isolation."""
        a, b = J
        cuts = {a, b}
        for q in (self.shifted(-eps), self.shifted(eps)):
            cuts.update(float(r) for r in q.real_roots() if a < r < b)
        cuts = sorted(cuts)
        total = 0.0
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if abs(self(0.5 * (lo + hi))) < eps:
                total += hi - lo
        return total


@dataclass(frozen=True)
class GoodCheck:
    lhs: float
    rhs: float
    passed: bool
    C: float
    alpha: float


def good_check(p: Poly, J: tuple[float, float], eps: float) -> GoodCheck:
    """Sublevel-measure bound with the degree-k constants (k(k+1)^{1/k}, 1/k)."""
    a, b = J
    if not b > a:
        raise ValueError("interval must have positive length")
    if eps <= 0:
        raise ValueError("eps must be positive")
    sup = p.sup_abs(J)
    if sup == 0.0:
        raise ValueError("polynomial vanishes identically on the interval")
    k = max(p.degree, 1)
    C = k * (k + 1) ** (1.0 / k)
    alpha = 1.0 / k
    lhs = p.sublevel_measure(J, eps)
    rhs = C * (eps / sup) ** alpha * (b - a)
    return GoodCheck(lhs=lhs, rhs=rhs, passed=lhs <= rhs + 1e-12, C=C, alpha=alpha)


def weak_good_ratio(
    start_ens,
    target,
    theta: Poly,
    T: float,
    dt: float = 0.05,
) -> dict:
    """Empirical constant in the weighted-return inequality.

    Integrates chi_K(g u_t) |theta(t)| and chi_K(g u_t) along the horocycle
    for every ensemble member; reports C_est = lhs / (return mass * sup).
    """
    n_steps = int(round(T / dt))
    ens = start_ens.copy()
    half = make_flow("U", dt / 2.0).mat
    full = make_flow("U", dt).mat
    lhs = np.zeros(len(ens))
    mass = np.zeros(len(ens))
    ens.step(half)
    for j in range(1, n_steps + 1):
        t = (j - 0.5) * dt
        x, y = ens.positions()
        hit = target.batch(x, y, ens.decks).astype(float)
        lhs += hit * abs(theta(t)) * dt
        mass += hit * dt
        if j < n_steps:
            ens.step(full)
    sup = theta.sup_abs((0.0, T))
    if not mass.any():
        warnings.warn("zero return mass; ratio under-powered", UserWarning)
    with np.errstate(divide="ignore", invalid="ignore"):
        c_est = np.where(mass > 0, lhs / (mass * sup), np.nan)
    return {"lhs": lhs, "return_mass": mass, "sup": sup, "C_est": c_est}


# ---------------------------------------------------------------------------
# integer lattice arithmetic for joint character kernels
# ---------------------------------------------------------------------------


def _row_hnf(mat: np.ndarray) -> np.ndarray:
    """Row Hermite-style echelon form over Z (nonnegative pivots)."""
    H = [list(map(int, row)) for row in np.atleast_2d(mat)]
    rows, cols = len(H), len(H[0])
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if H[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        H[r], H[piv] = H[piv], H[r]
        changed = True
        while changed:
            changed = False
            for i in range(r + 1, rows):
                if H[i][c] != 0:
                    if abs(H[i][c]) < abs(H[r][c]):
                        H[r], H[i] = H[i], H[r]
                    q = H[i][c] // H[r][c]
                    H[i] = [a - q * b for a, b in zip(H[i], H[r])]
                    if H[i][c] != 0:
                        changed = True
        if H[r][c] < 0:
            H[r] = [-a for a in H[r]]
        r += 1
        if r == rows:
            break
    return np.array([row for row in H if any(row)], dtype=object).reshape(-1, cols) if any(
        any(row) for row in H
    ) else np.zeros((0, cols), dtype=object)


def _integer_kernel(mat: np.ndarray) -> np.ndarray:
    """Basis (rows) of {v in Z^n : mat @ v = 0}."""
    M = np.atleast_2d(np.asarray(mat, dtype=object))
    k, n = M.shape
    aug = np.hstack([M.T, np.eye(n, dtype=object)])
    H = _row_hnf(aug)
    out = [row[k:] for row in H if not any(row[:k])]
    # rows eliminated to zero entirely are dropped by _row_hnf; recover them:
    # _row_hnf keeps only nonzero rows, and kernel rows have nonzero tails.
    if not out:
        return np.zeros((0, n), dtype=np.int64)
    return np.array(out, dtype=np.int64).reshape(-1, n)


def _lattice_index(rows: np.ndarray, n: int):
    """Index [Z^n : row span] (math.inf if the span has lower rank)."""
    H = _row_hnf(rows)
    if H.shape[0] < n:
        return math.inf
    idx = 1
    r = 0
    for c in range(n):
        if r < H.shape[0] and H[r][c] != 0:
            idx *= int(abs(H[r][c]))
            r += 1
        else:
            return math.inf
    return idx


@dataclass(frozen=True)
class SubgroupSpec:
    """Joint kernel of characters on the lattice, targets Z (modulus 0) or Z/m."""

    base: FuchsianSpec
    characters: tuple  # tuple of (Character, modulus)

    def __post_init__(self):
        for ch, m in self.characters:
            if m < 0:
                raise ValueError("modulus must be 0 (Z target) or positive")
            if np.any(ch.relation_value(self.base)):
                raise ValueError("character does not kill the relation")

    def _rows(self) -> tuple[np.ndarray, np.ndarray]:
        """(free rows, (torsion rows, moduli)) over the positive generators."""
        n_pos = len(self.base.generators) // 2
        free, tor, mods = [], [], []
        for ch, m in self.characters:
            mat = ch.matrix(self.base)[:n_pos].T  # (d, n_pos)
            for row in mat:
                if m == 0:
                    free.append(row)
                else:
                    tor.append(row)
                    mods.append(m)
        free = np.array(free, dtype=np.int64).reshape(-1, n_pos)
        tor = np.array(tor, dtype=np.int64).reshape(-1, n_pos)
        return free, (tor, np.array(mods, dtype=np.int64))

    def kernel_lattice(self) -> np.ndarray:
        """Rows spanning the abelianized subgroup inside Z^{n_pos}."""
        n_pos = len(self.base.generators) // 2
        free, (tor, mods) = self._rows()
        # stack [free; tor] acting on (v, w): free v = 0, tor v - diag(mods) w = 0
        s = len(mods)
        top = np.hstack([free, np.zeros((len(free), s), dtype=np.int64)])
        bot = np.hstack([tor, -np.diag(mods)]) if s else np.zeros((0, n_pos + s), np.int64)
        ker = _integer_kernel(np.vstack([top, bot]))
        return ker[:, :n_pos]

    def contains_vector(self, v: np.ndarray) -> bool:
        """Abelianized membership: all characters vanish (mod their moduli)."""
        free, (tor, mods) = self._rows()
        if free.size and np.any(free @ v):
            return False
        if tor.size and np.any((tor @ v) % mods):
            return False
        return True

    def class_key(self, v: np.ndarray) -> tuple:
        """Canonical value of the joint character at an abelianized word."""
        free, (tor, mods) = self._rows()
        parts = []
        if free.size:
            parts.extend(int(x) for x in free @ v)
        if tor.size:
            parts.extend(int(x) for x in (tor @ v) % mods)
        return tuple(parts)

    def image_order(self, lattice_rows: np.ndarray):
        """Order of the joint-character image of the given sublattice."""
        free, (tor, mods) = self._rows()
        if free.size and lattice_rows.size:
            if np.any(lattice_rows @ free.T):
                return math.inf
        if not tor.size:
            return 1
        s = len(mods)
        gens = lattice_rows @ tor.T if lattice_rows.size else np.zeros((0, s), np.int64)
        span = np.vstack([gens, np.diag(mods)])
        idx = _lattice_index(span, s)
        return int(np.prod(mods)) // idx


def intersection_index(s1: SubgroupSpec, s2: SubgroupSpec, g0_word=()) -> tuple:
    """([H1 : H1 n H2'], [H2' : H1 n H2']) for H2' = conjugate of H2 by the word.

    Kernels of characters are normal, so the conjugate equals H2; g0 is
    accepted for interface parity and ignored in the arithmetic.
    """
    del g0_word
    idx1 = s2.image_order(s1.kernel_lattice())
    idx2 = s1.image_order(s2.kernel_lattice())
    return idx1, idx2


def abelian_class_count(s1: SubgroupSpec, s2: SubgroupSpec, L: int = 8) -> tuple[int, bool]:
    """Oracle: classes of s2-values over words of length <= L inside s1.

    Enumerates the l^1 ball of Z^{n_pos} (every such vector is realized by a
    word of that length and vice versa); returns (count at L, stabilized
    against L-1).
    """
    n_pos = len(s1.base.generators) // 2

    def classes(radius: int) -> set:
        out = set()

        def rec(prefix, remaining):
            if len(prefix) == n_pos:
                v = np.array(prefix, dtype=np.int64)
                if s1.contains_vector(v):
                    out.add(s2.class_key(v))
                return
            for val in range(-remaining, remaining + 1):
                rec(prefix + [val], remaining - abs(val))

        rec([], radius)
        return out

    at_L = classes(L)
    return len(at_L), len(at_L) == len(classes(L - 1))


# ---------------------------------------------------------------------------
# finite cover self-joinings
# ---------------------------------------------------------------------------


def _word_matrix(spec: FuchsianSpec, word) -> np.ndarray:
    m = np.eye(2)
    for k in word:
        m = m @ spec.generators[k].mat
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        m /= math.sqrt(abs(det))
    return m


def _vector_word(v: np.ndarray) -> list[int]:
    """A concrete word with the given abelianization (positive gens 0..3)."""
    word = []
    for j, val in enumerate(v):
        k = j if val >= 0 else j + 4
        word.extend([k] * abs(int(val)))
    return word


@dataclass
class JoiningModel:
    spec1: SubgroupSpec
    spec2: SubgroupSpec
    g0_word: tuple = ()
    fiber_size: int = 0  # filled by build_joining


class JoiningSampler:
    """Pair orbit ([g u_t], [g0 g u_t]); each side reduced in its own cover."""

    def __init__(self, jm: JoiningModel, coset_words: list, n: int, rng):
        from .flows import random_starts

        self.jm = jm
        base = jm.spec1.base
        self.base = base
        self.coset_words = coset_words
        self.g0_mat = _word_matrix(base, jm.g0_word)
        trivial = Character(values={}, d=1)
        ens = random_starts(n, rng, base, trivial)
        self.mats1 = ens.mats.copy()
        self.mats2 = np.einsum("ij,njk->nik", self.g0_mat, ens.mats)
        self.decks1 = np.zeros((n, 4), dtype=np.int64)
        self.decks2 = np.zeros((n, 4), dtype=np.int64)
        self._abelian = _abelian_values(base)
        reduce_batch(self.mats1, self.decks1, base, self._abelian)
        reduce_batch(self.mats2, self.decks2, base, self._abelian)

    def __len__(self):
        return len(self.mats1)

    def step(self, dt: float):
        q = make_flow("U", dt).mat
        self.mats1 = self.mats1 @ q
        self.mats2 = self.mats2 @ q
        reduce_batch(self.mats1, self.decks1, self.base, self._abelian)
        reduce_batch(self.mats2, self.decks2, self.base, self._abelian)

    def projections(self):
        """((x, y, theta, abelian decks) per side)."""
        out = []
        for mats, decks in ((self.mats1, self.decks1), (self.mats2, self.decks2)):
            x, y = batch_mobius_i(mats)
            out.append((x, y, batch_frame_angle(mats), decks))
        return out

    def fiber_points(self, g: GroupElement):
        """Second coordinates over the first coordinate [g]: [g0 w g] per coset."""
        pts = []
        for word in self.coset_words:
            m = self.g0_mat @ _word_matrix(self.base, word) @ g.mat
            mats = m[None, :, :].copy()
            decks = np.zeros((1, 4), dtype=np.int64)
            reduce_batch(mats, decks, self.base, self._abelian)
            pts.append((GroupElement(mats[0]), self.jm.spec2.class_key(decks[0])))
        return pts


def _abelian_values(spec: FuchsianSpec) -> np.ndarray:
    """Per-generator abelianization increments in Z^{n_pos}."""
    n = len(spec.generators)
    n_pos = n // 2
    vals = np.zeros((n, n_pos), dtype=np.int64)
    for k in range(n_pos):
        vals[k, k] = 1
        vals[spec.inverse_of[k], k] = -1
    return vals


def build_joining(jm: JoiningModel, search_radius: int = 8) -> JoiningModel:
    """Validate commensurability and find fiber coset representatives."""
    idx1, idx2 = intersection_index(jm.spec1, jm.spec2, jm.g0_word)
    if math.isinf(idx1) or math.isinf(idx2):
        raise ValueError("infinite intersection index; joining construction refused")
    jm.fiber_size = int(idx1)
    return jm


def coset_words(jm: JoiningModel, search_radius: int = 8) -> list:
    """Words in the first subgroup realizing the distinct fiber classes."""
    s1, s2 = jm.spec1, jm.spec2
    n_pos = len(s1.base.generators) // 2
    l = jm.fiber_size or intersection_index(s1, s2)[0]
    found = {}

    def rec(prefix, remaining):
        if len(found) >= l:
            return
        if len(prefix) == n_pos:
            v = np.array(prefix, dtype=np.int64)
            if s1.contains_vector(v):
                key = s2.class_key(v)
                if key not in found:
                    found[key] = _vector_word(v)
            return
        for val in range(-remaining, remaining + 1):
            rec(prefix + [val], remaining - abs(val))

    for radius in range(0, search_radius + 1):
        rec([], radius)
        if len(found) >= l:
            break
    if len(found) < l:
        raise ValueError(f"found only {len(found)} of {l} fiber classes at radius {search_radius}")
    return list(found.values())


def make_sampler(jm: JoiningModel, n: int, rng) -> JoiningSampler:
    jm = build_joining(jm)
    return JoiningSampler(jm, coset_words(jm), n, rng)


# ---------------------------------------------------------------------------
# cells and projection tests
# ---------------------------------------------------------------------------


class CellPartition:
    """Product boxes in (x, ln y, frame angle) with Monte-Carlo Haar volumes."""

    def __init__(
        self,
        spec: FuchsianSpec,
        shape: tuple[int, int, int] = (4, 4, 4),
        mc_points: int = 1_000_000,
        seed: int = 20_240_601,
    ):
        self.spec = spec
        self.shape = shape
        R = spec.circumradius
        self.x_edges = np.linspace(-math.sinh(R) * 1.02, math.sinh(R) * 1.02, shape[0] + 1)
        self.ly_edges = np.linspace(-R * 1.02, R * 1.02, shape[1] + 1)
        self.th_edges = np.linspace(0.0, 2.0 * math.pi, shape[2] + 1)
        self.n_cells = shape[0] * shape[1] * shape[2]
        self.volumes = self._mc_volumes(mc_points, seed)

    def _mc_volumes(self, n: int, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        x = rng.uniform(self.x_edges[0], self.x_edges[-1], n)
        ly = rng.uniform(self.ly_edges[0], self.ly_edges[-1], n)
        th = rng.uniform(0.0, 2.0 * math.pi, n)
        y = np.exp(ly)
        nbrs = self.spec.neighbor_points
        cosh_c = 1.0 + (x * x + (y - 1.0) ** 2) / (2.0 * y)
        inside = np.ones(n, dtype=bool)
        for p in nbrs:
            cosh_n = 1.0 + ((x - p.real) ** 2 + (y - p.imag) ** 2) / (2.0 * y * p.imag)
            inside &= cosh_c <= cosh_n
        w = np.where(inside, 1.0 / y, 0.0)  # Haar density in (x, ln y, theta)
        idx = self.cell_index(x, y, th)
        vols = np.zeros(self.n_cells)
        np.add.at(vols, idx, w)
        return vols / vols.sum()

    def cell_index(self, x, y, theta) -> np.ndarray:
        ix = np.clip(np.searchsorted(self.x_edges, x) - 1, 0, self.shape[0] - 1)
        iy = np.clip(np.searchsorted(self.ly_edges, np.log(y)) - 1, 0, self.shape[1] - 1)
        it = np.clip(np.searchsorted(self.th_edges, np.mod(theta, 2 * math.pi)) - 1, 0, self.shape[2] - 1)
        return (ix * self.shape[1] + iy) * self.shape[2] + it


def _tv(counts: np.ndarray, volumes: np.ndarray) -> float:
    if counts.sum() == 0:
        return 1.0
    p = counts / counts.sum()
    return 0.5 * float(np.abs(p - volumes).sum())


def projection_test(
    sampler: JoiningSampler,
    cells: CellPartition,
    T: float,
    dt_sample: float = 1.0,
) -> dict:
    """TV distance of each projection's empirical cell law from Haar volumes."""
    n_steps = int(round(T / dt_sample))
    counts1 = np.zeros(cells.n_cells)
    counts2 = np.zeros(cells.n_cells)
    for _ in range(n_steps):
        sampler.step(dt_sample)
        (x1, y1, t1, _), (x2, y2, t2, _) = sampler.projections()
        np.add.at(counts1, cells.cell_index(x1, y1, t1), 1.0)
        np.add.at(counts2, cells.cell_index(x2, y2, t2), 1.0)
    return {
        "tv1": _tv(counts1, cells.volumes),
        "tv2": _tv(counts2, cells.volumes),
        "counts1": counts1,
        "counts2": counts2,
        "n_samples": n_steps * len(sampler),
    }


# ---------------------------------------------------------------------------
# orbit density
# ---------------------------------------------------------------------------


@dataclass
class OrbitReport:
    L_values: list
    coverage: list
    cells_hit: list
    n_points: list
    exact: bool


def _reduced_walks(spec: FuchsianSpec, n_walks: int, length: int, rng) -> np.ndarray:
    """(n_walks, length) generator indices of random reduced words."""
    n = len(spec.generators)
    steps = np.zeros((n_walks, length), dtype=np.int64)
    steps[:, 0] = rng.integers(0, n, n_walks)
    inv = np.array(spec.inverse_of)
    for j in range(1, length):
        r = rng.integers(0, n - 1, n_walks)
        forbidden = inv[steps[:, j - 1]]
        steps[:, j] = np.where(r >= forbidden, r + 1, r)
    return steps


def orbit_density_sweep(
    subgroup: SubgroupSpec,
    x0: GroupElement,
    L_values,
    cells: CellPartition,
    max_words: int = 10_000_000,
    n_walks: int = 30_000,
    seed: int = 0,
) -> OrbitReport:
    """Coverage of cells by the subgroup orbit of x0, per word-length cap.

    Exact breadth-first enumeration while the reduced-word count fits the
    budget; otherwise a seeded ensemble of random reduced words whose
    phi-trivial prefixes give nested point sets across the L values.
    """
    spec = subgroup.base
    L_values = sorted(int(L) for L in L_values)
    L_max = L_values[-1]
    n = len(spec.generators)
    exact_count = 1 + sum(n * (n - 1) ** (j - 1) for j in range(1, L_max + 1))
    exact = exact_count <= max_words
    abelian = _abelian_values(spec)

    hit_sets = {L: set() for L in L_values}
    x0m = x0.mat

    def visit(mats: np.ndarray, length: int):
        """Reduce the points x0 . w and mark cells for every L >= length."""
        if mats.size == 0:
            return
        pts = np.einsum("ij,njk->nik", x0m, mats)
        decks = np.zeros((len(pts), abelian.shape[1]), dtype=np.int64)
        reduce_batch(pts, decks, spec, abelian)
        x, y = batch_mobius_i(pts)
        th = batch_frame_angle(pts)
        idx = np.unique(cells.cell_index(x, y, th))
        for L in L_values:
            if L >= length:
                hit_sets[L].update(int(i) for i in idx)

    # the identity word (length 0) always contributes
    visit(np.eye(2)[None, :, :], 0)

    if exact:
        level_mats = [np.eye(2)[None, :, :]]
        level_vecs = [np.zeros((1, abelian.shape[1]), dtype=np.int64)]
        level_last = [np.array([-1])]
        gen_stack = spec.gen_stack
        inv = np.array(spec.inverse_of)
        for length in range(1, L_max + 1):
            mats, vecs, last = level_mats[-1], level_vecs[-1], level_last[-1]
            new_m, new_v, new_l = [], [], []
            for k in range(n):
                keep = last != inv[k] if length > 1 else np.ones(len(mats), bool)
                if not keep.any():
                    continue
                prod = np.einsum("nij,jk->nik", mats[keep], gen_stack[k])
                det = prod[:, 0, 0] * prod[:, 1, 1] - prod[:, 0, 1] * prod[:, 1, 0]
                prod /= np.sqrt(np.abs(det))[:, None, None]
                new_m.append(prod)
                new_v.append(vecs[keep] + abelian[k])
                new_l.append(np.full(keep.sum(), k))
            mats = np.concatenate(new_m)
            vecs = np.concatenate(new_v)
            last = np.concatenate(new_l)
            level_mats.append(mats)
            level_vecs.append(vecs)
            level_last.append(last)
            member = np.array([subgroup.contains_vector(v) for v in vecs])
            visit(mats[member], length)
            level_mats[-2] = level_vecs[-2] = level_last[-2] = None
    else:
        rng = np.random.default_rng(seed)
        steps = _reduced_walks(spec, n_walks, L_max, rng)
        mats = np.repeat(np.eye(2)[None, :, :], n_walks, axis=0)
        vecs = np.zeros((n_walks, abelian.shape[1]), dtype=np.int64)
        for length in range(1, L_max + 1):
            k = steps[:, length - 1]
            mats = np.einsum("nij,njk->nik", mats, spec.gen_stack[k])
            det = mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]
            mats /= np.sqrt(np.abs(det))[:, None, None]
            vecs = vecs + abelian[k]
            member = np.array([subgroup.contains_vector(v) for v in vecs])
            visit(mats[member], length)

    coverage = [len(hit_sets[L]) / cells.n_cells for L in L_values]
    return OrbitReport(
        L_values=L_values,
        coverage=coverage,
        cells_hit=[len(hit_sets[L]) for L in L_values],
        n_points=[exact_count if exact else n_walks * L for L in L_values],
        exact=exact,
    )


def orbit_density(
    subgroup: SubgroupSpec,
    x0: GroupElement,
    L: int,
    cells: CellPartition,
    max_words: int = 10_000_000,
    n_walks: int = 30_000,
    seed: int = 0,
) -> float:
    """Fraction of cells hit by words of length <= L with trivial characters."""
    report = orbit_density_sweep(
        subgroup, x0, [L], cells, max_words=max_words, n_walks=n_walks, seed=seed
    )
    return report.coverage[0]
