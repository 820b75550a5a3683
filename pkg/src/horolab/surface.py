"""Cocompact lattice, Dirichlet-domain point location, and cover coordinates.

The built-in lattice is the genus-2 regular octagon group: eight side-pairing
translations obtained by rotating a fixed hyperbolic translation T through
multiples of pi/4 about the center i of the upper half-plane. Opposite sides
are identified (generator k pairs with generator k+4 = its inverse) and the
octagon word

    a1 b1^-1 a2 b2^-1 a1^-1 b1 a2^-1 b2

evaluates to the identity. Its exponent sums vanish, so any assignment of
Z^d values to generators defines a character of the group.

A character phi with kernel Gamma gives the Z^d-cover Gamma\G; the deck
coordinate of a group element g is phi of the lattice word that moves the
base point g.i back into the Dirichlet domain. Reduction is greedy descent:
repeatedly apply the side pairing that maximally decreases the hyperbolic
distance of the base point to the center.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .psl2 import GroupElement, batch_mobius_i, mobius_act

__all__ = [
    "FuchsianSpec",
    "Character",
    "CoverPoint",
    "ReductionError",
    "build_octagon_group",
    "default_character",
    "reduce",
    "reduce_batch",
    "character_value",
    "load_group_spec",
    "save_group_spec",
    "hyperbolic_distance",
]

OCTAGON_NAMES = ("a1", "b1", "a2", "b2", "A1", "B1", "A2", "B2")

# indices of a1 b1^-1 a2 b2^-1 a1^-1 b1 a2^-1 b2 (inverse of k is k+4)
OCTAGON_RELATION = (0, 5, 2, 7, 4, 1, 6, 3)

BOUNDARY_TOL = 1e-12


class ReductionError(RuntimeError):
    """Greedy descent failed to terminate within the iteration cap."""


def hyperbolic_distance(z: complex, w: complex) -> float:
    return math.acosh(1.0 + abs(z - w) ** 2 / (2.0 * z.imag * w.imag))


def _rotation(phi: float) -> np.ndarray:
    c, s = math.cos(phi / 2.0), math.sin(phi / 2.0)
    return np.array([[c, s], [-s, c]])


@dataclass(frozen=True)
class FuchsianSpec:
    """A cocompact lattice presented by side pairings of a Dirichlet domain.

    generators[k] maps the side paired with side k; inverse_of[k] gives the
    index of generators[k]^-1 in the list. The Dirichlet domain about
    `center` is cut out by the bisectors between center and the neighbor
    points generators[k].center.
    """

    generators: tuple[GroupElement, ...]
    names: tuple[str, ...]
    relation: tuple[int, ...]
    inverse_of: tuple[int, ...]
    center: complex = 1j
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if len(self.generators) != len(self.names):
            raise ValueError("generator/name count mismatch")
        for k, j in enumerate(self.inverse_of):
            if self.inverse_of[j] != k:
                raise ValueError("inverse pairing is not an involution")

    # -- cached geometry ---------------------------------------------------

    @property
    def gen_stack(self) -> np.ndarray:
        if "gen_stack" not in self._cache:
            self._cache["gen_stack"] = np.stack([g.mat for g in self.generators])
        return self._cache["gen_stack"]

    @property
    def gen_inv_stack(self) -> np.ndarray:
        if "gen_inv_stack" not in self._cache:
            self._cache["gen_inv_stack"] = np.stack(
                [self.generators[j].mat for j in self.inverse_of]
            )
        return self._cache["gen_inv_stack"]

    @property
    def neighbor_points(self) -> np.ndarray:
        """Complex array of generator images of the center."""
        if "nbrs" not in self._cache:
            self._cache["nbrs"] = np.array(
                [mobius_act(g, self.center) for g in self.generators]
            )
        return self._cache["nbrs"]

    def relation_residual(self) -> float:
        m = np.eye(2)
        for k in self.relation:
            m = m @ self.generators[k].mat
        return min(
            float(np.abs(m - np.eye(2)).max()), float(np.abs(m + np.eye(2)).max())
        )

    def systole(self) -> float:
        """Shortest translation length among the side pairings."""
        return min(2.0 * math.acosh(abs(g.trace()) / 2.0) for g in self.generators)

    def _radius_sweep(self, n_dirs: int = 720) -> tuple[float, float]:
        lo_all, hi_all = math.inf, 0.0
        for j in range(n_dirs):
            phi = 2.0 * math.pi * j / n_dirs
            rot = _rotation(phi)
            lo, hi = 0.0, 6.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                e = math.exp(mid)
                z = complex(*_mob_point(rot, complex(0.0, e)))
                if self.contains(z):
                    lo = mid
                else:
                    hi = mid
            lo_all = min(lo_all, lo)
            hi_all = max(hi_all, hi)
        return lo_all, hi_all

    @property
    def inradius(self) -> float:
        if "radii" not in self._cache:
            self._cache["radii"] = self._radius_sweep()
        return self._cache["radii"][0]

    @property
    def circumradius(self) -> float:
        if "radii" not in self._cache:
            self._cache["radii"] = self._radius_sweep()
        return self._cache["radii"][1]

    # -- membership ----------------------------------------------------------

    def contains(self, z: complex, tol: float = BOUNDARY_TOL) -> bool:
        """True if z lies in the Dirichlet domain (boundary within tol)."""
        d0 = hyperbolic_distance(z, self.center)
        for p in self.neighbor_points:
            if hyperbolic_distance(z, complex(p)) < d0 - tol:
                return False
        return True


def _mob_point(mat: np.ndarray, z: complex) -> tuple[float, float]:
    w = (mat[0, 0] * z + mat[0, 1]) / (mat[1, 0] * z + mat[1, 1])
    return w.real, w.imag


def build_octagon_group() -> FuchsianSpec:
    """Genus-2 regular octagon group with opposite-side pairing.

    The base translation has cosh(l/2) = 1 + sqrt(2), which makes the eight
    rotated copies pair the sides of a regular octagon with angle sum 2*pi.
    """
    ch = 1.0 + math.sqrt(2.0)
    sh = math.sqrt(2.0 + 2.0 * math.sqrt(2.0))
    base = np.array([[ch, sh], [sh, ch]])
    gens = []
    for k in range(8):
        rot = _rotation(k * math.pi / 4.0)
        gens.append(GroupElement(rot @ base @ rot.T))
    inverse_of = tuple((k + 4) % 8 for k in range(8))
    return FuchsianSpec(
        generators=tuple(gens),
        names=OCTAGON_NAMES,
        relation=OCTAGON_RELATION,
        inverse_of=inverse_of,
    )


# ---------------------------------------------------------------------------
# characters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Character:
    """Homomorphism from the lattice to Z^d, given by generator values.

    Only values on the non-inverse generators are stored; inverses negate.
    Well-definedness on the relation is automatic when the relation word has
    zero exponent sums (true for the octagon word).
    """

    values: dict
    d: int

    def matrix(self, spec: FuchsianSpec) -> np.ndarray:
        """(n_gens, d) integer array of values, inverses included."""
        out = np.zeros((len(spec.generators), self.d), dtype=np.int64)
        for name, vec in self.values.items():
            k = spec.names.index(name)
            out[k] = np.asarray(vec, dtype=np.int64)
            out[spec.inverse_of[k]] = -out[k]
        return out

    def relation_value(self, spec: FuchsianSpec) -> np.ndarray:
        m = self.matrix(spec)
        return m[list(spec.relation)].sum(axis=0)

    def spans(self, spec: FuchsianSpec) -> bool:
        """True if the generator values generate all of Z^d."""
        from sympy import Matrix
        from sympy.matrices.normalforms import smith_normal_form

        m = Matrix(self.matrix(spec).T.tolist())
        snf = smith_normal_form(m)
        divisors = [abs(snf[i, i]) for i in range(min(snf.shape))]
        return len(divisors) >= self.d and all(v == 1 for v in divisors[: self.d])


def default_character(d: int = 1) -> Character:
    """d=1: a1 -> 1; d=2: a1 -> (1,0), a2 -> (0,1); all else 0."""
    if d == 1:
        return Character(values={"a1": (1,)}, d=1)
    if d == 2:
        return Character(values={"a1": (1, 0), "a2": (0, 1)}, d=2)
    raise ValueError("cover rank must be 1 or 2")


def character_value(word: list[int], char: Character, spec: FuchsianSpec) -> np.ndarray:
    """Value of the character on a word of generator indices."""
    m = char.matrix(spec)
    out = np.zeros(char.d, dtype=np.int64)
    for k in word:
        out += m[k]
    return out


# ---------------------------------------------------------------------------
# cover points and reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoverPoint:
    """Point of the cover: a domain-reduced representative plus deck coordinate."""

    rep: GroupElement
    deck: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.deck, dtype=np.int64)
        d.flags.writeable = False
        object.__setattr__(self, "deck", d)

    def base_point(self) -> complex:
        return mobius_act(self.rep, 1j)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoverPoint):
            return NotImplemented
        return bool(np.array_equal(self.deck, other.deck)) and self.rep == other.rep

    def __hash__(self):
        raise TypeError("CoverPoint is unhashable")


def _reduce_word(
    g: GroupElement, spec: FuchsianSpec, max_iter: int = 100_000
) -> tuple[GroupElement, list[int]]:
    """Greedy descent; returns (rep, applied) with g = prod(gens[applied]) * rep."""
    cur = np.array(g.mat)
    applied: list[int] = []
    nbrs = spec.neighbor_points
    ginv = spec.gen_inv_stack
    for _ in range(max_iter):
        z = complex(*_mob_point(cur, spec.center))
        d0 = hyperbolic_distance(z, spec.center)
        dists = [hyperbolic_distance(z, complex(p)) for p in nbrs]
        kbest = int(np.argmin(dists))  # ties resolve to the lowest index
        if dists[kbest] >= d0 - BOUNDARY_TOL:
            return GroupElement(cur), applied
        cur = ginv[kbest] @ cur
        det = cur[0, 0] * cur[1, 1] - cur[0, 1] * cur[1, 0]
        cur /= math.sqrt(abs(det))
        applied.append(kbest)
    raise ReductionError(
        f"reduction did not terminate within {max_iter} iterations "
        f"(last distance {d0:.6g})"
    )


def reduce(g: GroupElement, char: Character, spec: FuchsianSpec) -> CoverPoint:
    """Locate g in the cover: g = gamma * rep with rep over the domain.

    Returns (rep, deck) with deck = char(gamma).
    """
    rep, applied = _reduce_word(g, spec)
    deck = character_value(applied, char, spec)
    return CoverPoint(rep=rep, deck=deck)


def reduce_batch(
    mats: np.ndarray,
    decks: np.ndarray,
    spec: FuchsianSpec,
    deck_values: np.ndarray,
    max_iter: int = 100_000,
) -> None:
    """In-place greedy reduction of a (N, 2, 2) stack.

    decks is (N, m) int64 and accumulates deck_values[k] (shape (n_gens, m))
    for every applied generator k. Comparisons use cosh of the hyperbolic
    distance, which is order-equivalent.
    """
    nbrs = spec.neighbor_points
    nx, ny = nbrs.real, nbrs.imag
    ginv = spec.gen_inv_stack
    n = mats.shape[0]
    active = np.arange(n)
    for _ in range(max_iter):
        m = mats[active]
        x, y = batch_mobius_i(m)
        # cosh distance to center i and to each neighbor point
        d0 = 1.0 + (x * x + (y - 1.0) ** 2) / (2.0 * y)
        dx = x[:, None] - nx[None, :]
        dy = y[:, None] - ny[None, :]
        dn = 1.0 + (dx * dx + dy * dy) / (2.0 * y[:, None] * ny[None, :])
        kbest = np.argmin(dn, axis=1)
        improving = dn[np.arange(len(active)), kbest] < d0 - 1e-13
        if not improving.any():
            return
        rows = active[improving]
        ks = kbest[improving]
        upd = np.einsum("nij,njk->nik", ginv[ks], mats[rows])
        det = upd[:, 0, 0] * upd[:, 1, 1] - upd[:, 0, 1] * upd[:, 1, 0]
        mats[rows] = upd / np.sqrt(np.abs(det))[:, None, None]
        decks[rows] += deck_values[ks]
        active = rows
    raise ReductionError(f"batch reduction did not terminate within {max_iter} iterations")


# ---------------------------------------------------------------------------
# JSON group specs
# ---------------------------------------------------------------------------


def save_group_spec(path, spec: FuchsianSpec, characters: dict[str, Character]) -> None:
    payload = {
        "generators": [np.asarray(g.mat).reshape(4).tolist() for g in spec.generators],
        "names": list(spec.names),
        "relation": list(spec.relation),
        "inverse_of": list(spec.inverse_of),
        "characters": {
            name: {g: list(map(int, v)) for g, v in ch.values.items()}
            for name, ch in characters.items()
        },
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)


def load_group_spec(path) -> tuple[FuchsianSpec, dict[str, Character]]:
    with open(path) as fh:
        payload = json.load(fh)
    gens = tuple(
        GroupElement(np.asarray(row, dtype=float).reshape(2, 2))
        for row in payload["generators"]
    )
    names = tuple(payload.get("names") or [f"g{k}" for k in range(len(gens))])
    if "inverse_of" in payload:
        inverse_of = tuple(payload["inverse_of"])
    else:
        inverse_of = _detect_inverses(gens)
    spec = FuchsianSpec(
        generators=gens,
        names=names,
        relation=tuple(payload["relation"]),
        inverse_of=inverse_of,
    )
    chars = {}
    for name, vals in payload.get("characters", {}).items():
        vecs = {g: tuple(v) for g, v in vals.items()}
        d = len(next(iter(vecs.values())))
        chars[name] = Character(values=vecs, d=d)
    return spec, chars


def _detect_inverses(gens: tuple[GroupElement, ...]) -> tuple[int, ...]:
    out = [-1] * len(gens)
    for k, g in enumerate(gens):
        gi = g.inverse()
        for j, h in enumerate(gens):
            if h == gi:
                out[k] = j
                break
        if out[k] < 0:
            raise ValueError(f"generator {k} has no inverse in the list")
    return tuple(out)
