"""Compact groups: a Lie algebra plus the global data needed for harmonic analysis.

Presets: su2, so3, t1, t2, su2xt1, su2xsu2, u2.  Custom groups are read from
a JSON definition::

    {"dim": 4,
     "structure_constants": [[1, 2, 3, 1.0], ...],   # 1-based [i, j, k, value]
     "ideals": [{"range": [1, 3], "kind": "simple"},
                {"range": [4, 4], "kind": "center"}],
     "lattice": [[1]],                               # optional, default identity
     "selection": "all"}                             # optional: all | integer_spin | u2

Only the listed triples ``[X_i, X_j] = value X_k`` need to be given; the
antisymmetric partner is filled in.
"""
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .algebra import Ideal, LieAlgebra
from .errors import InputError

SELECTION_RULES = ("all", "integer_spin", "u2")


def _fraction_inverse(M):
    n = len(M)
    a = [[Fraction(int(M[i][j])) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
         for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise InputError("lattice generator matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


@dataclass(frozen=True, eq=False)
class TorusLattice:
    """Lattice in the center, given by integer generator columns.

    ``dual`` holds the dual basis as exact rationals: row ``i`` is ``nu_i`` in
    center coordinates, with ``nu_i(gen_j) = delta_ij``.
    """

    generators: np.ndarray
    dual: Tuple[Tuple[Fraction, ...], ...] = ()

    def __post_init__(self):
        gen = np.atleast_2d(np.asarray(self.generators))
        if gen.ndim != 2 or gen.shape[0] != gen.shape[1]:
            raise InputError("lattice must be a square integer matrix")
        if not np.all(np.equal(np.mod(gen, 1), 0)):
            raise InputError("lattice generators must have integer coordinates")
        gen = gen.astype(np.int64)
        gen.setflags(write=False)
        object.__setattr__(self, "generators", gen)
        inv = _fraction_inverse(gen.tolist())
        object.__setattr__(self, "dual", tuple(tuple(r) for r in inv))

    @property
    def rank(self):
        return self.generators.shape[0]

    @property
    def dual_matrix(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.dual]).reshape(self.rank, self.rank)

    def check_duality(self):
        k = self.rank
        gen = self.generators.tolist()
        for i in range(k):
            for j in range(k):
                s = sum(self.dual[i][a] * gen[a][j] for a in range(k))
                if s != (1 if i == j else 0):
                    return False
        return True

    def covector(self, coeffs) -> np.ndarray:
        """``mu = sum_i coeffs_i nu_i`` as a row vector in center coordinates."""
        coeffs = np.asarray(coeffs, dtype=np.int64)
        if coeffs.shape != (self.rank,):
            raise InputError(f"character needs {self.rank} integer coefficients")
        return coeffs.astype(np.float64) @ self.dual_matrix


@dataclass(frozen=True, eq=False)
class GroupModel:
    algebra: LieAlgebra
    lattice: Optional[TorusLattice] = None
    selection: str = "all"
    name: str = ""

    def __post_init__(self):
        if self.selection not in SELECTION_RULES:
            raise InputError(f"selection must be one of {SELECTION_RULES}, got {self.selection!r}")
        k = self.algebra.center_dim
        if k and self.lattice is None:
            object.__setattr__(self, "lattice", TorusLattice(np.eye(k, dtype=np.int64)))
        if self.lattice is not None and self.lattice.rank != k:
            raise InputError(f"lattice rank {self.lattice.rank} does not match center dimension {k}")
        if self.selection == "u2" and (len(self.algebra.simple_ideals) != 1 or k != 1):
            raise InputError("the u2 selection rule needs exactly one simple ideal and a 1-dim center")

    @property
    def is_simple(self):
        return self.algebra.is_simple

    def admits(self, spins, char) -> bool:
        """Whether the irrep with these labels descends to the group."""
        if self.selection == "integer_spin":
            return all(Fraction(j).denominator == 1 for j in spins)
        if self.selection == "u2":
            return (int(2 * Fraction(spins[0])) + int(char[0])) % 2 == 0
        return True

    def to_json(self):
        alg = self.algebra
        c = alg.structure_constants
        triples = []
        for i, j, k in zip(*np.nonzero(c)):
            if i < j:
                triples.append([int(i) + 1, int(j) + 1, int(k) + 1, float(c[i, j, k])])
        return {
            "dim": alg.dim,
            "structure_constants": triples,
            "ideals": [{"range": [I.lo + 1, I.hi], "kind": I.kind} for I in alg.ideals],
            "lattice": self.lattice.generators.tolist() if self.lattice is not None else [],
            "selection": self.selection,
        }


def _su2_constants(offset=0, m=3):
    c = np.zeros((m, m, m))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[offset + i, offset + j, offset + k] = 1.0
        c[offset + j, offset + i, offset + k] = -1.0
    return c


def _build(name, simple_count, k, selection="all"):
    m = 3 * simple_count + k
    c = np.zeros((m, m, m))
    ideals = []
    for s in range(simple_count):
        c += _su2_constants(3 * s, m)
        ideals.append(Ideal(3 * s, 3 * s + 3, "simple"))
    if k:
        ideals.append(Ideal(3 * simple_count, m, "center"))
    alg = LieAlgebra(m, c, tuple(ideals), name=name)
    return GroupModel(alg, selection=selection, name=name)


PRESET_NAMES = ("su2", "so3", "t1", "t2", "su2xt1", "su2xsu2", "u2")


def preset(name: str) -> GroupModel:
    """Built-in group; the su(2) factors use ``[X1, X2] = X3`` and cyclic."""
    table = {
        "su2": (1, 0, "all"),
        "so3": (1, 0, "integer_spin"),
        "t1": (0, 1, "all"),
        "t2": (0, 2, "all"),
        "su2xt1": (1, 1, "all"),
        "su2xsu2": (2, 0, "all"),
        "u2": (1, 1, "u2"),
    }
    if name not in table:
        raise InputError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    return _build(name, *table[name])


def group_from_json(data, source="<group>") -> GroupModel:
    def field(key, default=None, required=True):
        if key not in data:
            if required:
                raise InputError(f"{source}: missing field '{key}'")
            return default
        return data[key]

    if not isinstance(data, dict):
        raise InputError(f"{source}: group definition must be a JSON object")
    m = field("dim")
    if not isinstance(m, int) or m < 1:
        raise InputError(f"{source}: field 'dim' must be a positive integer")
    c = np.zeros((m, m, m))
    for n, entry in enumerate(field("structure_constants")):
        if not (isinstance(entry, list) and len(entry) == 4):
            raise InputError(f"{source}: structure_constants[{n}] must be [i, j, k, value]")
        i, j, k, v = entry
        if not all(isinstance(x, int) and 1 <= x <= m for x in (i, j, k)):
            raise InputError(f"{source}: structure_constants[{n}] indices must be integers in 1..{m}")
        if i == j:
            raise InputError(f"{source}: structure_constants[{n}] has i == j")
        c[i - 1, j - 1, k - 1] = float(v)
        c[j - 1, i - 1, k - 1] = -float(v)
    ideals = []
    for n, entry in enumerate(field("ideals")):
        try:
            lo, hi = entry["range"]
            kind = entry["kind"]
        except (KeyError, TypeError, ValueError):
            raise InputError(f"{source}: ideals[{n}] must be {{range: [lo, hi], kind: ...}}") from None
        ideals.append(Ideal(int(lo) - 1, int(hi), kind))
    try:
        alg = LieAlgebra(m, c, tuple(ideals), name=data.get("name", ""))
    except InputError as exc:
        raise InputError(f"{source}: {exc}") from None
    lat = field("lattice", None, required=False)
    lattice = None
    if lat:
        try:
            lattice = TorusLattice(np.array(lat))
        except InputError as exc:
            raise InputError(f"{source}: field 'lattice': {exc}") from None
    try:
        return GroupModel(alg, lattice, field("selection", "all", required=False), data.get("name", ""))
    except InputError as exc:
        raise InputError(f"{source}: {exc}") from None


def load_group(spec: str) -> GroupModel:
    """Preset name or path to a JSON definition file."""
    if spec in PRESET_NAMES:
        return preset(spec)
    path = Path(spec)
    if not path.exists():
        raise InputError(f"no preset or file named {spec!r}")
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return group_from_json(data, str(path))
