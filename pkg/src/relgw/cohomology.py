"""Finite graded cohomology rings given as data.

A :class:`GradedBasis` stores a basis with real degrees, the Poincare
pairing and cup structure constants.  Classes are sparse rational
combinations of labels (:class:`CohClass`).  Everything is exact.

Sign conventions
----------------
``pairing(a, b)`` is ``integral(a cup b)``.  Odd classes come in ordered
dual pairs ``(a, av)`` with ``pairing(a, av) = +1``, so ``a cup av`` is
``+[pt]`` and ``av cup a`` is ``-[pt]``.  The dual basis element
``dual(x)`` is characterised by ``pairing(y, dual(x)) = [y == x]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

__all__ = [
    "CohomologyError",
    "CohClass",
    "GradedBasis",
    "RestrictionData",
    "BundleGeometry",
    "build_bundle_basis",
    "poincare_dual_label",
    "pushforward",
    "invert_matrix",
    "point",
    "projective_space",
    "curve",
    "formal_surface_pair",
]


class CohomologyError(ValueError):
    """Raised for malformed rings, non-homogeneous input or degenerate pairings."""


def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def invert_matrix(rows):
    """Inverse of a square rational matrix by Gauss-Jordan elimination.

    >>> invert_matrix([[0, 1], [1, 0]])
    [[Fraction(0, 1), Fraction(1, 1)], [Fraction(1, 1), Fraction(0, 1)]]
    """
    n = len(rows)
    a = [[_q(x) for x in r] + [Fraction(int(i == j)) for j in range(n)]
         for i, r in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise CohomologyError("degenerate pairing matrix")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [r[n:] for r in a]


class CohClass:
    """Immutable sparse rational combination of basis labels."""

    __slots__ = ("_items",)

    def __init__(self, coefficients: Mapping[str, object] | Iterable = ()):
        if isinstance(coefficients, Mapping):
            coefficients = coefficients.items()
        acc: dict[str, Fraction] = {}
        for label, c in coefficients:
            acc[label] = acc.get(label, Fraction(0)) + _q(c)
        self._items = tuple(sorted((k, v) for k, v in acc.items() if v != 0))

    @classmethod
    def of(cls, label: str, coeff=1) -> "CohClass":
        return cls({label: coeff})

    @property
    def coefficients(self) -> dict[str, Fraction]:
        return dict(self._items)

    def items(self):
        return self._items

    def labels(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self._items)

    def is_zero(self) -> bool:
        return not self._items

    def __bool__(self):
        return bool(self._items)

    def __add__(self, other: "CohClass") -> "CohClass":
        return CohClass(self._items + other._items)

    def __neg__(self) -> "CohClass":
        return CohClass((k, -v) for k, v in self._items)

    def __sub__(self, other: "CohClass") -> "CohClass":
        return self + (-other)

    def scale(self, c) -> "CohClass":
        c = _q(c)
        return CohClass((k, v * c) for k, v in self._items)

    def __eq__(self, other):
        return isinstance(other, CohClass) and self._items == other._items

    def __hash__(self):
        return hash(self._items)

    def coefficient(self, label: str) -> Fraction:
        return dict(self._items).get(label, Fraction(0))

    def degree(self, basis: "GradedBasis") -> int | None:
        """Common degree of all terms; ``None`` for the zero class."""
        degs = {basis.deg(k) for k, _ in self._items}
        if not degs:
            return None
        if len(degs) > 1:
            raise CohomologyError(f"class {self} is not homogeneous")
        return degs.pop()

    def single(self) -> tuple[Fraction, str] | None:
        """``(c, label)`` if the class is ``c`` times one label."""
        if len(self._items) == 1:
            k, v = self._items[0]
            return v, k
        return None

    def __repr__(self):
        if not self._items:
            return "0"
        return " + ".join(f"{v}*{k}" for k, v in self._items)


@dataclass(frozen=True)
class GradedBasis:
    """A graded ring presented by a basis, pairing and cup constants.

    ``cup`` maps an ordered label pair to the product class; missing pairs
    multiply to zero except those involving the identity.
    """

    labels: tuple[str, ...]
    degrees: Mapping[str, int]
    dim_real: int
    pairing: tuple[tuple[Fraction, ...], ...]
    cup: Mapping[tuple[str, str], CohClass]
    identity: str
    name: str = "ring"
    _index: dict = field(default_factory=dict, compare=False, repr=False)
    _inverse: list = field(default_factory=list, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "degrees", dict(self.degrees))
        object.__setattr__(self, "pairing",
                           tuple(tuple(_q(x) for x in r) for r in self.pairing))
        self._index.update({lab: i for i, lab in enumerate(self.labels)})
        full = {}
        for (a, b), c in dict(self.cup).items():
            full[(a, b)] = c if isinstance(c, CohClass) else CohClass(c)
        for a in self.labels:
            full.setdefault((self.identity, a), CohClass.of(a))
            full.setdefault((a, self.identity), CohClass.of(a))
        object.__setattr__(self, "cup", full)
        self._validate()
        self._inverse.extend(invert_matrix(self.pairing))

    def __hash__(self):
        return hash((self.name, self.labels))

    def _validate(self):
        if len(set(self.labels)) != len(self.labels):
            raise CohomologyError("duplicate labels")
        if self.identity not in self._index:
            raise CohomologyError("identity label missing")
        if self.degrees[self.identity] != 0:
            raise CohomologyError("identity must have degree 0")
        n = len(self.labels)
        if len(self.pairing) != n or any(len(r) != n for r in self.pairing):
            raise CohomologyError("pairing matrix has wrong shape")
        for a in self.labels:
            if not 0 <= self.degrees[a] <= self.dim_real:
                raise CohomologyError(f"degree of {a} out of range")
        for i, a in enumerate(self.labels):
            for j, b in enumerate(self.labels):
                v = self.pairing[i][j]
                da, db = self.degrees[a], self.degrees[b]
                if v and da + db != self.dim_real:
                    raise CohomologyError(f"pairing({a},{b}) violates grading")
                if v != (-1) ** (da * db) * self.pairing[j][i]:
                    raise CohomologyError(f"pairing({a},{b}) violates graded symmetry")
        for (a, b), c in self.cup.items():
            if a not in self._index or b not in self._index:
                raise CohomologyError(f"cup entry ({a},{b}) names unknown label")
            if c and c.degree(self) != self.degrees[a] + self.degrees[b]:
                raise CohomologyError(f"cup({a},{b}) violates grading")
            other = self.cup.get((b, a), CohClass())
            if c != other.scale((-1) ** (self.degrees[a] * self.degrees[b])):
                raise CohomologyError(f"cup({a},{b}) violates the Koszul rule")

    # basic queries -------------------------------------------------------
    def deg(self, label: str) -> int:
        try:
            return self.degrees[label]
        except KeyError:
            raise CohomologyError(f"unknown label {label!r} in {self.name}") from None

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise CohomologyError(f"unknown label {label!r} in {self.name}") from None

    def __contains__(self, label):
        return label in self._index

    def is_odd(self, label: str) -> bool:
        return self.deg(label) % 2 == 1

    def cls(self, label: str, coeff=1) -> CohClass:
        self.index(label)
        return CohClass.of(label, coeff)

    @property
    def one(self) -> CohClass:
        return CohClass.of(self.identity)

    # products and pairing ------------------------------------------------
    def pair(self, a: str, b: str) -> Fraction:
        return self.pairing[self.index(a)][self.index(b)]

    def pair_classes(self, x: CohClass, y: CohClass) -> Fraction:
        return sum((u * v * self.pair(a, b) for a, u in x.items() for b, v in y.items()),
                   Fraction(0))

    def cup_labels(self, a: str, b: str) -> CohClass:
        self.index(a), self.index(b)
        return self.cup.get((a, b), CohClass())

    def product(self, x: CohClass, y: CohClass) -> CohClass:
        acc = CohClass()
        for a, u in x.items():
            for b, v in y.items():
                acc = acc + self.cup_labels(a, b).scale(u * v)
        return acc

    def product_of(self, classes: Iterable[CohClass]) -> CohClass:
        acc = self.one
        for c in classes:
            acc = self.product(acc, c)
        return acc

    def power(self, x: CohClass, m: int) -> CohClass:
        return self.product_of([x] * m)

    def integral(self, x: CohClass) -> Fraction:
        return self.pair_classes(x, self.one)

    def dual(self, label: str) -> CohClass:
        """Dual basis element: ``pair(y, dual(label)) = [y == label]``."""
        j = self.index(label)
        return CohClass((self.labels[i], self._inverse[i][j]) for i in range(len(self.labels)))

    def dual_label(self, label: str) -> tuple[int, str]:
        """``(sign, label')`` with ``dual(label) = sign * label'``."""
        s = self.dual(label).single()
        if s is None or s[0] not in (1, -1):
            raise CohomologyError(f"dual of {label} is not +-1 times a basis label")
        return int(s[0]), s[1]

    def check_frobenius(self) -> list[str]:
        """Labels pairs where ``pair(a, b) != integral(a cup b)``."""
        bad = []
        for a in self.labels:
            for b in self.labels:
                if self.pair(a, b) != self.integral(self.cup_labels(a, b)):
                    bad.append(f"{a},{b}")
        return bad

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        cup = []
        for (a, b), c in sorted(self.cup.items()):
            if a == self.identity or b == self.identity:
                continue
            for k, v in c.items():
                cup.append([a, b, k, str(v)])
        return {
            "name": self.name,
            "labels": list(self.labels),
            "degrees": {k: self.degrees[k] for k in self.labels},
            "dim_real": self.dim_real,
            "pairing": [[str(x) for x in r] for r in self.pairing],
            "cup": cup,
            "identity": self.identity,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "GradedBasis":
        cup: dict[tuple[str, str], dict[str, Fraction]] = {}
        for a, b, k, v in data.get("cup", []):
            cup.setdefault((a, b), {})[k] = Fraction(v)
        return cls(
            labels=tuple(data["labels"]),
            degrees={k: int(v) for k, v in data["degrees"].items()},
            dim_real=int(data["dim_real"]),
            pairing=[[Fraction(x) for x in r] for r in data["pairing"]],
            cup={k: CohClass(v) for k, v in cup.items()},
            identity=data["identity"],
            name=data.get("name", "ring"),
        )


def poincare_dual_label(basis: GradedBasis, label: str) -> CohClass:
    return basis.dual(label)


@dataclass(frozen=True)
class RestrictionData:
    """Restriction ``i^*: H*(V) -> H*(W)`` stored label by label."""

    source: GradedBasis
    target: GradedBasis
    matrix: Mapping[str, CohClass]

    def __post_init__(self):
        m = {a: self.matrix.get(a, CohClass()) for a in self.source.labels}
        for a, img in m.items():
            if img and img.degree(self.target) != self.source.deg(a):
                raise CohomologyError(f"restriction of {a} changes degree")
        object.__setattr__(self, "matrix", m)

    def __hash__(self):
        return hash((self.source, self.target))

    def restrict(self, x: CohClass) -> CohClass:
        acc = CohClass()
        for a, c in x.items():
            acc = acc + self.matrix[a].scale(c)
        return acc

    @property
    def codim_real(self) -> int:
        return self.source.dim_real - self.target.dim_real

    def to_json(self) -> dict:
        return {
            "source_ring": self.source.name,
            "target_ring": self.target.name,
            "matrix": [[str(self.matrix[a].coefficient(b)) for b in self.target.labels]
                       for a in self.source.labels],
        }


def pushforward(r: RestrictionData, a: CohClass) -> CohClass:
    """``i_* a`` on V, fixed by ``pair_V(i_* a, v) = pair_W(a, i^* v)``."""
    V, W = r.source, r.target
    if r.codim_real < 0:
        raise CohomologyError("dimension mismatch: target larger than source")
    for lab in a.labels():
        W.index(lab)
    rhs = [W.pair_classes(a, r.matrix[v]) for v in V.labels]
    inv = V._inverse
    n = len(V.labels)
    # x_u = sum_v rhs_v (P^-1)_{v u}
    return CohClass((V.labels[u], sum((rhs[v] * inv[v][u] for v in range(n)), Fraction(0)))
                    for u in range(n))


# ---------------------------------------------------------------------------
# projective bundles

@dataclass(frozen=True)
class BundleGeometry:
    """``Y = P(L + O)`` over X with sections D0 (for L) and Dinf (for O).

    ``basis`` is the ring of Y on the labels ``x`` and ``D0*x``.  The
    third family ``Dinf*x`` of the spanning set is available through
    :meth:`gamma` as a class.
    """

    base: GradedBasis
    c1L: CohClass
    basis: GradedBasis
    fiber_class_marker: str = "F"

    @property
    def gamma_labels(self) -> tuple[str, ...]:
        b = self.base.labels
        return b + tuple(f"D0*{x}" for x in b) + tuple(f"Dinf*{x}" for x in b)

    def gamma(self, name: str) -> CohClass:
        factor, x = split_factor(name)
        return self.lift(factor, self.base.cls(x))

    def lift(self, factor: str, x: CohClass) -> CohClass:
        """Class ``factor * x`` on Y for ``x`` on X and factor in '', 'D0', 'Dinf'."""
        pulled = CohClass((lab, c) for lab, c in x.items())
        on_d0 = CohClass((f"D0*{lab}", c) for lab, c in x.items())
        if factor == "":
            return pulled
        if factor == "D0":
            return on_d0
        if factor == "Dinf":
            # Dinf = D0 + c1(L) with c1(L) pulled back from X
            return on_d0 + CohClass(self.base.product(x, self.c1L).items())
        raise CohomologyError(f"unknown divisor factor {factor!r}")

    @property
    def D0(self) -> CohClass:
        return self.gamma(f"D0*{self.base.identity}")

    @property
    def Dinf(self) -> CohClass:
        return self.gamma(f"Dinf*{self.base.identity}")

    @property
    def c1L_on_Y(self) -> CohClass:
        return self.lift("", self.c1L)


def split_factor(name: str) -> tuple[str, str]:
    """``'D0*h' -> ('D0', 'h')``; plain labels get the empty factor."""
    if "*" in name:
        f, x = name.split("*", 1)
        if f in ("D0", "Dinf"):
            return f, x
    return "", name


def build_bundle_basis(base: GradedBasis, c1L: CohClass, name: str | None = None) -> BundleGeometry:
    """Cohomology of ``P(L + O)`` with ``D0 * Dinf = 0`` and ``D0 = Dinf - c1(L)``.

    Uses ``H*(Y) = H*(X)[D0] / (D0 * (D0 + c1L))`` with integration
    ``int_Y (x + y D0) = int_X y``.
    """
    if c1L and c1L.degree(base) != 2:
        raise CohomologyError("c1(L) must be homogeneous of degree 2")
    for lab in c1L.labels():
        base.index(lab)
    B = base.labels
    labels = B + tuple(f"D0*{x}" for x in B)
    degrees = {x: base.deg(x) for x in B}
    degrees.update({f"D0*{x}": base.deg(x) + 2 for x in B})

    def on_d0(cls: CohClass) -> CohClass:
        return CohClass((f"D0*{lab}", c) for lab, c in cls.items())

    cup = {}
    for a in B:
        for b in B:
            ab = base.cup_labels(a, b)
            cup[(a, b)] = ab
            cup[(a, f"D0*{b}")] = on_d0(ab)
            # D0 is even so it commutes past a
            cup[(f"D0*{a}", b)] = on_d0(ab)
            cup[(f"D0*{a}", f"D0*{b}")] = on_d0(base.product(ab, c1L)).scale(-1)
    n = len(B)
    pairing = [[Fraction(0)] * (2 * n) for _ in range(2 * n)]
    for i, a in enumerate(B):
        for j, b in enumerate(B):
            ab = base.cup_labels(a, b)
            pairing[i][n + j] = base.integral(ab)
            pairing[n + i][j] = base.integral(ab)
            pairing[n + i][n + j] = -base.integral(base.product(ab, c1L))
    Y = GradedBasis(labels, degrees, base.dim_real + 2, pairing, cup, base.identity,
                    name=name or f"P({base.name})")
    return BundleGeometry(base, c1L, Y)


# ---------------------------------------------------------------------------
# catalog

def point() -> GradedBasis:
    return GradedBasis(("1",), {"1": 0}, 0, [[1]], {}, "1", name="pt")


def projective_space(n: int) -> GradedBasis:
    """``H*(P^n)`` on ``1, h, h2, ..., h{n}``."""
    labels = tuple("1" if i == 0 else ("h" if i == 1 else f"h{i}") for i in range(n + 1))
    degrees = {lab: 2 * i for i, lab in enumerate(labels)}
    pairing = [[int(i + j == n) for j in range(n + 1)] for i in range(n + 1)]
    cup = {(labels[i], labels[j]): CohClass.of(labels[i + j])
           for i in range(1, n + 1) for j in range(1, n + 1) if i + j <= n}
    return GradedBasis(labels, degrees, 2 * n, pairing, cup, "1", name=f"P{n}")


def curve(genus: int) -> GradedBasis:
    """Genus-g curve on ``1, a{g}v, a{g}, ..., a1v, a1, p``.

    The ordering makes the standard order list ``p`` first, then
    ``a1, a1v, a2, a2v, ...`` and the identity last.
    """
    odd = []
    for i in range(genus, 0, -1):
        odd += [f"a{i}v", f"a{i}"]
    labels = ("1", *odd, "p")
    degrees = {"1": 0, "p": 2, **{x: 1 for x in odd}}
    idx = {lab: i for i, lab in enumerate(labels)}
    n = len(labels)
    P = [[Fraction(0)] * n for _ in range(n)]
    P[idx["1"]][idx["p"]] = P[idx["p"]][idx["1"]] = Fraction(1)
    cup = {}
    for i in range(1, genus + 1):
        a, av = f"a{i}", f"a{i}v"
        P[idx[a]][idx[av]] = Fraction(1)
        P[idx[av]][idx[a]] = Fraction(-1)
        cup[(a, av)] = CohClass.of("p")
        cup[(av, a)] = CohClass.of("p", -1)
    return GradedBasis(labels, degrees, 2, P, cup, "1", name=f"C{genus}" if genus else "P1")


def formal_surface_pair(curve_genus: int, self_intersection: int, name: str = "S"):
    """A surface V with simple classes ``1, H, p`` plus formal odd slots.

    W is a genus-g curve with ``W.W = self_intersection`` and ``[W] = H``.
    The degree-1 slots ``e_i`` restrict to ``a_i`` on W; the degree-3 slots
    ``f_i`` are the pushforwards of ``a_i``.  Only the pairing data matter
    for the relative/absolute bookkeeping, so this is a formal model.
    Returns ``(V, W, restriction)``.
    """
    W = curve(curve_genus)
    g = curve_genus
    e = [x for i in range(1, g + 1) for x in (f"e{i}", f"e{i}v")]
    f = [x for i in range(1, g + 1) for x in (f"f{i}", f"f{i}v")]
    labels = ("1", *e, "H", *f, "p")
    degrees = {"1": 0, "H": 2, "p": 4, **{x: 1 for x in e}, **{x: 3 for x in f}}
    idx = {lab: i for i, lab in enumerate(labels)}
    n = len(labels)
    P = [[Fraction(0)] * n for _ in range(n)]

    def setp(a, b, v):
        P[idx[a]][idx[b]] = Fraction(v)
        P[idx[b]][idx[a]] = Fraction(v) * (-1) ** (degrees[a] * degrees[b])

    setp("1", "p", 1)
    setp("H", "H", self_intersection)
    cup = {("H", "H"): CohClass.of("p", self_intersection)}
    for i in range(1, g + 1):
        # pair_V(f_i, e_iv) = pair_W(a_i, a_iv) = 1, pair_V(f_iv, e_i) = -1
        setp(f"f{i}", f"e{i}v", 1)
        setp(f"f{i}v", f"e{i}", -1)
    for i in range(1, g + 1):
        # H . e = i_*(i^* e), the pushforward slot f
        for s in ("", "v"):
            cup[("H", f"e{i}{s}")] = CohClass.of(f"f{i}{s}")
            cup[(f"e{i}{s}", "H")] = CohClass.of(f"f{i}{s}")
    for a in labels:
        for b in labels:
            if degrees[a] % 2 and degrees[b] % 2 and degrees[a] + degrees[b] == 4:
                v = P[idx[a]][idx[b]]
                if v:
                    cup[(a, b)] = CohClass.of("p", v)
    V = GradedBasis(labels, degrees, 4, P, cup, "1", name=name)
    mat = {"1": W.cls("1"), "H": W.cls("p", self_intersection)}
    for i in range(1, g + 1):
        mat[f"e{i}"] = W.cls(f"a{i}")
        mat[f"e{i}v"] = W.cls(f"a{i}v")
    return V, W, RestrictionData(V, W, {k: CohClass(v.items()) for k, v in mat.items()})
