"""Dependency graphs of calculation schemes.

Nodes name theories (a space, simple or full, possibly relative to a
divisor); edges record which rule makes the source depend on the target.
Nothing here computes invariants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "SchemeError",
    "Space",
    "projective",
    "hypersurface",
    "complete_intersection",
    "blowup",
    "TheoryNode",
    "RuleApplication",
    "SchemeDAG",
    "RULE_TAGS",
    "hypersurface_step",
    "hypersurface_closure",
    "blowup_dependencies",
    "theorem3_step",
    "quintic_scheme",
    "QUINTIC_ENDPOINTS",
    "is_known",
]

RULE_TAGS = ("degeneration-step", "Theorem-2", "Theorem-3", "Corollary-1", "Lemma-1")


class SchemeError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Space:
    """A space descriptor; ``params`` are canonical (degrees sorted)."""

    kind: str  # P, S, T, plane_curve, C, CI, points, Bl
    params: tuple = ()

    @property
    def name(self) -> str:
        k, p = self.kind, self.params
        if k == "P":
            return f"P{p[0]}"
        if k in ("S", "T"):
            return f"{k}{p[0]}"
        if k == "plane_curve":
            return f"C{p[0]}"
        if k == "C":
            return f"C({p[0]},{p[1]})"
        if k == "CI":
            return f"CI{p[0]}(" + ",".join(map(str, p[1])) + ")"
        if k == "points":
            return f"{p[0]}pts"
        if k == "Bl":
            v, z = p
            if v == projective(3) and z.kind == "C":
                return f"P3[{z.params[0]},{z.params[1]}]"
            return f"Bl({v.name},{z.name})"
        return f"{k}{p}"

    def __str__(self):
        return self.name

    @property
    def ambient(self) -> tuple[int, tuple[int, ...]] | None:
        """``(r, degrees)`` when the space is a complete intersection in P^r."""
        k, p = self.kind, self.params
        if k == "P":
            return p[0], ()
        if k == "S":
            return 3, (p[0],)
        if k == "T":
            return 4, (p[0],)
        if k == "plane_curve":
            return 2, (p[0],)
        if k == "C":
            return 3, tuple(p)
        if k == "CI":
            return p[0], tuple(p[1])
        return None


def projective(n: int) -> Space:
    if n < 0:
        raise SchemeError("projective dimension must be nonnegative")
    return Space("P", (n,))


def complete_intersection(r: int, degrees: Iterable[int]) -> Space:
    """Generic complete intersection of the given degrees in P^r."""
    degs = tuple(sorted(degrees))
    if any(d < 1 for d in degs):
        raise SchemeError("degrees must be positive")
    if len(degs) > r:
        raise SchemeError("more equations than the ambient dimension")
    if len(degs) == r:
        # finitely many points
        return projective(0)
    if not degs:
        return projective(r)
    if len(degs) == 1:
        d = degs[0]
        if d == 1:
            return projective(r - 1)
        if r == 2:
            return Space("plane_curve", (d,))
        if r == 3:
            return Space("S", (d,))
        if r == 4:
            return Space("T", (d,))
    if r == 3 and len(degs) == 2:
        return Space("C", degs)
    return Space("CI", (r, degs))


def hypersurface(r: int, d: int) -> Space:
    return complete_intersection(r, (d,))


def blowup(V: Space, Z: Space) -> Space:
    return Space("Bl", (V, Z))


@dataclass(frozen=True, order=True)
class TheoryNode:
    space: Space
    flavor: str = "full"  # "simple" or "full"
    relative: Space | None = None

    def __post_init__(self):
        if self.flavor not in ("simple", "full"):
            raise SchemeError(f"unknown flavor {self.flavor!r}")

    @property
    def name(self) -> str:
        body = f"({self.space.name},{self.relative.name})" if self.relative else self.space.name
        return body + ("*" if self.flavor == "simple" else "")

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class RuleApplication:
    source: TheoryNode
    rule: str
    targets: tuple[TheoryNode, ...]
    note: str = ""

    def __post_init__(self):
        if self.rule not in RULE_TAGS:
            raise SchemeError(f"unlabeled or unknown rule {self.rule!r}")
        if not self.targets:
            raise SchemeError("a rule application needs targets")

    def __str__(self):
        return f"{self.source} --{self.rule}--> " + ", ".join(t.name for t in self.targets)


@dataclass
class SchemeDAG:
    applications: list[RuleApplication] = field(default_factory=list)
    terminal_notes: dict[str, str] = field(default_factory=dict)

    def add(self, app: RuleApplication) -> None:
        if any(a.source == app.source for a in self.applications):
            if app in self.applications:
                return
            raise SchemeError(f"{app.source} already has a rule application")
        self.applications.append(app)

    def extend(self, apps: Iterable[RuleApplication]) -> None:
        for a in apps:
            self.add(a)

    @property
    def nodes(self) -> list[TheoryNode]:
        seen = set()
        for a in self.applications:
            seen.add(a.source)
            seen.update(a.targets)
        return sorted(seen, key=lambda n: n.name)

    @property
    def edges(self) -> list[tuple[TheoryNode, str, TheoryNode]]:
        return [(a.source, a.rule, t) for a in self.applications for t in a.targets]

    def sinks(self) -> list[TheoryNode]:
        sources = {a.source for a in self.applications}
        return [n for n in self.nodes if n not in sources]

    def endpoints(self) -> list[str]:
        """Space names of the theories nothing further depends on."""
        return sorted({n.space.name for n in self.sinks()}, key=_endpoint_order)

    def is_acyclic(self) -> bool:
        succ = {}
        for s, _, t in self.edges:
            succ.setdefault(s, []).append(t)
        state: dict = {}

        def visit(n) -> bool:
            if state.get(n) == 1:
                return False
            if state.get(n) == 2:
                return True
            state[n] = 1
            ok = all(visit(m) for m in succ.get(n, ()))
            state[n] = 2
            return ok

        return all(visit(n) for n in self.nodes)

    def to_text(self) -> str:
        lines = [str(a) for a in self.applications]
        lines.append("endpoints: " + ", ".join(self.endpoints()))
        return "\n".join(lines) + "\n"

    def to_dot(self) -> str:
        out = ["digraph scheme {"]
        for n in self.nodes:
            out.append(f'  "{n.name}";')
        for s, rule, t in self.edges:
            out.append(f'  "{s.name}" -> "{t.name}" [label="{rule}"];')
        out.append("}")
        return "\n".join(out) + "\n"

    def to_records(self) -> list[dict]:
        return [{"source": a.source.name, "rule": a.rule, "targets": [t.name for t in a.targets],
                 **({"note": a.note} if a.note else {})} for a in self.applications]


def _endpoint_order(name: str):
    # P3, P2, S2, S3, ..., curves last
    kind = name[0]
    rank = {"P": 0, "S": 1, "T": 2, "C": 3}.get(kind, 4)
    digits = [int(c) for c in name if c.isdigit()]
    return (rank, [-d for d in digits] if kind == "P" else digits, name)


# ---------------------------------------------------------------------------
# known theories

def is_known(space: Space) -> str | None:
    """Citation-style note when the theory counts as previously determined."""
    k, p = space.kind, space.params
    if k == "P":
        return "projective space: localization"
    if k in ("plane_curve", "C") or (k == "CI" and p[0] - len(p[1]) == 1):
        return "curves: fully determined"
    if k == "S" and p[0] <= 3:
        return "rational surface: localization"
    if k == "S" and p[0] == 4:
        return "K3 surface: nonconstant invariants vanish"
    if k == "T" and p[0] <= 2:
        return "3-fold of degree 1 or 2: localization"
    return None


# ---------------------------------------------------------------------------
# rules

def hypersurface_step(X: Space) -> list[RuleApplication]:
    """One degeneration of a hypersurface ``X`` of degree d >= 2 in P^r.

    ``X`` degenerates to ``X1 cup_I X2~`` where X1 has degree d-1, X2 is a
    hyperplane, I has type (d-1, 1) and X2~ is X2 blown up along S of
    type (d, d-1, 1).  The pairs are expanded by Corollary 1 and X2~ by the
    blow-up lemma (eagerly).
    """
    amb = X.ambient
    if amb is None or len(amb[1]) != 1:
        raise SchemeError(f"{X} is not a hypersurface in projective space")
    r, (d,) = amb
    if d < 2:
        raise SchemeError("hypersurface step needs degree >= 2")
    X1 = hypersurface(r, d - 1)
    X2 = projective(r - 1)
    I = hypersurface(r - 1, d - 1)
    S = complete_intersection(r - 1, (d - 1, d))
    # a finite center keeps its point count so different degrees stay distinct
    X2t = blowup(X2, Space("points", ((d - 1) * d,)) if S == projective(0) else S)
    simple = lambda s: TheoryNode(s, "simple")
    full = TheoryNode
    apps = [
        RuleApplication(simple(X), "degeneration-step",
                        (TheoryNode(X1, "simple", I), TheoryNode(X2t, "simple", I))),
        RuleApplication(TheoryNode(X1, "simple", I), "Corollary-1", (simple(X1), full(I))),
        RuleApplication(TheoryNode(X2t, "simple", I), "Corollary-1", (simple(X2t), full(I))),
    ]
    apps.append(_lemma_app(simple(X2t), X2, [I], S,
                           note="expanded eagerly: the pair (X2~, I) also needs the simple theory of X2~"))
    return apps


def hypersurface_closure(X: Space) -> SchemeDAG:
    """Apply :func:`hypersurface_step` until every leaf has degree < 2 or is not a hypersurface."""
    dag = SchemeDAG()
    todo = [X]
    done = set()
    while todo:
        cur = todo.pop()
        if cur in done:
            continue
        done.add(cur)
        amb = cur.ambient
        if amb is None or len(amb[1]) != 1 or amb[1][0] < 2:
            continue
        if cur != X and is_known(cur):
            continue
        apps = hypersurface_step(cur)
        dag.extend(apps)
        todo.append(hypersurface(amb[0], amb[1][0] - 1))
    for n in dag.sinks():
        note = is_known(n.space)
        if note:
            dag.terminal_notes[n.name] = note
    return dag


def _lemma_app(source: TheoryNode, V: Space, divisors: Sequence[Space], Z: Space,
               intersections: Sequence[Space] = (), note: str = "") -> RuleApplication:
    chain = [V, divisors[0], *intersections]
    if Z not in chain:
        chain.append(Z)
    maps = " -> ".join(f"H*({s.name})" for s in chain)
    note = (note + "; " if note else "") + f"restriction maps {maps}"
    return RuleApplication(source, "Lemma-1", tuple(TheoryNode(s) for s in chain), note)


def blowup_dependencies(V: Space, divisors: Sequence[Space], Z: Space | None = None,
                        intersections: Sequence[Space] | None = None) -> RuleApplication:
    """Blow-up lemma: the theory of V blown up along ``Z = W1 cap ... cap Wn``.

    Depends on V, W1, the partial intersections ``W1 cap W2``, ... and Z.
    Partial intersections are computed when V is projective and the W_i
    are hypersurfaces; otherwise pass them explicitly.
    """
    if not divisors:
        raise SchemeError("the blow-up lemma needs at least one divisor")
    n = len(divisors)
    amb = V.ambient
    if intersections is None:
        degs = [_hypersurface_degree(w, amb[0]) for w in divisors] if amb and not amb[1] else [None]
        if None not in degs:
            inter = [complete_intersection(amb[0], degs[:i]) for i in range(2, n + 1)]
        elif n <= 2 and Z is not None:
            inter = [Z] if n == 2 else []
        else:
            raise SchemeError("pass the partial intersections explicitly")
    else:
        inter = list(intersections)
        if len(inter) != n - 1:
            raise SchemeError(f"expected {n - 1} partial intersections")
    if Z is None:
        Z = inter[-1] if inter else divisors[0]
    elif inter and inter[-1] != Z:
        raise SchemeError(f"{Z} is not the intersection of the divisors")
    elif n == 1 and Z != divisors[0]:
        raise SchemeError("with one divisor the center is the divisor itself")
    source = TheoryNode(blowup(V, Z))
    return _lemma_app(source, V, divisors, Z, inter[:-1] if inter else ())


def _hypersurface_degree(w: Space, r: int) -> int | None:
    a = w.ambient
    if a is None:
        return None
    if a == (r - 1, ()):
        return 1
    if a[0] == r and len(a[1]) == 1:
        return a[1][0]
    return None


def theorem3_step(d: int) -> list[RuleApplication]:
    """The 3-fold step ``T_d* -> (T_{d-1}, S_{d-1})*, (P3[d-1,d], S_{d-1})`` with its expansions."""
    if d < 2:
        raise SchemeError("Theorem 3 step needs d >= 2")
    T, Tm = hypersurface(4, d), hypersurface(4, d - 1)
    Sm = hypersurface(3, d - 1)
    Bl = blowup(projective(3), complete_intersection(3, (d - 1, d)))
    pair_simple = TheoryNode(Tm, "simple", Sm)
    pair_bl = TheoryNode(Bl, "full", Sm)
    return [
        RuleApplication(TheoryNode(T, "simple"), "Theorem-3", (pair_simple, pair_bl)),
        RuleApplication(pair_simple, "Theorem-2", (TheoryNode(Tm, "simple"), TheoryNode(Sm))),
        RuleApplication(pair_bl, "Theorem-2", (TheoryNode(Bl), TheoryNode(Sm))),
        blowup_dependencies(projective(3), [hypersurface(3, d - 1), hypersurface(3, d)]),
    ]


def quintic_scheme() -> SchemeDAG:
    """Dependencies for the quintic 3-fold, from T5 down to T1 = P3."""
    dag = SchemeDAG()
    # keep the displayed order: the Theorem 3/2 chain first, then the blow-ups
    chain, blow = [], []
    for d in range(5, 1, -1):
        a = theorem3_step(d)
        chain += a[:2]
        blow += a[2:]
    dag.extend(chain + blow)
    for n in dag.sinks():
        dag.terminal_notes[n.name] = is_known(n.space) or "previously determined"
    return dag


QUINTIC_ENDPOINTS = ("P3", "P2", "S2", "S3", "S4", "C(1,2)", "C(2,3)", "C(3,4)", "C(4,5)")
