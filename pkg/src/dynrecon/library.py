"""Candidate term library: ordered monomial bases over the state variables,
feature-matrix evaluation, and conversion of a coefficient matrix into an
executable polynomial vector field."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from math import comb

import numpy as np

from .systems import VectorField

__all__ = [
    "Monomial",
    "Basis",
    "build_basis",
    "evaluate_features",
    "model_rhs",
    "sparsity_report",
    "render_equation",
    "render_equations",
    "monomial_from_label",
]

DEFAULT_NAMES = ("x", "y", "z", "w", "u", "v")


def default_names(n: int) -> tuple[str, ...]:
    if n <= len(DEFAULT_NAMES):
        return DEFAULT_NAMES[:n]
    return tuple(f"x{i + 1}" for i in range(n))


@dataclass(frozen=True)
class Monomial:
    """A product of state variables, identified by its exponent vector."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        if any(e < 0 for e in self.exponents):
            raise ValueError(f"exponents must be non-negative, got {self.exponents}")

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def label(self, names=None) -> str:
        """Render e.g. ``x^2*y``; the empty product renders as ``1``."""
        names = names or default_names(len(self.exponents))
        parts = []
        for name, e in zip(names, self.exponents):
            if e == 1:
                parts.append(name)
            elif e > 1:
                parts.append(f"{name}^{e}")
        return "*".join(parts) if parts else "1"

    def evaluate(self, states: np.ndarray) -> np.ndarray:
        states = np.atleast_2d(np.asarray(states, dtype=float))
        return np.prod(states ** np.asarray(self.exponents), axis=1)


def _mixed_sort_key(exponents: tuple[int, ...], n: int):
    # Two-variable bases conventionally list the lower leading exponent
    # first (x*y^2 before x^2*y); wider bases group by the squared/leading
    # variable (x^2*y, x^2*z, x*y^2, y^2*z, ...) before lower degrees.
    degree = sum(exponents)
    if n == 2:
        return (-degree, exponents)
    max_e = max(exponents)
    return (-degree, -max_e, exponents.index(max_e), tuple(-e for e in exponents))


def build_basis(n: int, m: int, include_constant: bool = False) -> "Basis":
    """Build the ordered monomial basis of total degree 1..m in n variables.

    The canonical order lists pure powers of each variable first (ascending
    degree, variable by variable), then mixed terms by descending total
    degree. The constant term is excluded unless ``include_constant`` is set,
    in which case it is appended last.

    Term count without the constant is C(n+m, m) - 1.
    """
    if n < 1 or m < 1:
        raise ValueError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    pure = []
    for i in range(n):
        for d in range(1, m + 1):
            e = [0] * n
            e[i] = d
            pure.append(tuple(e))
    mixed = [
        e
        for e in itertools.product(range(m + 1), repeat=n)
        if 1 <= sum(e) <= m and np.count_nonzero(e) >= 2
    ]
    mixed.sort(key=lambda e: _mixed_sort_key(e, n))
    terms = [Monomial(e) for e in pure + mixed]
    if include_constant:
        terms.append(Monomial((0,) * n))
    return Basis(n=n, m=m, terms=tuple(terms))


@dataclass(frozen=True)
class Basis:
    """Ordered candidate library of monomials in ``n`` variables up to
    degree ``m``. Construction via :func:`build_basis` is deterministic and
    order-stable across runs and platforms."""

    n: int
    m: int
    terms: tuple[Monomial, ...]

    def __post_init__(self):
        if len({t.exponents for t in self.terms}) != len(self.terms):
            raise ValueError("duplicate terms in basis")

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def p(self) -> int:
        return len(self.terms)

    @property
    def exponent_matrix(self) -> np.ndarray:
        """(p, n) integer matrix of exponents, one row per term."""
        return np.array([t.exponents for t in self.terms], dtype=int)

    def labels(self, names=None) -> list[str]:
        names = names or default_names(self.n)
        return [t.label(names) for t in self.terms]

    def index_of(self, monomial: Monomial) -> int:
        return self.terms.index(monomial)

    def expected_size(self) -> int:
        base = comb(self.n + self.m, self.m) - 1
        return base + (1 if any(t.degree == 0 for t in self.terms) else 0)


def evaluate_features(basis: Basis, states) -> np.ndarray:
    """Evaluate every basis term at every sample: returns the (N, p) matrix
    with entry [k, j] = term_j(states[k]).

    ``states`` may be a Trajectory or an (N, n) array. Computed once per fit
    and reused by every fitness evaluation.
    """
    arr = np.asarray(getattr(states, "states", states), dtype=float)
    arr = np.atleast_2d(arr)
    if arr.shape[1] != basis.n:
        raise ValueError(
            f"state dimension {arr.shape[1]} does not match basis n={basis.n}"
        )
    exps = basis.exponent_matrix
    return np.prod(arr[:, None, :] ** exps[None, :, :], axis=2)


def model_rhs(basis: Basis, coeffs, names=None) -> VectorField:
    """Wrap a (p, n) coefficient matrix as an executable vector field:
    rhs(x) = theta(x) @ coeffs with theta the basis row at state x."""
    c = np.asarray(coeffs, dtype=float)
    if c.ndim == 1:
        c = c[:, None]
    if c.shape[0] != basis.p:
        raise ValueError(f"coefficients have {c.shape[0]} rows, basis has {basis.p}")
    n = c.shape[1]
    if n != basis.n:
        raise ValueError(f"coefficient columns {n} != state dimension {basis.n}")
    exps = basis.exponent_matrix
    c = c.copy()

    def rhs(t: float, state: np.ndarray) -> np.ndarray:
        theta = np.prod(np.asarray(state, dtype=float) ** exps, axis=1)
        return theta @ c

    return VectorField(dimension=n, rhs=rhs, names=tuple(names or default_names(n)))


def sparsity_report(
    basis: Basis, coeffs, tol: float, names=None
) -> list[tuple[str, str, float]]:
    """List the active terms: (equation, term label, value) for every entry
    with |value| > tol, in canonical basis order."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    c = np.asarray(coeffs, dtype=float)
    if c.ndim == 1:
        c = c[:, None]
    names = list(names or default_names(c.shape[1]))
    labels = basis.labels(names)
    out = []
    for j, name in enumerate(names):
        for i, label in enumerate(labels):
            if abs(c[i, j]) > tol:
                out.append((f"d{name}/dt", label, float(c[i, j])))
    return out


def render_equation(basis: Basis, column, name: str, var_names=None) -> str:
    """Human-readable rendering of one state equation, e.g.
    ``dx/dt = -0.1*x + 2*y``. Zero coefficients are omitted; an all-zero
    column renders as ``0``."""
    col = np.asarray(column, dtype=float)
    labels = basis.labels(var_names)
    parts = []
    for value, label in zip(col, labels):
        if value == 0.0:
            continue
        sign = "-" if value < 0 else "+"
        if not parts:
            prefix = "-" if value < 0 else ""
        else:
            prefix = f" {sign} "
        parts.append(f"{prefix}{abs(value):.6g}*{label}")
    body = "".join(parts) if parts else "0"
    return f"d{name}/dt = {body}"


def render_equations(basis: Basis, coeffs, names=None) -> list[str]:
    c = np.asarray(coeffs, dtype=float)
    if c.ndim == 1:
        c = c[:, None]
    names = list(names or default_names(c.shape[1]))
    return [render_equation(basis, c[:, j], names[j], names) for j in range(c.shape[1])]


_LABEL_FACTOR = re.compile(r"^(?P<name>[A-Za-z]\w*)(?:\^(?P<exp>\d+))?$")


def monomial_from_label(label: str, names) -> Monomial:
    """Parse a term label like ``x^2*y`` back into a Monomial over ``names``."""
    names = list(names)
    exponents = [0] * len(names)
    label = label.strip()
    if label == "1":
        return Monomial(tuple(exponents))
    for factor in label.split("*"):
        match = _LABEL_FACTOR.match(factor.strip())
        if match is None:
            raise ValueError(f"cannot parse term factor {factor!r} in {label!r}")
        name = match.group("name")
        if name not in names:
            raise ValueError(f"unknown variable {name!r} in term {label!r}")
        exponents[names.index(name)] += int(match.group("exp") or 1)
    return Monomial(tuple(exponents))
