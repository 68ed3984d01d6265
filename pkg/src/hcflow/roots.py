"""Catalog of Hermitian symmetric factors and explicit su(N) realizations.

The catalog records, for each irreducible compact Hermitian symmetric family,
the complex dimension formula and whether a factor is admissible as a base
factor (complex dimension at least two and not a complex quadric; quadrics
are identified by their presented pair, and the low-rank coincidences with
quadrics are surfaced as notes).

For Grassmannian factors an explicit normalized root-vector basis of
``su(p+q)`` is constructed so that every structural identity used downstream
can be verified from raw matrix brackets: normalized pairing of opposite
root vectors, coroot brackets, the action of the central element on
non-compact roots, and the coroot sum identity that produces the constant
base decay of the flow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import freeze
from .cspace import FactorKind, factor_dimension
from .errors import DimensionTooSmall, InputError, SizeLimit, UnknownType

#: largest su(p+q) realization built explicitly (desk scale)
MAX_REALIZATION_RANK = 8

Root = tuple[int, int]      # (i, j) stands for the functional e_i - e_j


@dataclass(frozen=True)
class CatalogEntry:
    kind: FactorKind
    params: dict
    dim_n: int
    admissible: bool
    reason: str | None = None
    note: str | None = None


@dataclass(frozen=True)
class ResidualReport:
    """Named non-negative residuals of a batch of verified identities."""

    values: dict[str, float]

    @property
    def max_residual(self) -> float:
        return max(self.values.values()) if self.values else 0.0

    def ok(self, tol: float) -> bool:
        return self.max_residual <= tol

    def as_dict(self) -> dict:
        return {"residuals": dict(self.values), "max_residual": self.max_residual}


@dataclass(frozen=True)
class RootRealization:
    """Explicit Chevalley-normalized data for a Grassmannian factor in su(N).

    ``E`` maps every root (compact and non-compact, both signs) to its
    normalized root vector, ``Hco`` to its coroot; ``Z`` is the central
    element of the isotropy algebra acting as the complex structure on the
    non-compact part, and ``kappa_scale = 2N`` fixes the Killing form
    ``kappa(X, Y) = 2N tr(XY)``.
    """

    N: int
    p: int
    q: int
    roots_plus_n: tuple[Root, ...]
    roots_compact: tuple[Root, ...]
    E: dict[Root, np.ndarray]
    Hco: dict[Root, np.ndarray]
    Z: np.ndarray
    kappa_scale: float

    def kappa(self, X: np.ndarray, Y: np.ndarray) -> complex:
        return self.kappa_scale * np.trace(X @ Y)

    @staticmethod
    def root_value(root: Root, v: np.ndarray) -> complex:
        i, j = root
        return v[i, i] - v[j, j]

    def cartan_basis(self) -> list[np.ndarray]:
        """Traceless diagonal basis of the Cartan subalgebra."""
        out = []
        for a in range(self.N - 1):
            d = np.zeros((self.N, self.N), dtype=complex)
            d[a, a] = 1.0
            d[a + 1, a + 1] = -1.0
            out.append(d)
        return out

    def s_part_basis(self) -> list[np.ndarray]:
        """Basis of the complexified semisimple part of the isotropy algebra:
        compact root vectors plus block-traceless diagonals."""
        out = [self.E[r] for r in self.roots_compact]
        for block in (range(self.p), range(self.p, self.N)):
            idx = list(block)
            for a in range(len(idx) - 1):
                d = np.zeros((self.N, self.N), dtype=complex)
                d[idx[a], idx[a]] = 1.0
                d[idx[a + 1], idx[a + 1]] = -1.0
                out.append(d)
        return out


_QUADRIC_COINCIDENCES = {
    (FactorKind.GRASSMANNIAN, (2, 2)):
        "isomorphic to the 4-dimensional complex quadric; admitted by its "
        "Grassmannian presentation",
    (FactorKind.SP_OVER_U, 2):
        "isomorphic to the 3-dimensional complex quadric; admitted by its "
        "symplectic presentation",
    (FactorKind.SO_OVER_U, 4):
        "isomorphic to the 6-dimensional complex quadric; admitted by its "
        "orthogonal presentation",
}


def _coerce_kind(kind) -> FactorKind:
    if isinstance(kind, FactorKind):
        return kind
    try:
        return FactorKind(str(kind).lower())
    except ValueError:
        raise UnknownType(f"unknown Hermitian symmetric factor kind {kind!r}") from None


def catalog_lookup(kind, p: int | None = None, q: int | None = None,
                   n: int | None = None) -> CatalogEntry:
    """Dimension and admissibility of one factor type.

    Quadrics are never admissible; anything of complex dimension below two is
    rejected as well.  Low-rank presentations that happen to coincide with a
    quadric stay admissible but carry an explanatory note.
    """
    kind = _coerce_kind(kind)
    dim = factor_dimension(kind, p=p, q=q, n=n)
    params = {key: val for key, val in (("p", p), ("q", q), ("n", n)) if val is not None}
    if kind is FactorKind.QUADRIC:
        return CatalogEntry(kind, params, dim, False, reason="complex quadric excluded")
    if dim < 2:
        return CatalogEntry(kind, params, dim, False, reason=f"dimension {dim} < 2")
    note = _QUADRIC_COINCIDENCES.get((kind, (p, q) if kind is FactorKind.GRASSMANNIAN else n))
    return CatalogEntry(kind, params, dim, True, note=note)


def catalog_families() -> list[dict]:
    """Family-level catalog rows for reporting."""
    return [
        {"kind": "grassmannian", "space": "SU(p+q)/S(U(p)xU(q))",
         "dim_formula": "p*q", "admissible_when": "p*q >= 2"},
        {"kind": "sp_over_u", "space": "Sp(n)/U(n)",
         "dim_formula": "n(n+1)/2", "admissible_when": "n >= 2"},
        {"kind": "so_over_u", "space": "SO(2n)/U(n)",
         "dim_formula": "n(n-1)/2", "admissible_when": "n >= 3"},
        {"kind": "e_iii", "space": "E6/(Spin(10)U(1))",
         "dim_formula": "16", "admissible_when": "always"},
        {"kind": "e_vii", "space": "E7/(E6 U(1))",
         "dim_formula": "27", "admissible_when": "always"},
        {"kind": "quadric", "space": "SO(n+2)/(SO(n)xSO(2))",
         "dim_formula": "n", "admissible_when": "never (excluded)"},
    ]


def grassmannian_realization(p: int, q: int) -> RootRealization:
    """Explicit normalized root-vector realization of a Grassmannian factor.

    Root vectors start from elementary matrices and are rescaled by
    ``1/sqrt(2N)`` so that opposite root vectors pair to one under the
    Killing form ``2N tr(XY)``; coroots follow as the opposite-pair brackets.
    """
    if p < 1 or q < 1:
        raise InputError(f"need p, q >= 1, got ({p}, {q})")
    if p * q < 2:
        raise DimensionTooSmall(f"Grassmannian({p},{q}) has complex dimension {p * q} < 2")
    N = p + q
    if N > MAX_REALIZATION_RANK:
        raise SizeLimit(f"p+q={N} exceeds the supported realization size "
                        f"{MAX_REALIZATION_RANK}")
    scale = 1.0 / np.sqrt(2.0 * N)
    E: dict[Root, np.ndarray] = {}
    Hco: dict[Root, np.ndarray] = {}
    for i in range(N):
        for j in range(N):
            if i == j:
                continue
            e = np.zeros((N, N), dtype=complex)
            e[i, j] = scale
            E[(i, j)] = freeze(e)
            h = np.zeros((N, N), dtype=complex)
            h[i, i] = 1.0 / (2.0 * N)
            h[j, j] = -1.0 / (2.0 * N)
            Hco[(i, j)] = freeze(h)
    roots_plus_n = tuple((i, j) for i in range(p) for j in range(p, N))
    roots_compact = tuple(
        (i, j) for i in range(N) for j in range(N)
        if i != j and ((i < p) == (j < p)))
    Z = freeze(1j * np.diag([q / N] * p + [-p / N] * q).astype(complex))
    return RootRealization(N=N, p=p, q=q, roots_plus_n=roots_plus_n,
                           roots_compact=roots_compact, E=E, Hco=Hco, Z=Z,
                           kappa_scale=2.0 * N)


def verify_root_identities(r: RootRealization) -> ResidualReport:
    """Check the realization's structural identities from raw brackets.

    Reported residuals (all should vanish to machine precision):

    * ``sum_coroots_vs_center`` -- the non-compact positive coroots sum to
      ``-i/2`` times the central element;
    * ``chevalley_pairing`` -- opposite root vectors pair to one;
    * ``alpha_of_center`` -- every non-compact positive root takes the value
      ``i`` on the central element;
    * ``noncompact_bracket_closure`` -- brackets of two non-compact positive
      root vectors vanish (symmetric-pair property);
    * ``conjugation_pairing`` -- conjugation sends a root vector to minus the
      opposite one;
    * ``coroot_bracket`` -- opposite root vectors bracket to the coroot;
    * ``coroot_pairing`` -- the coroot represents its root under the Killing
      form on the Cartan subalgebra.
    """
    vals: dict[str, float] = {}
    maxabs = lambda a: float(np.max(np.abs(a))) if np.size(a) else 0.0

    acc = np.zeros((r.N, r.N), dtype=complex)
    for root in r.roots_plus_n:
        acc = acc + r.Hco[root]
    vals["sum_coroots_vs_center"] = maxabs(acc + 0.5j * r.Z)

    vals["chevalley_pairing"] = max(
        abs(r.kappa(r.E[root], r.E[(root[1], root[0])]) - 1.0) for root in r.E)
    vals["alpha_of_center"] = max(
        abs(r.root_value(root, r.Z) - 1j) for root in r.roots_plus_n)
    vals["noncompact_bracket_closure"] = max(
        maxabs(r.E[a] @ r.E[b] - r.E[b] @ r.E[a])
        for a in r.roots_plus_n for b in r.roots_plus_n)
    vals["conjugation_pairing"] = max(
        maxabs(-r.E[root].conj().T + r.E[(root[1], root[0])]) for root in r.E)
    vals["coroot_bracket"] = max(
        maxabs(r.E[root] @ r.E[(root[1], root[0])]
               - r.E[(root[1], root[0])] @ r.E[root] - r.Hco[root])
        for root in r.E)
    cartan = r.cartan_basis() + [r.Z]
    vals["coroot_pairing"] = max(
        abs(r.kappa(r.Hco[root], v) - r.root_value(root, v))
        for root in r.E for v in cartan)
    return ResidualReport(values=vals)
