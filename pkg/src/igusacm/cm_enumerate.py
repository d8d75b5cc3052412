"""One triple (CM type, ideal, polarization) per principally polarized
abelian surface with CM by the maximal order, followed by a size reduction
that keeps the isomorphism class."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .cmfield import (
    CMField,
    CMFieldSpec,
    FieldElement,
    IdealHNF,
    embed,
    galois_type,
    get_field,
    is_principal,
)
from .lattice import lll_gram

# embedding ids: 0 = phi1, 1 = phi2, 2 = conj(phi1), 3 = conj(phi2)
_CONJ = {0: 2, 1: 3, 2: 0, 3: 1}


@dataclass(frozen=True)
class CMType:
    embedding_ids: tuple[int, int]

    def __post_init__(self):
        i, j = self.embedding_ids
        if i == j or j == _CONJ[i]:
            raise ValueError(f"{self.embedding_ids} contains a conjugate pair")

    def conjugate(self) -> CMType:
        return CMType(tuple(sorted(_CONJ[i] for i in self.embedding_ids)))

    def __str__(self):
        names = {0: "phi1", 1: "phi2", 2: "conj(phi1)", 3: "conj(phi2)"}
        return "{" + ", ".join(names[i] for i in self.embedding_ids) + "}"


PHI = CMType((0, 1))
PHI_PRIME = CMType((0, 3))


@dataclass
class PPAVTriple:
    cm_type: CMType
    ideal: IdealHNF
    xi: FieldElement
    basis: list[FieldElement] = field(default_factory=list)

    def __post_init__(self):
        if not self.basis:
            self.basis = lll_ideal_basis(self.ideal)

    @property
    def field(self) -> CMField:
        return self.ideal.field


def representative_cm_types(spec: CMFieldSpec) -> list[CMType]:
    """Representatives of CM types up to automorphisms of K."""
    return [PHI] if galois_type(spec) == "cyclic" else [PHI, PHI_PRIME]


def cm_type_of(xi: FieldElement) -> CMType:
    """Embeddings mapping the totally imaginary xi to the upper half plane."""
    s1, s2 = xi.imaginary_signs()
    if s1 == 0 or s2 == 0:
        raise ValueError("xi has a vanishing embedding")
    return CMType((0 if s1 > 0 else 2, 1 if s2 > 0 else 3))


def polarization_ideal(a: IdealHNF) -> IdealHNF:
    """(a * conj(a) * different)^-1, the ideal that xi must generate."""
    fld = a.field
    return (a * a.conj() * fld.different()).inverse()


def check_triple(t: PPAVTriple) -> None:
    """Raise AssertionError unless t satisfies the defining conditions of a triple."""
    fld = t.field
    if fld.ideal([t.xi]) != polarization_ideal(t.ideal):
        raise AssertionError("xi does not generate (a abar D)^-1")
    if not t.xi.is_totally_imaginary():
        raise AssertionError("xi is not totally imaginary")
    sq = t.xi * t.xi
    if sq.real_signs() != (-1, -1):
        raise AssertionError("xi^2 is not totally negative")
    if cm_type_of(t.xi) != t.cm_type:
        raise AssertionError("CM type does not match the signs of xi")


def enumerate_ppav(spec: CMFieldSpec, reduce: bool = True, class_bound: int = 5000) -> list[PPAVTriple]:
    """A complete list of non-isomorphic triples for the field."""
    spec.validate()
    fld = get_field(spec)
    cg = fld.class_group(class_bound)
    units = fld.fundamental_unit()
    eps = units.epsilon0
    one = fld.one()
    unit_reps = [one, -one, eps, -eps]
    types = representative_cm_types(spec)
    out = []
    for a in cg.representatives:
        gen = is_principal(polarization_ideal(a))
        if gen is None:
            continue
        xi = next((z * gen for z in units.roots_of_unity if (z * gen).is_totally_imaginary()), None)
        if xi is None:
            continue
        for u in unit_reps:
            uxi = u * xi
            t = cm_type_of(uxi)
            if t in types:
                triple = PPAVTriple(t, a, uxi)
                out.append(reduce_triple(triple) if reduce else triple)
    expected = cg.h1 * len(types)
    if len(out) != expected:
        raise ArithmeticError(f"found {len(out)} triples, expected {expected}")
    return out


# ---------------------------------------------------------------------------
# Size reduction


def lll_ideal_basis(a: IdealHNF) -> list[FieldElement]:
    """Basis of the ideal that is LLL-reduced for Tr(x conj(y))."""
    B = a.basis()
    fld = a.field
    G = [[fld.t2(x, y) for y in B] for x in B]
    U = lll_gram(G)
    return [sum((B[j] * U[i][j] for j in range(4) if U[i][j]), FieldElement.from_int(fld.spec, 0))
            for i in range(4)]


def _xi_scaled_gram(t: PPAVTriple, bits: int = 64) -> list[list[int]]:
    """Integer approximation of the Gram matrix of |xi|^(-1/2) O_K under the CM type."""
    fld = t.field
    W = fld.basis_elements
    ids = t.cm_type.embedding_ids
    weights = [1 / abs(complex(embed(fld, t.xi, j, bits))) for j in ids]
    vals = [[complex(embed(fld, w, j, bits)) for j in ids] for w in W]
    G = [[sum((vals[k][e] * vals[l][e].conjugate()).real * weights[e] for e in range(2)) for l in range(4)]
         for k in range(4)]
    scale = 2.0 ** 40 / max(abs(G[k][k]) for k in range(4))
    Gi = [[round(G[k][l] * scale) for l in range(4)] for k in range(4)]
    for k in range(4):
        Gi[k][k] += 4  # keep the rounded form positive definite
    return Gi


def _size(t: PPAVTriple) -> int:
    return max(t.xi.bit_size(), max(x.bit_size() for x in t.basis))


def reduce_triple(t: PPAVTriple) -> PPAVTriple:
    """Replace (a, xi) by (b a, xi / (b conj(b))) for a short b in |xi|^(-1/2) O_K."""
    fld = t.field
    W = fld.basis_elements
    best = PPAVTriple(t.cm_type, t.ideal, t.xi, lll_ideal_basis(t.ideal))
    try:
        U = lll_gram(_xi_scaled_gram(t))
    except ValueError:
        return best
    for row in U:
        b = sum((W[j] * row[j] for j in range(4) if row[j]), FieldElement.from_int(fld.spec, 0))
        if b.is_zero():
            continue
        new_xi = t.xi / (b * b.conj())
        cand = PPAVTriple(t.cm_type, t.ideal * b, new_xi)
        if _size(cand) < _size(best):
            best = cand
        break
    return best


# ---------------------------------------------------------------------------
# Isomorphism test between triples of the same CM type


def triples_isomorphic(t1: PPAVTriple, t2: PPAVTriple) -> bool:
    """Decide whether two triples with equal CM type define isomorphic surfaces.

    For a primitive CM type only the identity automorphism preserves it, so the
    question is whether some gamma has a2 = gamma a1 and xi2 = xi1 / (gamma gammabar).
    """
    if t1.cm_type != t2.cm_type:
        raise ValueError("comparison needs equal CM types")
    fld = t1.field
    q = t2.ideal * t1.ideal.inverse()
    g = is_principal(q)
    if g is None:
        return False
    # remaining freedom: gamma = g * unit; u = xi1 / (xi2 g gbar) must be a square of a unit
    u = t1.xi / (t2.xi * g * g.conj())
    if not u.in_real_subfield():
        return False
    s = u.real_signs()
    if s != (1, 1):
        return False
    eps = fld.fundamental_unit()
    (uu, uv) = u.real_parts()[1]
    val = float(uu) + float(uv) * math.sqrt(fld.spec.delta0)
    m = round(math.log(val) / math.log(eps.real_value()))
    return m % 2 == 0 and u == eps.epsilon0 ** m

