import itertools
import random

import pytest

from igusacm.cm_enumerate import (
    PHI,
    PHI_PRIME,
    CMType,
    PPAVTriple,
    check_triple,
    enumerate_ppav,
    polarization_ideal,
    reduce_triple,
    representative_cm_types,
    triples_isomorphic,
)
from igusacm.cmfield import CMFieldSpec, get_field, galois_type

ZETA5 = CMFieldSpec(5, 10, 2)
FIELDS = [ZETA5, CMFieldSpec(8, 4, 1), CMFieldSpec(5, 5, 1), CMFieldSpec(5, 4, 1), CMFieldSpec(17, 5, 1),
          CMFieldSpec(8, 13, 3)]


def test_cm_type_rejects_conjugate_pair():
    with pytest.raises(ValueError):
        CMType((0, 2))
    with pytest.raises(ValueError):
        CMType((1, 3))


def test_representative_types():
    assert representative_cm_types(ZETA5) == [PHI]
    types = representative_cm_types(CMFieldSpec(5, 4, 1))
    assert types == [PHI, PHI_PRIME]
    for t in types:
        ids = set(t.embedding_ids) | set(t.conjugate().embedding_ids)
        assert ids == {0, 1, 2, 3}
    assert PHI_PRIME != PHI.conjugate()


@pytest.mark.parametrize("spec", FIELDS, ids=str)
def test_enumeration(spec):
    triples = enumerate_ppav(spec)
    cg = get_field(spec).class_group()
    factor = 1 if galois_type(spec) == "cyclic" else 2
    assert len(triples) == factor * cg.h1
    for t in triples:
        check_triple(t)
        fld = t.field
        assert t.ideal.is_integral()
        assert fld.is_in_order(t.xi.inverse())
        # exact identity xi O_K = (a abar D)^-1
        assert fld.ideal([t.xi]) == polarization_ideal(t.ideal)
        assert t.cm_type in representative_cm_types(spec)
    for t1, t2 in itertools.combinations(triples, 2):
        if t1.cm_type == t2.cm_type:
            assert not triples_isomorphic(t1, t2)


def test_zeta5_single_small_triple():
    (t,) = enumerate_ppav(ZETA5)
    assert t.xi.bit_size() <= 64
    assert max(b.bit_size() for b in t.basis) <= 64


@pytest.mark.parametrize("spec", FIELDS[2:], ids=str)
def test_scaled_triple_is_isomorphic(spec):
    rng = random.Random(7)
    fld = get_field(spec)
    for t in enumerate_ppav(spec):
        g = fld.from_order_coords([rng.randint(-3, 3) for _ in range(4)])
        if g.is_zero():
            continue
        scaled = PPAVTriple(t.cm_type, t.ideal * g, t.xi / (g * g.conj()))
        check_triple(scaled)
        assert triples_isomorphic(t, scaled)
        red = reduce_triple(scaled)
        check_triple(red)
        assert triples_isomorphic(t, red)
        # reducing again keeps the class and does not grow the data
        again = reduce_triple(red)
        assert triples_isomorphic(red, again)
        assert again.xi.bit_size() <= red.xi.bit_size() + 8
