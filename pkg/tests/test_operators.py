import math

import numpy as np
import pytest

from fixlab.banach import LpSpace
from fixlab.domains import Domain
from fixlab.operators import (
    Affine,
    BoxClamp,
    Composition,
    Constant,
    ConvexCombination,
    FixedSet,
    Identity,
    Rotation2D,
    SegmentProjection,
    check_contraction,
    check_nonexpansive,
    check_self_map,
    fixed_set,
)

SP2 = LpSpace(2, 2.0)
SP3 = LpSpace(2, 3.0)
BOX = Domain.box(SP2, [-2, -2], [2, 2])


def test_apply_examples():
    np.testing.assert_array_equal(BoxClamp(SP2, [0, 0], [1, 1])([2.0, -1.0]), [1.0, 0.0])
    np.testing.assert_array_equal(Rotation2D(SP2, math.pi / 2)([1.0, 0.0]), [0.0, 1.0])
    np.testing.assert_allclose(SegmentProjection(SP2, [0, 0], [1, 0])([0.3, 0.7]), [0.3, 0.0], atol=1e-16)


def test_nonexpansive_examples():
    r = check_nonexpansive(Rotation2D(SP2, math.pi / 2), BOX, 2000, 0).ratio
    assert 1 - 1e-12 <= r <= 1 + 1e-12
    assert check_nonexpansive(BoxClamp(SP3, [0, 0], [1, 1]), Domain.box(SP3, [-2, -2], [2, 2]), 2000, 0).ratio <= 1 + 1e-12


def test_rotation_detected_in_l3():
    rot = Rotation2D(SP3, math.pi / 4)
    assert rot.lipschitz is None and not rot.claims_nonexpansive
    x = np.array([math.sqrt(2) / 2, math.sqrt(2) / 2])
    assert SP3.norm(x) == pytest.approx(0.8909, abs=1e-4)
    assert SP3.norm(rot(x)) == pytest.approx(1.0, abs=1e-15)
    chk = check_nonexpansive(rot, Domain.box(SP3, [-1, -1], [1, 1]), 2000, 0)
    assert chk.ratio > 1.05


def test_contraction_examples():
    f = Affine(SP2, 0.5, [0.5, 0.5], lipschitz=0.5)
    assert check_contraction(f, BOX, 2000, 0).ratio <= 0.5 + 1e-12
    assert check_contraction(Constant(SP2, [1, 2]), BOX, 2000, 0).ratio <= 1e-12
    chk = check_contraction(Identity(SP2), BOX, 2000, 0)
    assert chk.ratio == pytest.approx(1.0) and not chk.is_contraction


def test_fixed_set_examples():
    c = np.array([0.3, -0.4])
    fs = fixed_set(Rotation2D(SP2, 1.0, c))
    assert fs.kind == "point"
    np.testing.assert_array_equal(fs.grid()[0], c)
    assert fixed_set(BoxClamp(SP2, [0, 0], [1, 1])).kind == "box"
    seg = fixed_set(SegmentProjection(SP2, [0, 0], [1, 0]))
    assert seg.kind == "segment"
    assert len(seg.grid(101)) == 101
    # theta = 0 fixes everything: the full-rank subspace through the origin
    whole = fixed_set(Rotation2D(SP2, 0.0))
    assert whole.kind == "subspace" and np.linalg.matrix_rank(whole.data[1]) == 2


def _catalog():
    return [
        BoxClamp(SP2, [0, 0], [1, 1]),
        Rotation2D(SP2, 0.7, [0.5, -0.5]),
        SegmentProjection(SP2, [0, 0], [1, 0.5]),
        Affine(SP2, [[0.6, -0.3], [0.2, 0.5]], [0.1, 0], lipschitz=0.8),
        Constant(SP2, [0.2, 0.1]),
        Identity(SP2),
        ConvexCombination(0.3, BoxClamp(SP2, [0, 0], [1, 1]), Rotation2D(SP2, 1.0)),
        Composition(SegmentProjection(SP2, [0, 0], [1, 0]), BoxClamp(SP2, [0, 0], [1, 1])),
    ]


@pytest.mark.parametrize("op", _catalog(), ids=lambda o: o.kind)
def test_claims_hold_and_fixed_points_verify(op):
    assert op.claims_nonexpansive
    assert check_nonexpansive(op, BOX, 10_000, 0).ratio <= 1 + 1e-9
    fs = op.fixed_set()
    if fs.known:
        pts = fs.grid(21)
        if len(pts):
            assert np.max(SP2.norm(op(pts) - pts)) <= 1e-12


def test_composition_fixed_set_is_segment():
    T = Composition(SegmentProjection(SP2, [0, 0], [1, 0]), BoxClamp(SP2, [0, 0], [1, 1]))
    fs = T.fixed_set()
    assert fs.known
    pts = fs.grid(101)
    assert np.max(SP2.norm(T(pts) - pts)) <= 1e-12


def test_affine_certificate_cross_check():
    good = Affine(SP2, [[0.6, -0.3], [0.2, 0.5]], lipschitz=0.8)
    assert good.certificate_consistent
    lying = Affine(SP2, 2.0, lipschitz=1.0)
    assert lying.claims_nonexpansive and not lying.certificate_consistent
    assert not Affine(SP2, 0.5).claims_nonexpansive


def test_segment_projection_claims_only_euclidean():
    assert SegmentProjection(SP3, [0, 0], [1, 0]).lipschitz is None


def test_self_map():
    box = Domain.box(SP2, [0, 0], [1, 1])
    assert check_self_map(BoxClamp(SP2, [0, 0], [1, 1]), box)
    assert not check_self_map(Constant(SP2, [3.0, 3.0]), box)


def test_fixed_set_unknown_and_verified():
    T = Affine(SP2, [[1.0, 0.0], [0.0, 1.0]], lipschitz=1.0)
    assert not fixed_set(T).known
    wrong = FixedSet.point(np.array([5.0, 5.0])).verified(BoxClamp(SP2, [0, 0], [1, 1]))
    assert not wrong.known


def test_operator_errors():
    with pytest.raises(ValueError):
        BoxClamp(SP2, [1, 0], [0, 1])
    with pytest.raises(ValueError):
        ConvexCombination(1.5, Identity(SP2), Identity(SP2))
    with pytest.raises(ValueError):
        Composition(Identity(SP2), Identity(SP3))
    with pytest.raises(ValueError):
        Rotation2D(LpSpace(1, 2.0), 1.0)
