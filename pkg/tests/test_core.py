import numpy as np
import pytest
from hypothesis import given, strategies as st

from symgue.core import (EnsembleSpec, HermitianMatrix, IndexDomainError, InvalidSpecError,
                         PreconditionError, Spectrum, SymmetryClass, mirror_index, pos, site,
                         sites, validate_spec)


def test_pos_examples():
    assert [pos(x, 2) for x in (-2, -1, 1, 2)] == [0, 1, 2, 3]
    assert list(sites(2)) == [-2, -1, 1, 2]


@pytest.mark.parametrize("x", [0, 3, -3])
def test_pos_rejects_out_of_domain(x):
    with pytest.raises(IndexDomainError):
        pos(x, 2)


@given(st.integers(1, 50), st.data())
def test_pos_site_roundtrip_and_mirror(n, data):
    p = data.draw(st.integers(0, 2 * n - 1))
    x = site(p, n)
    assert pos(x, n) == p
    assert mirror_index(n)[p] == pos(-x, n)


@pytest.mark.parametrize("text,expected", [
    ("Plain", SymmetryClass.PLAIN), ("flip1", SymmetryClass.FLIP1), ("2", SymmetryClass.CENTRAL2),
    ("ROWMIRROR3", SymmetryClass.ROWMIRROR3), ("Quarter4", SymmetryClass.QUARTER4),
])
def test_class_parse(text, expected):
    assert SymmetryClass.parse(text) is expected


def test_class_parse_rejects_unknown():
    with pytest.raises(InvalidSpecError, match="invalid-class"):
        SymmetryClass.parse("Sym5")


@pytest.mark.parametrize("n", [0, -1, 1.5, True])
def test_spec_rejects_bad_size(n):
    with pytest.raises(InvalidSpecError, match="invalid-size"):
        validate_spec(EnsembleSpec("Plain", n))


def test_spec_masks_seed_and_variance():
    spec = EnsembleSpec("Flip1", 4, -1)
    assert spec.master_seed == 2 ** 64 - 1
    assert spec.side == 8 and spec.entry_variance == 1 / 8


def test_hermitian_matrix_access_and_readonly():
    a = np.array([[1, 2 + 1j], [2 - 1j, 3]])
    w = HermitianMatrix.from_array(a)
    assert w[-1, 1] == 2 + 1j and w[1, -1] == 2 - 1j
    assert w.hermiticity_defect() == 0.0
    with pytest.raises(ValueError):
        w.entries[0, 0] = 5
    with pytest.raises(PreconditionError):
        HermitianMatrix.from_array([[0, 1], [2, 0]])
    with pytest.raises(PreconditionError):
        HermitianMatrix.from_array(np.eye(3))


def test_spectrum_validation():
    s = Spectrum([-1.0, 0.0, 0.5, 2.0])
    assert s.n == 2 and s.size == 4
    with pytest.raises(PreconditionError):
        Spectrum([1.0, 0.0])
    with pytest.raises(PreconditionError):
        Spectrum([0.0, 1.0, 2.0])
