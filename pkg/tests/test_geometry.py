"""Periodic Cartesian meshes."""
import numpy as np
import pytest

from pndg.errors import InputError
from pndg.geometry import build_mesh


def test_1d_wrap():
    mesh = build_mesh(1, 4)
    assert mesh.n_elements == 4 and mesh.n_faces == 4
    assert mesh.shift(0, +1)[3] == 0
    assert mesh.neighbor(0, 0) == (3, 1)
    assert mesh.neighbor(3, 1) == (0, 0)


def test_2d_counts_and_wrap():
    mesh = build_mesh(2, (3, 2))
    assert mesh.n_elements == 6 and mesh.n_faces == 12
    assert len(mesh.faces) == 12
    e = mesh.element_of((2, 1))
    assert mesh.neighbor(e, 1) == (mesh.element_of((0, 1)), 0)


def test_single_cell_is_its_own_neighbour():
    mesh = build_mesh(1, 1)
    assert mesh.neighbor(0, 0) == (0, 1)
    assert mesh.neighbor(0, 1) == (0, 0)


@pytest.mark.parametrize("d, cells", [(1, 7), (2, (4, 3)), (2, 5)])
def test_neighbor_involution(d, cells):
    mesh = build_mesh(d, cells)
    for e in range(mesh.n_elements):
        for f in range(2 * d):
            other, g = mesh.neighbor(e, f)
            assert mesh.neighbor(other, g) == (e, f)
            assert np.array_equal(mesh.normal(f), -mesh.normal(g))


def test_volumes_sum_to_one():
    mesh = build_mesh(2, (3, 7))
    assert mesh.element_volume * mesh.n_elements == pytest.approx(1.0, abs=1e-15)


def test_every_element_has_two_faces_per_axis():
    mesh = build_mesh(2, (3, 4))
    counts = np.zeros(mesh.n_elements, dtype=int)
    for low, high, _ in mesh.faces:
        counts[low] += 1
        counts[high] += 1
    assert np.all(counts == 4)


def test_locate_and_reference_map():
    mesh = build_mesh(2, (4, 2))
    x = np.array([[0.3, 0.9], [1.05, -0.2]])
    e = mesh.locate(x)
    assert e[0] == mesh.element_of((1, 1))
    assert e[1] == mesh.element_of((0, 1))
    ref = mesh.to_reference(e[0], x[:1])
    assert np.all(np.abs(ref) <= 1)


@pytest.mark.parametrize("d, cells", [(1, 0), (2, (3, 0)), (3, 2), (2, (1, 2, 3)), (1, 1.5)])
def test_invalid_meshes(d, cells):
    with pytest.raises(InputError):
        build_mesh(d, cells)


def test_invalid_neighbor_queries():
    mesh = build_mesh(1, 3)
    with pytest.raises(InputError):
        mesh.neighbor(3, 0)
    with pytest.raises(InputError):
        mesh.neighbor(0, 2)
