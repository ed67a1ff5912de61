"""
Test suite for the Mesh application

This module contains test cases for space-time geometry: tagged simplex
bisection, prisms and their atomic anisotropic split, partitions and the
JSON interchange of partitions.

Key areas tested:
- Maubach bisection of tagged simplices and its error cases
- Shape regularity and similarity classes under repeated bisection
- Atomic split combinatorics (child counts, levels, measure conservation)
- Anisotropy preservation across refinement rounds
- Partition bookkeeping, overlap rejection and point location
- Partition serialization

Test Structure:
- TestSimplexBisection: tagged bisection of simplices
- TestAtomicSplit: split counts and prism children
- TestPartition: partition statistics and refinement
- TestPartitionSerializer: JSON representation and parsing
"""

import math

import numpy as np
import pytest

from Mesh.geometry import (
    Degenerate, EmptyPartition, Interval, InvalidTag, Partition, Prism, Simplex,
    anisotropy_ratio, bisect_simplex, kuhn_mesh, kuhn_simplices, partition_kappa,
    shape_kappa, similarity_classes, split_count, split_prism, time_level, uniform_refine,
)
from Mesh.serializer import PartitionSerializer


def refine_all(P, s1, s2, rounds):
    """Atomically split every element of P `rounds` times."""
    for _ in range(rounds):
        P = P.refined({el.key: split_prism(el, s1, s2) for el in P.elements})
    return P


class TestSimplexBisection:
    """
    Test cases for Maubach bisection of tagged simplices

    This class tests:
    - Children geometry and tags
    - Rejection of invalid tags
    - Bounded number of similarity classes
    """

    def test_triangle_children(self):
        """
        Test bisection of a tagged triangle

        Purpose: Verify that bisecting a Kuhn triangle halves its area and
        produces children with the decremented tag.

        What it tests:
        - The bisection edge (x0, x_tag) is halved
        - Each child has half the parent's area
        - Tags wrap from 1 to d
        """
        S = Simplex([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]], tag=2)
        first, second = bisect_simplex(S)

        assert math.isclose(first.volume, 0.25)  # half of 1/2
        assert math.isclose(second.volume, 0.25)  # half of 1/2
        assert first.tag == 1 and second.tag == 1  # tag 2 → 1
        assert first.level == 1  # one bisection deeper
        assert np.allclose(first.vertices[2], [0.5, 0.5])  # midpoint of (x0, x2)

        grandchild, _ = bisect_simplex(first)
        assert grandchild.tag == 2  # tag 1 wraps to d

    def test_invalid_tags_rejected(self):
        """
        Test that tags outside [1, d] raise InvalidTag

        Purpose: Ensure a tag selecting no edge is reported instead of
        producing a wrong split.

        What it tests:
        - Tag 0 raises InvalidTag
        - Tag d+1 raises InvalidTag
        """
        with pytest.raises(InvalidTag):
            bisect_simplex(Simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], tag=0))
        with pytest.raises(InvalidTag):
            bisect_simplex(Simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], tag=3))

    def test_degenerate_input(self):
        """
        Test degenerate geometry errors

        Purpose: Empty intervals and wrongly shaped vertex arrays are refused.

        What it tests:
        - Interval with a ≥ b raises Degenerate
        - Simplex with d+2 vertices raises Degenerate
        """
        with pytest.raises(Degenerate):
            Interval(1.0, 1.0)
        with pytest.raises(Degenerate):
            Simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])

    def test_similarity_classes_bounded(self):
        """
        Test that repeated bisection yields finitely many shapes

        Purpose: Verify the shape regularity of Maubach bisection on Kuhn
        simplices.

        What it tests:
        - In 2D every descendant of a Kuhn triangle is similar to it
        - In 3D the number of classes stays small after 9 rounds
        - κ of descendants stays within a fixed factor of the root's κ
        """
        triangle = kuhn_simplices(2)[0]
        descendants = uniform_refine(triangle, 6)
        assert len(descendants) == 64  # 2^6 children
        assert len(similarity_classes(descendants)) == 1  # all right isosceles

        tetra = kuhn_simplices(3)[0]
        descendants = uniform_refine(tetra, 9)
        assert len(similarity_classes(descendants)) <= 6  # finitely many shapes
        kappa0 = shape_kappa(tetra)
        assert max(shape_kappa(S) for S in descendants) <= 4.0 * kappa0  # shape preserved


class TestAtomicSplit:
    """
    Test cases for the atomic anisotropic split of prisms

    This class tests:
    - The ceiling-difference split count
    - Child counts 2^{m+1}
    - Level identities and measure conservation
    """

    def test_split_count_sequences(self):
        """
        Test temporal bisection counts m for known parameter choices

        Purpose: Verify m = ⌈n s2/(s1 d)⌉ - ⌈(n-1) s2/(s1 d)⌉.

        What it tests:
        - d=2, s2=4 s1 gives m=2 at every level
        - d=1, s1=s2 gives m=1 at every level
        - d=1, s2/s1=1/2 alternates 1, 0, 1, 0
        """
        assert [split_count(n, 1.0, 4.0, 2) for n in range(1, 7)] == [2] * 6  # constant 2
        assert [split_count(n, 1.0, 1.0, 1) for n in range(1, 7)] == [1] * 6  # constant 1
        assert [split_count(n, 1.0, 0.5, 1) for n in range(1, 5)] == [1, 0, 1, 0]  # alternating

    def test_child_counts(self):
        """
        Test the number of children per split

        Purpose: Verify that an atomic split produces 2^{m+1} prisms.

        What it tests:
        - d=2, s2=4 s1: exactly 8 children at every level along a chain
        - d=1, s2/s1=1/2: child counts 4, 2, 4, 2
        """
        element = kuhn_mesh(2).elements[0]
        for _ in range(5):
            children = split_prism(element, 1.0, 4.0)
            assert len(children) == 8  # 4 temporal × 2 spatial
            element = children[-1]

        element = kuhn_mesh(1).elements[0]
        counts = []
        for _ in range(4):
            children = split_prism(element, 1.0, 0.5)
            counts.append(len(children))
            element = children[0]
        assert counts == [4, 2, 4, 2]  # 2^{m+1} with m = 1, 0, 1, 0

    def test_levels_and_measure(self):
        """
        Test level identities and measure conservation

        Purpose: Every child satisfies ℓ(S) = ℓ(J×S) and
        ℓ(J) = ⌈ℓ(J×S) s2/(s1 d)⌉, and children tile the parent.

        What it tests:
        - Level identity for all elements after 3 uniform rounds (d=2)
        - Sum of child measures equals the parent's measure
        - Child keys extend the parent's key
        """
        s1, s2 = 1.0, 4.0
        P = refine_all(kuhn_mesh(2, aniso_params=(s1, s2)), s1, s2, 3)
        for el in P.elements:
            assert el.level_identity_holds(s1, s2)  # exact integer identity
            assert el.time.level == time_level(el.level, s1, s2, 2)  # ceiling formula
        assert math.isclose(P.measure(), 1.0, rel_tol=1e-14)  # unit cylinder

        parent = kuhn_mesh(2).elements[1]
        children = split_prism(parent, s1, s2)
        total = math.fsum(child.measure for child in children)
        assert math.isclose(total, parent.measure, rel_tol=1e-14)  # tiling
        assert all(child.key[:-1] == parent.key for child in children)  # stable ids

    def test_anisotropy_preserved(self):
        """
        Test anisotropy preservation over 10 rounds

        Purpose: |J|/|S|^{s2/(s1 d)} stays within a fixed factor of the
        root value along every refinement path.

        What it tests:
        - Ratio to the root value within a factor 4 over 10 rounds (d=1, s2/s1=1/2)
        - a(P) of a uniformly refined partition within a factor 4 of a(P0)
        """
        s1, s2 = 1.0, 0.5
        root = kuhn_mesh(1).elements[0]
        reference = root.aniso_value(s1, s2)
        element = root
        for _ in range(10):
            element = split_prism(element, s1, s2)[-1]
            ratio = element.aniso_value(s1, s2) / reference
            assert 0.25 <= ratio <= 4.0  # bounded drift

        P0 = kuhn_mesh(2, aniso_params=(1.0, 4.0))
        P = refine_all(P0, 1.0, 4.0, 2)
        assert anisotropy_ratio(P) <= 4.0 * anisotropy_ratio(P0)  # a(P) ≲ a(P0)
        assert partition_kappa(P) <= 2.0 * partition_kappa(P0)  # κ_P ≲ κ_P0


class TestPartition:
    """
    Test cases for partitions of space-time cylinders

    This class tests:
    - Kuhn meshes as initial partitions
    - Point location
    - Statistics and error cases
    """

    def test_kuhn_mesh(self):
        """
        Test the Kuhn initial partition

        Purpose: Verify that kuhn_mesh covers [0,1]×[0,1]^d with d! prisms.

        What it tests:
        - Element count d!
        - Total measure 1
        - Every root carries tag d
        """
        for d in (1, 2, 3):
            P = kuhn_mesh(d)
            assert len(P) == math.factorial(d)  # d! Kuhn simplices
            assert math.isclose(P.measure(), 1.0, rel_tol=1e-12)  # unit cylinder
            assert all(el.space.tag == d for el in P.elements)  # well-labeled roots

    def test_locate_and_refined(self):
        """
        Test point location after refinement

        Purpose: Every point of the cylinder is owned by exactly one
        element after refinement, and lookups by key work.

        What it tests:
        - locate() returns a valid owner for interior points
        - The owner contains the point
        - __getitem__ by key
        """
        P = refine_all(kuhn_mesh(2), 1.0, 1.0, 2)
        rng = np.random.default_rng(3)
        t = rng.uniform(0, 1, 50)
        x = rng.uniform(0, 1, (50, 2))
        owner = P.locate(t, x)
        assert np.all(owner >= 0)  # every point is covered
        for i in range(50):
            el = P.elements[owner[i]]
            assert el.contains(t[i], x[i]).all()  # the owner contains the point
            assert P[el.key] is el  # lookup by key

    def test_stats(self):
        """
        Test partition statistics

        Purpose: stats() reports counts and levels; empty partitions raise.

        What it tests:
        - Level histogram after one round
        - EmptyPartition for statistics of an empty partition
        """
        P = refine_all(kuhn_mesh(1), 1.0, 1.0, 1)
        stats = P.stats()
        assert stats['elements'] == 4  # 2 temporal × 2 spatial
        assert stats['levels'] == {1: 4}  # all at level 1
        with pytest.raises(EmptyPartition):
            Partition([]).stats()

    def test_overlapping_elements_rejected(self):
        """
        Test that overlapping prisms cannot form a partition

        Purpose: Two elements whose measures add up to the cylinder but whose
        interiors intersect must not pass as a cover.

        What it tests:
        - Degenerate is raised naming both element ids
        - Prisms that only share a facet are accepted
        - Refinement skips the scan and still yields a valid partition
        """
        J = Interval(0.0, 1.0)
        lower = Simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], tag=2)
        shifted = Simplex([[0.2, 0.0], [1.2, 0.0], [0.2, 1.0]], tag=2)
        upper = Simplex([[1.0, 1.0], [0.0, 1.0], [1.0, 0.0]], tag=2)
        overlapping = [Prism(J, lower, key=(0,)), Prism(J, shifted, key=(1,))]
        assert math.isclose(sum(el.measure for el in overlapping), 1.0)  # measure alone looks fine
        with pytest.raises(Degenerate, match="0 and 1"):
            Partition(overlapping)

        P = Partition([Prism(J, lower, key=(0,)), Prism(J, upper, key=(1,))])
        assert len(P) == 2  # shared diagonal is not an overlap
        refined = refine_all(P, 1.0, 1.0, 1)
        assert len(Partition(refined.elements)) == len(refined)  # children tile the parent


class TestPartitionSerializer:
    """
    Test cases for partition JSON interchange

    This class tests:
    - Representation fields
    - Parsing back into a Partition
    - Validation errors
    """

    def test_representation_and_parse(self):
        """
        Test representing and parsing a refined partition

        Purpose: Verify that a partition written to JSON is read back with the
        same elements, ids and levels.

        What it tests:
        - Representation keys
        - Parsed element ids match the original
        - Parsed prisms keep their levels and tags
        """
        P = refine_all(kuhn_mesh(2, aniso_params=(1.0, 2.0)), 1.0, 2.0, 1)
        data = PartitionSerializer(P).data
        assert set(data) == {'d', 'aniso_params', 'elements', 'root'}  # documented keys

        serializer = PartitionSerializer(data=data)
        assert serializer.is_valid(), serializer.errors  # valid input
        parsed = serializer.save()
        assert [el.element_id for el in parsed] == [el.element_id for el in P]  # same ids
        assert [el.level for el in parsed] == [el.level for el in P]  # same levels
        assert parsed.aniso_params == (1.0, 2.0)  # smoothness pair kept

    def test_invalid_vertices(self):
        """
        Test validation of vertex counts

        Purpose: An element whose vertex count does not match d is rejected.

        What it tests:
        - is_valid() is False
        - The error names the elements field
        """
        data = PartitionSerializer(kuhn_mesh(2)).data
        data['elements'][0]['vertices'] = [[0.0, 0.0], [1.0, 0.0]]
        serializer = PartitionSerializer(data=data)
        assert not serializer.is_valid()  # rejected
        assert 'elements' in serializer.errors  # field-level message

    def test_missing_ids_use_position(self):
        """
        Test parsing elements that carry no id

        Purpose: Elements without an id must keep distinct keys instead of
        collapsing onto one default key.

        What it tests:
        - Keys follow the list position
        - No element is lost
        """
        data = PartitionSerializer(kuhn_mesh(2)).data
        for entry in data['elements'] + data['root']:
            entry.pop('id')
        serializer = PartitionSerializer(data=data)
        assert serializer.is_valid(), serializer.errors  # ids are optional
        parsed = serializer.save()
        assert [el.key for el in parsed] == [(0,), (1,)]  # positional keys
        assert math.isclose(parsed.measure(), 1.0, rel_tol=1e-12)  # both elements kept

    def test_tag_zero_rejected(self):
        """
        Test the tag range of serialized simplices

        Purpose: Tags count from 1, so a zero-based tag in the input is an
        error rather than a silent off-by-one.

        What it tests:
        - Tag 0 fails validation on the elements field
        """
        data = PartitionSerializer(kuhn_mesh(2)).data
        data['elements'][0]['tag'] = 0
        serializer = PartitionSerializer(data=data)
        assert not serializer.is_valid()  # tag 0 selects no edge
        assert 'elements' in serializer.errors  # reported on the element list
