import json

import numpy as np
import pytest

from latticedensity.geometry import (
    Region,
    Ring,
    contains,
    contains_many,
    load_region,
    load_region_csv,
    load_region_geojson,
    region_area,
    ring_area,
    segment_crosses_boundary,
    segments_cross_boundary,
)
from latticedensity.fixtures import blob_region

from helpers import (
    min_edge_distance,
    naive_crosses_boundary,
    winding_inside_region,
    winding_inside_ring,
)

UNIT_SQUARE = Ring(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))
HOLE_CENTERED = Ring(((0.25, 0.25), (0.75, 0.25), (0.75, 0.75), (0.25, 0.75)))


def square_with_hole() -> Region:
    return Region(UNIT_SQUARE, (HOLE_CENTERED,))


def slit_region() -> Region:
    # Unit square with a thin vertical slit hole near x = 0.5.
    slit = Ring(((0.49, 0.05), (0.51, 0.05), (0.51, 0.8), (0.49, 0.8)))
    return Region(UNIT_SQUARE, (slit,))


class TestRingArea:
    def test_unit_square(self):
        assert ring_area(UNIT_SQUARE) == pytest.approx(1.0, abs=1e-15)

    def test_triangle(self):
        tri = Ring(((0.0, 0.0), (2.0, 0.0), (0.0, 2.0)))
        assert ring_area(tri) == pytest.approx(2.0, abs=1e-15)

    def test_l_shaped_hexagon(self):
        # two 1x2 / 2x1 rectangles by hand: total 3
        hexagon = Ring(((0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)))
        assert ring_area(hexagon) == pytest.approx(3.0, abs=1e-15)

    def test_rotation_and_reflection_invariance(self):
        rng = np.random.default_rng(5)
        region = blob_region(11, n_vertices=9)
        verts = list(region.outer.vertices)
        base = ring_area(region.outer)
        for shift in range(1, len(verts)):
            rotated = Ring(tuple(verts[shift:] + verts[:shift]))
            assert ring_area(rotated) == pytest.approx(base, rel=1e-12)
        reflected = Ring(tuple(reversed(verts)))
        assert ring_area(reflected) == pytest.approx(base, rel=1e-12)

    def test_random_12gon_vs_monte_carlo(self):
        region = blob_region(31, n_vertices=12)
        area = ring_area(region.outer)
        xmin, ymin, xmax, ymax = region.outer.bbox
        rng = np.random.default_rng(7)
        pts = np.column_stack(
            [rng.uniform(xmin, xmax, 10**6), rng.uniform(ymin, ymax, 10**6)]
        )
        hits = winding_inside_ring(pts, region.outer.vertices)
        mc = hits.mean() * (xmax - xmin) * (ymax - ymin)
        assert abs(mc - area) / area < 0.01

    def test_too_few_vertices(self):
        with pytest.raises(ValueError):
            Ring(((0.0, 0.0), (1.0, 0.0)))


class TestRingValidation:
    def test_repeated_closure_rejected(self):
        with pytest.raises(ValueError, match="closure"):
            Ring(((0, 0), (1, 0), (1, 1), (0, 0)))

    def test_consecutive_duplicates_rejected(self):
        with pytest.raises(ValueError, match="identical"):
            Ring(((0, 0), (1, 0), (1, 0), (1, 1)))

    def test_bowtie_rejected(self):
        with pytest.raises(ValueError, match="self-intersecting"):
            Ring(((0, 0), (1, 1), (1, 0), (0, 1)))


class TestRegionArea:
    def test_square_with_centered_hole(self):
        assert region_area(square_with_hole()) == pytest.approx(0.75, abs=1e-15)

    def test_square_without_holes(self):
        assert region_area(Region(UNIT_SQUARE)) == pytest.approx(1.0, abs=1e-15)

    def test_hole_exceeding_outer_rejected(self):
        big = Ring(((-1.0, -1.0), (2.0, -1.0), (2.0, 2.0), (-1.0, 2.0)))
        with pytest.raises(ValueError):
            Region(UNIT_SQUARE, (big,))

    def test_overlapping_holes_rejected(self):
        h1 = Ring(((0.2, 0.2), (0.6, 0.2), (0.6, 0.6), (0.2, 0.6)))
        h2 = Ring(((0.4, 0.4), (0.8, 0.4), (0.8, 0.8), (0.4, 0.8)))
        with pytest.raises(ValueError, match="overlap"):
            Region(UNIT_SQUARE, (h1, h2))

    def test_monte_carlo_within_three_standard_errors(self):
        region = square_with_hole()
        xmin, ymin, xmax, ymax = region.bbox
        n = 10**6
        rng = np.random.default_rng(17)
        pts = np.column_stack([rng.uniform(xmin, xmax, n), rng.uniform(ymin, ymax, n)])
        inside = contains_many(region, pts)
        phat = inside.mean()
        box = (xmax - xmin) * (ymax - ymin)
        mc = phat * box
        se = box * np.sqrt(phat * (1 - phat) / n)
        assert abs(mc - region_area(region)) <= 3 * se


class TestContains:
    def test_center_of_square(self):
        assert contains(Region(UNIT_SQUARE), (0.5, 0.5))

    def test_hole_interior_excluded(self):
        assert not contains(square_with_hole(), (0.5, 0.5))

    def test_boundary_points_count_as_inside(self):
        region = square_with_hole()
        assert contains(region, (0.0, 0.5))  # outer edge
        assert contains(region, (0.0, 0.0))  # outer vertex
        assert contains(region, (0.25, 0.5))  # hole edge
        assert contains(region, (0.25, 0.25))  # hole vertex

    def test_outside_bounding_box_rejected(self):
        region = blob_region(3)
        xmin, ymin, xmax, ymax = region.bbox
        rng = np.random.default_rng(8)
        span = max(xmax - xmin, ymax - ymin)
        pts = np.column_stack(
            [
                rng.uniform(xmax + 0.01, xmax + span, 200),
                rng.uniform(ymin - span, ymax + span, 200),
            ]
        )
        assert not contains_many(region, pts).any()

    def test_points_inside_hole_always_outside(self):
        region = square_with_hole()
        rng = np.random.default_rng(9)
        pts = np.column_stack(
            [rng.uniform(0.26, 0.74, 300), rng.uniform(0.26, 0.74, 300)]
        )
        assert not contains_many(region, pts).any()

    @pytest.mark.parametrize(
        "region",
        [Region(UNIT_SQUARE), square_with_hole(), blob_region(23), slit_region()],
        ids=["square", "holed", "blob", "slit"],
    )
    def test_matches_winding_oracle(self, region):
        rng = np.random.default_rng(41)
        xmin, ymin, xmax, ymax = region.bbox
        pts = np.column_stack(
            [rng.uniform(xmin, xmax, 1000), rng.uniform(ymin, ymax, 1000)]
        )
        off_boundary = min_edge_distance(pts, region) > 1e-7
        got = contains_many(region, pts)
        want = winding_inside_region(pts, region)
        assert np.array_equal(got[off_boundary], want[off_boundary])


class TestSegmentCrossing:
    def test_interior_chord_does_not_cross(self):
        assert not segment_crosses_boundary(Region(UNIT_SQUARE), (0.2, 0.2), (0.8, 0.8))

    def test_crossing_slit_detected(self):
        assert segment_crosses_boundary(slit_region(), (0.3, 0.4), (0.7, 0.4))

    def test_segment_along_boundary_edge_does_not_cross(self):
        # collinear overlap with the south edge is not a proper crossing
        assert not segment_crosses_boundary(Region(UNIT_SQUARE), (0.2, 0.0), (0.8, 0.0))

    def test_symmetry_in_endpoints(self):
        region = slit_region()
        rng = np.random.default_rng(77)
        for _ in range(100):
            a = tuple(rng.uniform(0, 1, 2))
            b = tuple(rng.uniform(0, 1, 2))
            if np.hypot(a[0] - b[0], a[1] - b[1]) < 1e-6:
                continue
            assert segment_crosses_boundary(region, a, b) == segment_crosses_boundary(
                region, b, a
            )

    def test_matches_naive_oracle_on_star_polygon(self):
        region = blob_region(57, n_vertices=14, radial_jitter=0.45)
        xmin, ymin, xmax, ymax = region.bbox
        rng = np.random.default_rng(58)
        starts, ends = [], []
        while len(starts) < 500:
            a = rng.uniform((xmin, ymin), (xmax, ymax))
            b = rng.uniform((xmin, ymin), (xmax, ymax))
            if np.hypot(*(a - b)) > 1e-3:
                starts.append(a)
                ends.append(b)
        starts, ends = np.array(starts), np.array(ends)
        got = segments_cross_boundary(region, starts, ends)
        want = np.array(
            [naive_crosses_boundary(region, a, b) for a, b in zip(starts, ends)]
        )
        assert np.array_equal(got, want)

    def test_degenerate_segment_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            segment_crosses_boundary(Region(UNIT_SQUARE), (0.5, 0.5), (0.5, 0.5))


class TestLoaders:
    def test_geojson_polygon(self, tmp_path):
        doc = {
            "type": "Polygon",
            "coordinates": [
                [[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]],
                [[0.25, 0.25], [0.75, 0.25], [0.75, 0.75], [0.25, 0.75], [0.25, 0.25]],
            ],
        }
        path = tmp_path / "region.geojson"
        path.write_text(json.dumps(doc))
        region = load_region_geojson(path)
        assert len(region.holes) == 1
        assert region_area(region) == pytest.approx(0.75)

    def test_geojson_feature_wrapper(self, tmp_path):
        doc = {
            "type": "Feature",
            "properties": {},
            "geometry": {
                "type": "Polygon",
                "coordinates": [[[0, 0], [2, 0], [2, 2], [0, 2], [0, 0]]],
            },
        }
        path = tmp_path / "region.json"
        path.write_text(json.dumps(doc))
        assert region_area(load_region(path)) == pytest.approx(4.0)

    def test_malformed_geojson_names_path(self, tmp_path):
        path = tmp_path / "bad.geojson"
        path.write_text("{not json")
        with pytest.raises(ValueError, match="bad.geojson"):
            load_region_geojson(path)

    def test_non_polygon_rejected(self, tmp_path):
        path = tmp_path / "point.geojson"
        path.write_text(json.dumps({"type": "Point", "coordinates": [0, 0]}))
        with pytest.raises(ValueError, match="Polygon"):
            load_region_geojson(path)

    def test_csv_fallback(self, tmp_path):
        lines = ["ring_index,easting,northing"]
        for x, y in ((0, 0), (1, 0), (1, 1), (0, 1)):
            lines.append(f"0,{x},{y}")
        for x, y in ((0.25, 0.25), (0.75, 0.25), (0.75, 0.75), (0.25, 0.75)):
            lines.append(f"1,{x},{y}")
        path = tmp_path / "region.csv"
        path.write_text("\n".join(lines) + "\n")
        region = load_region(path)
        assert len(region.holes) == 1
        assert region_area(region) == pytest.approx(0.75)

    def test_csv_bad_line_reports_number(self, tmp_path):
        path = tmp_path / "region.csv"
        path.write_text("ring_index,easting,northing\n0,0,0\n0,1,zero\n")
        with pytest.raises(ValueError, match="line 3"):
            load_region_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValueError, match="not found"):
            load_region(tmp_path / "nope.geojson")
