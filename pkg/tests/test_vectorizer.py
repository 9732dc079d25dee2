import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from floorvec.core import (
    FloorplanModel,
    Icon,
    IconClass,
    IconCorner,
    InterestPoint,
    OpeningEndpoint,
    Point,
    Room,
    RoomClass,
    Wall,
    WallJunction,
    point_in_polygon,
)
from floorvec.errors import NoWallPixels
from floorvec.raster import (
    SegmentationMaps,
    extract_interest_points,
    render,
    render_heatmaps,
    render_segmentation,
    wall_junctions,
)
from floorvec.synth import SynthConfig, generate
from floorvec.vectorizer import (
    build_cell_grid,
    build_wall_skeleton,
    detect_peaks,
    estimate_wall_width,
    extract_icons,
    extract_openings,
    extract_rooms,
    rectangles_outline,
    snap_coordinates,
    vectorize,
)

W = RoomClass.Wall


def ip(x, y, kind):
    return InterestPoint(Point(float(x), float(y)), kind)


# -- peaks ------------------------------------------------------------------


def test_zero_stack_no_peaks():
    assert len(detect_peaks(np.zeros((21, 16, 16), np.float32))) == 0


@given(st.floats(2, 28), st.floats(2, 28))
def test_single_point_round_trip(x, y):
    kind = WallJunction("T", 90)
    stack = render_heatmaps([ip(x, y, kind)], (31, 31))
    (p,) = detect_peaks(stack, threshold=0.5).points
    assert p.kind == kind
    assert math.dist(p.location, (x, y)) <= 0.5


def test_nms_keeps_stronger_peak():
    stack = np.zeros((21, 20, 20), np.float32)
    stack[3, 10, 10] = 0.9
    stack[3, 10, 13] = 0.8
    (p,) = detect_peaks(stack).points
    assert p.score == pytest.approx(0.9)
    assert p.location.x < 10.5


def test_peak_argument_checks():
    z = np.zeros((21, 4, 4), np.float32)
    with pytest.raises(ValueError):
        detect_peaks(z, threshold=1.0)
    with pytest.raises(ValueError):
        detect_peaks(z, nms_radius=0.5)


# -- skeleton and widths -----------------------------------------------------


def stripe_map(width=4, fraction=1.0, h=12, w=50):
    m = np.zeros((h, w), np.uint8)
    top = 5 - width // 2
    n = int(round(fraction * 31))
    m[top:top + width, 10:10 + n] = W
    return m


def test_facing_pair_connects():
    pts = [ip(10, 5, WallJunction("I", 0)), ip(40, 5, WallJunction("I", 180))]
    sk = build_wall_skeleton(pts, stripe_map())
    assert sk.segments == ((0, 1),)


def test_low_coverage_is_pruned():
    pts = [ip(10, 5, WallJunction("I", 0)), ip(40, 5, WallJunction("I", 180))]
    sk = build_wall_skeleton(pts, stripe_map(fraction=0.2))
    assert sk.segments == () and sk.pruned == ((0, 1),)


def test_single_junction_empty_skeleton():
    assert build_wall_skeleton([ip(10, 5, WallJunction("I", 0))], stripe_map()).segments == ()


def test_nearest_first_each_arm_once():
    pts = [ip(10, 5, WallJunction("I", 0)), ip(25, 5, WallJunction("I", 180)),
           ip(40, 5, WallJunction("I", 180))]
    assert build_wall_skeleton(pts, stripe_map()).segments == ((0, 1),)


def test_non_facing_arms_do_not_connect():
    pts = [ip(10, 5, WallJunction("I", 180)), ip(40, 5, WallJunction("I", 0))]
    assert build_wall_skeleton(pts, stripe_map()).segments == ()


def test_misaligned_beyond_tolerance():
    pts = [ip(10, 5, WallJunction("I", 0)), ip(40, 9, WallJunction("I", 180))]
    assert build_wall_skeleton(pts, stripe_map()).segments == ()


def test_width_uniform_stripe():
    m = np.zeros((20, 60), np.uint8)
    m[7:13, 5:55] = W
    runs = [int((m[:, c] == W).sum()) for c in range(5, 55)]
    assert set(runs) == {6}
    assert estimate_wall_width(((5, 10), (55, 10)), m) == 6.0


def test_width_median_ignores_one_notch():
    m = np.zeros((20, 60), np.uint8)
    m[8:12, 5:55] = W
    t = 0.1 + 0.8 * 5 / 10
    station_col = int(math.floor(5 + t * 50 + 0.5))
    m[8, station_col] = 0
    assert estimate_wall_width(((5, 10), (55, 10)), m) == 4.0


def test_width_vertical():
    m = np.zeros((60, 20), np.uint8)
    m[5:55, 8:11] = W
    assert estimate_wall_width(((9, 5), (9, 55)), m) == 3.0


def test_width_no_wall_pixels():
    with pytest.raises(NoWallPixels):
        estimate_wall_width(((5, 10), (55, 10)), np.zeros((20, 60), np.uint8))


def test_snap_coordinates_clusters():
    assert snap_coordinates([10, 11, 12, 30, 31.5, 50]) == [11, 11, 11, 30.75, 30.75, 50]


# -- rooms -------------------------------------------------------------------


def box_walls(x0, y0, x1, y1, width=4):
    return [Wall(((x0, y0), (x1, y0)), width), Wall(((x1, y0), (x1, y1)), width),
            Wall(((x0, y1), (x1, y1)), width), Wall(((x0, y0), (x0, y1)), width)]


def test_single_cell_room_with_vote():
    walls = box_walls(10, 10, 60, 40)
    pts = wall_junctions(walls)
    rooms_map = render_segmentation(FloorplanModel((80, 60), walls=walls)).rooms
    interior = np.argwhere(rooms_map[10:40, 10:60] == 0) + (10, 10)
    rooms_map[10:40, 10:60][rooms_map[10:40, 10:60] == 0] = RoomClass.Kitchen
    k = int(0.1 * len(interior))
    for r, c in interior[:k]:
        rooms_map[r, c] = RoomClass.Bedroom
    sk = build_wall_skeleton(pts, rooms_map)
    (room,) = extract_rooms(pts, rooms_map, sk)
    assert room.label == RoomClass.Kitchen
    assert room.polygon == ((10, 10), (60, 10), (60, 40), (10, 40))


def two_cell_fixture(separated: bool):
    walls = [Wall(((10, 10), (50, 10)), 4), Wall(((50, 10), (90, 10)), 4),
             Wall(((10, 40), (50, 40)), 4), Wall(((50, 40), (90, 40)), 4),
             Wall(((10, 10), (10, 40)), 4), Wall(((90, 10), (90, 40)), 4),
             Wall(((50, 10), (50, 40)), 4)]
    rooms = [Room(((10, 10), (50, 10), (50, 40), (10, 40)), RoomClass.Bath),
             Room(((50, 10), (90, 10), (90, 40), (50, 40)), RoomClass.Bath)]
    pts = wall_junctions(walls)
    painted = walls if separated else walls[:-1]
    rooms_map = render_segmentation(FloorplanModel((100, 50), walls=painted, rooms=rooms)).rooms
    return pts, rooms_map


def test_fully_separated_cells_stay_apart():
    pts, rooms_map = two_cell_fixture(True)
    rooms = extract_rooms(pts, rooms_map, build_wall_skeleton(pts, rooms_map))
    assert [r.polygon for r in rooms] == [((10, 10), (50, 10), (50, 40), (10, 40)),
                                          ((50, 10), (90, 10), (90, 40), (50, 40))]


def test_unseparated_same_label_cells_merge():
    pts, rooms_map = two_cell_fixture(False)
    sk = build_wall_skeleton(pts, rooms_map)
    assert len(sk.pruned) == 1
    (room,) = extract_rooms(pts, rooms_map, sk)
    assert room.polygon == ((10, 10), (90, 10), (90, 40), (10, 40))
    assert room.label == RoomClass.Bath


def test_zero_junctions_no_rooms():
    assert extract_rooms([], np.zeros((10, 10), np.uint8), build_wall_skeleton([], None)) == []


def test_cell_grid_cells_disjoint():
    m = generate(SynthConfig(seed=5, grid=(3, 3)))
    pts = extract_interest_points(m).points
    maps = render_segmentation(m)
    grid = build_cell_grid(pts, build_wall_skeleton(pts, maps.rooms))
    for i, a in enumerate(grid.cells):
        assert a[2] > a[0] and a[3] > a[1]
        for b in grid.cells[i + 1:]:
            assert not (min(a[2], b[2]) > max(a[0], b[0]) and min(a[3], b[3]) > max(a[1], b[1]))


def test_outline_of_l_union():
    loops = rectangles_outline([(0, 0, 20, 10), (0, 10, 10, 30)])
    assert loops == [[(0, 0), (20, 0), (20, 10), (10, 10), (10, 30), (0, 30)]]


def test_outline_of_pinched_union_keeps_separate_loops():
    loops = rectangles_outline([(0, 0, 10, 10), (10, 10, 20, 20)])
    assert sorted(map(len, loops)) == [4, 4]


# -- icons and openings -------------------------------------------------------


def corners(*xy_kinds):
    return [ip(x, y, IconCorner(c)) for x, y, c in xy_kinds]


def icon_map_with(label, x0=20, y0=20, x1=40, y1=50):
    m = np.zeros((80, 80), np.uint8)
    m[y0:y1, x0:x1] = label
    return m


def test_icon_from_four_corners():
    pts = corners((20, 20, "NW"), (40, 20, "NE"), (20, 50, "SW"), (40, 50, "SE"))
    (icon,) = extract_icons(pts, icon_map_with(IconClass.Toilet))
    assert icon.label == IconClass.Toilet and icon.bbox == ((20, 20), (40, 50))


def test_icon_empty_interior_discarded():
    pts = corners((20, 20, "NW"), (40, 20, "NE"), (20, 50, "SW"), (40, 50, "SE"))
    diags = []
    assert extract_icons(pts, np.zeros((80, 80), np.uint8), diagnostics=diags) == []
    assert diags[0]["event"] == "empty_icon_box"


def test_three_corners_no_icon():
    pts = corners((20, 20, "NW"), (40, 20, "NE"), (20, 50, "SW"))
    assert extract_icons(pts, icon_map_with(IconClass.Toilet)) == []


def door_fixture():
    wall = Wall(((10, 10), (90, 10)), 4)
    m = np.zeros((40, 100), np.uint8)
    m[8:12, 30:50] = IconClass.Door
    return wall, m


def test_opening_pair_in_wall():
    wall, m = door_fixture()
    pts = [ip(30, 10, OpeningEndpoint("right")), ip(50, 10, OpeningEndpoint("left"))]
    (op,) = extract_openings(pts, m, [wall])
    assert op.label == IconClass.Door and op.width == 4
    assert op.segment == ((30, 10), (50, 10))


def test_opening_endpoint_outside_walls_rejected():
    wall, m = door_fixture()
    diags = []
    pts = [ip(200, 200, OpeningEndpoint("right")), ip(50, 10, OpeningEndpoint("left"))]
    assert extract_openings(pts, np.zeros((300, 300), np.uint8), [wall], diagnostics=diags) == []
    assert diags[0]["event"] == "endpoint_outside_walls"


def test_opening_misaligned_not_paired():
    wall = Wall(((10, 10), (90, 10)), 30)
    m = np.zeros((40, 100), np.uint8)
    m[:, 30:50] = IconClass.Window
    pts = [ip(30, 5, OpeningEndpoint("right")), ip(50, 15, OpeningEndpoint("left"))]
    assert extract_openings(pts, m, [wall]) == []


def test_vertical_opening_window():
    wall = Wall(((20, 10), (20, 90)), 6)
    m = np.zeros((100, 40), np.uint8)
    m[30:60, 17:23] = IconClass.Window
    pts = [ip(20.5, 30, OpeningEndpoint("down")), ip(19.5, 60, OpeningEndpoint("up"))]
    (op,) = extract_openings(pts, m, [wall])
    assert op.label == IconClass.Window and op.segment == ((20, 30), (20, 60)) and op.width == 6


# -- whole pipeline ------------------------------------------------------------


def test_all_zero_inputs_empty_model():
    maps = SegmentationMaps(np.zeros((32, 40), np.uint8), np.zeros((32, 40), np.uint8))
    result = vectorize(maps, np.zeros((21, 32, 40), np.float32))
    assert result.model == FloorplanModel((40, 32)) and result.diagnostics == []


def test_single_room_round_trip():
    m = generate(SynthConfig(seed=2, grid=(1, 1), icon_count_range=(0, 0)))
    assert vectorize(*render(m)).model == m


def test_one_icon_no_walls():
    m = FloorplanModel((64, 64), icons=[Icon(((10, 10), (30, 25)), IconClass.Sink)])
    out = vectorize(*render(m)).model
    assert out.icons == m.icons and out.walls == () and out.rooms == ()


def test_shape_mismatch():
    from floorvec.errors import ShapeMismatch
    maps = SegmentationMaps(np.zeros((8, 8), np.uint8), np.zeros((8, 8), np.uint8))
    with pytest.raises(ShapeMismatch):
        vectorize(maps, np.zeros((21, 8, 9), np.float32))


@pytest.mark.parametrize("seed", range(8))
def test_deterministic_including_diagnostics(seed):
    from floorvec.synth import NoiseConfig, corrupt
    m = generate(SynthConfig(seed=seed, grid=(3, 3)))
    maps, stack = corrupt(*render(m), NoiseConfig(0.1, 0.05, 1.0), seed=seed)
    a, b = vectorize(maps, stack), vectorize(maps, stack)
    assert a.model == b.model and a.diagnostics == b.diagnostics


@pytest.mark.parametrize("seed", range(15))
def test_room_interiors_hold_no_detected_junction(seed):
    from floorvec.synth import NoiseConfig, corrupt
    m = generate(SynthConfig(seed=seed, grid=(1 + seed % 4, 1 + seed % 3)))
    maps, stack = corrupt(*render(m), NoiseConfig(0.05, 0.02, 0.5), seed=seed)
    result = vectorize(maps, stack)
    junctions = [p.location for p in result.points if isinstance(p.kind, WallJunction)]
    for room in result.model.rooms:
        for q in junctions:
            inside = point_in_polygon(q, room.polygon)
            on_edge = point_in_polygon(q, room.polygon, margin=3.0) and not point_in_polygon(
                q, _shrink(room.polygon, 3.0))
            assert not inside or on_edge


def _shrink(poly, d):
    xs = [p[0] for p in poly]
    ys = [p[1] for p in poly]
    cx, cy = (min(xs) + max(xs)) / 2, (min(ys) + max(ys)) / 2
    # conservative inner test polygon: move each vertex d towards the bbox centre per axis
    return [(x + math.copysign(d, cx - x), y + math.copysign(d, cy - y)) for x, y in poly]


@given(st.integers(0, 40), st.integers(0, 2 ** 32 - 1), st.floats(0.0, 1.0))
def test_monotone_pruning(seed, mask_seed, frac):
    m = generate(SynthConfig(seed=seed, grid=(2, 2)))
    pts = extract_interest_points(m).points
    rooms_map = render_segmentation(m).rooms
    before = len(build_wall_skeleton(pts, rooms_map).segments)
    rng = np.random.default_rng(mask_seed)
    damaged = rooms_map.copy()
    damaged[(damaged == W) & (rng.random(damaged.shape) < frac)] = RoomClass.Background
    assert len(build_wall_skeleton(pts, damaged).segments) <= before
