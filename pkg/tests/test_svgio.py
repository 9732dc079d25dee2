import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from floorvec.core import FloorplanModel, Icon, IconClass, Opening, Room, RoomClass, Wall
from floorvec.errors import (
    BadPointList,
    FloorvecError,
    FormatError,
    InvalidModel,
    MalformedXml,
    MissingViewport,
)
from floorvec.svgio import (
    fmt_number,
    parse_annotation,
    parse_model,
    serialize_model,
    write_annotation,
)
from floorvec.synth import SynthConfig, generate

SVG = '<svg xmlns="http://www.w3.org/2000/svg" width="100" height="80">{}</svg>'


def test_single_kitchen():
    doc = SVG.format('<polygon class="Space Kitchen" points="10,10 90,10 90,60 10,60"/>')
    parsed = parse_annotation(doc)
    assert parsed.warnings == []
    (room,) = parsed.model.rooms
    assert room.label == RoomClass.Kitchen
    assert room.polygon == ((10, 10), (90, 10), (90, 60), (10, 60))
    assert parsed.model.image_size == (100, 80)


def test_zero_recognized_elements():
    parsed = parse_annotation(SVG.format(""))
    assert parsed.model == FloorplanModel((100, 80))
    assert parsed.warnings == []


def test_unrecognized_elements_become_warnings():
    doc = SVG.format('<rect x="1" y="1" width="3" height="3"/>'
                     '<polygon class="Mystery" points="1,1 5,1 5,5"/>'
                     '<g><text>hi</text></g>'
                     '<polygon class="FixedFurniture Spaceship" points="1,1 5,1 5,5 1,5"/>')
    parsed = parse_annotation(doc)
    assert len(parsed.warnings) == 4
    assert parsed.model == FloorplanModel((100, 80))


def test_unknown_room_class_maps_to_other_rooms():
    doc = SVG.format('<polygon class="Space Sauna" points="10,10 90,10 90,60 10,60"/>')
    assert parse_annotation(doc).model.rooms[0].label == RoomClass.OtherRooms


def test_clockwise_room_normalized():
    doc = SVG.format('<polygon class="Space Bath" points="10,10 10,60 90,60 90,10"/>')
    room = parse_annotation(doc).model.rooms[0]
    assert room.polygon == ((10, 10), (90, 10), (90, 60), (10, 60))


def test_wall_derived_from_rectangle_without_centerline():
    doc = SVG.format('<polygon class="Wall" points="10,8 60,8 60,12 10,12"/>')
    (wall,) = parse_annotation(doc).model.walls
    assert wall.centerline == ((10, 10), (60, 10)) and wall.width == 4


def test_errors():
    with pytest.raises(MalformedXml):
        parse_annotation("<svg")
    with pytest.raises(MissingViewport):
        parse_annotation('<svg xmlns="http://www.w3.org/2000/svg"></svg>')
    with pytest.raises(BadPointList) as info:
        parse_annotation(SVG.format('<polygon class="Space Bath" points="1,1 9,1 9,9 1,9"/>'
                                    '<polygon class="Space Bath" points="1,x 3"/>'))
    assert info.value.index == 1


def test_viewbox_fallback():
    doc = '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 40 30"></svg>'
    assert parse_annotation(doc).model.image_size == (40, 30)


def test_write_empty_model():
    text = write_annotation(FloorplanModel((100, 100))).text
    assert text.strip().endswith('width="100" height="100">\n</svg>')
    assert "polygon" not in text


def test_write_single_wall():
    text = write_annotation(FloorplanModel((100, 100), walls=[Wall(((10, 10), (60, 10)), 4)])).text
    lines = [ln for ln in text.splitlines() if "<polygon" in ln]
    assert lines == ['  <polygon class="Wall" data-width="4" data-centerline="10,10 60,10" '
                     'points="10,8 60,8 60,12 10,12"/>']


def test_write_refuses_invalid_model():
    bad = FloorplanModel((100, 100), openings=[Opening(((50, 10), (70, 10)), 4, IconClass.Door)])
    with pytest.raises(InvalidModel) as info:
        write_annotation(bad)
    assert len(info.value.report) == 1
    assert '<polygon class="Door"' in write_annotation(bad, strict=False).text


def test_empty_json_exact():
    assert serialize_model(FloorplanModel((100, 100))) == (
        '{"schema":"fpv-1","image_size":[100,100],"walls":[],"rooms":[],"icons":[],"openings":[]}')


def test_fmt_number_shortest():
    assert fmt_number(4.0) == "4"
    assert fmt_number(0.1) == "0.1"
    assert fmt_number(57.5) == "57.5"
    assert float(fmt_number(1 / 3)) == 1 / 3


def _mixed_model():
    return FloorplanModel(
        (120, 100),
        walls=[Wall(((10, 10), (110, 10)), 4.5), Wall(((10, 10), (10, 90)), 3)],
        rooms=[Room(((12, 12), (100, 12), (100, 50), (60, 50), (60, 80), (12, 80)),
                    RoomClass.LivingRoom)],
        icons=[Icon(((20.25, 20), (30, 35.5)), IconClass.Bathtub)],
        openings=[Opening(((40, 10), (55, 10)), 4.5, IconClass.Window)],
    )


@pytest.mark.parametrize("fmt", ["json", "svg"])
def test_round_trip_handmade(fmt):
    m = _mixed_model()
    assert parse_model(serialize_model(m, fmt)) == m


@pytest.mark.parametrize("seed", range(100))
def test_round_trip_synth(seed):
    m = generate(SynthConfig(seed=seed, grid=(1 + seed % 4, 1 + seed // 25)))
    svg = write_annotation(m).text
    parsed = parse_annotation(svg)
    assert parsed.warnings == []
    assert parsed.model == m
    js = serialize_model(m)
    assert parse_model(js) == m
    assert serialize_model(parse_model(js)) == js
    assert serialize_model(m) == js and write_annotation(m).text == svg


def test_json_errors():
    with pytest.raises(FormatError):
        parse_model("{not json")
    with pytest.raises(FormatError):
        parse_model(json.dumps({"schema": "other"}))
    with pytest.raises(FormatError):
        parse_model(json.dumps({"schema": "fpv-1", "image_size": [1, 1]}))


@given(st.binary(max_size=400))
def test_fuzz_bytes_never_crash(data):
    try:
        parse_annotation(data)
    except FloorvecError:
        pass


_fragments = st.sampled_from([
    "<svg", "</svg>", "<g>", "</g>", '<polygon class="Wall" points="1,1 9,1 9,3 1,3"/>',
    '<polygon class="Space Bath" points="', "1,1 5,1", '"/>', 'width="50"', 'height="40"',
    '<polygon class="Door" data-width="2" points="1,1 3,1 3,3 1,3"/>', "<rect/>", "&amp;",
    'data-centerline="1,2 3', ">", " ", "NaN", "inf", "-1e999", "viewBox=\"0 0 1 1\"",
])


@given(st.lists(_fragments, max_size=25).map("".join))
def test_fuzz_svg_fragments_never_crash(text):
    try:
        parse_annotation(text)
    except FloorvecError:
        pass


@given(st.text(max_size=200))
def test_fuzz_parse_model_never_crash(text):
    try:
        parse_model(text)
    except FloorvecError:
        pass
