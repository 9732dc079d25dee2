"""Regenerate the checked-in golden files.  Run from the repo root:

    python3 tests/data/make_golden.py

Tests compare freshly produced bytes against these files, so rerun only
after an intentional format change.
"""

from pathlib import Path

import numpy as np

from floorvec.formats import write_fpt1, write_png
from floorvec.raster import render
from floorvec.svgio import serialize_model
from floorvec.synth import SynthConfig, generate

HERE = Path(__file__).parent

GOLDEN_CONFIG = SynthConfig(seed=11, image_size=(64, 64), grid=(1, 1), margin=8,
                            icon_count_range=(1, 1), opening_count_range=(0, 0))
CORPUS_CONFIGS = [
    SynthConfig(seed=101, grid=(1, 1)),
    SynthConfig(seed=102, grid=(2, 2)),
    SynthConfig(seed=103, grid=(2, 3), icon_count_range=(2, 4)),
    SynthConfig(seed=104, grid=(3, 2), opening_count_range=(1, 3)),
    SynthConfig(seed=105, grid=(3, 3), image_size=(320, 288)),
]


def small_tensor():
    return (np.arange(3 * 4 * 5, dtype=np.float32).reshape(3, 4, 5) / 7 - 2).astype(np.float32)


def main(out: Path = HERE):
    model = generate(GOLDEN_CONFIG)
    (out / "golden.svg").write_text(serialize_model(model, "svg"), encoding="utf-8")
    (out / "golden.json").write_text(serialize_model(model, "json"), encoding="utf-8")
    maps, stack = render(model)
    write_png(out / "golden.rooms.png", maps.rooms)
    write_png(out / "golden.icons.png", maps.icons)
    write_fpt1(out / "golden.heatmaps.fpt", stack)
    write_fpt1(out / "small.fpt", small_tensor())
    corpus = out / "corpus"
    corpus.mkdir(exist_ok=True)
    for k, cfg in enumerate(CORPUS_CONFIGS):
        (corpus / f"plan_{k}.json").write_text(serialize_model(generate(cfg), "json"),
                                               encoding="utf-8")


if __name__ == "__main__":
    main()
