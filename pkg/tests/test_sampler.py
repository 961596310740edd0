import math
from collections import Counter

import pytest
from devtools import debug
from pydantic import ValidationError

from foresight_forge.app.sampler import cap_categories
from foresight_forge.app.sampler import filter_small
from foresight_forge.app.sampler import InfeasibleSequenceError
from foresight_forge.app.sampler import sample_clip
from foresight_forge.app.sampler import SamplerConfig
from foresight_forge.app.sampler import single_frame_clip

from .fixtures_data import make_clip
from .fixtures_data import make_sequence
from .fixtures_data import make_tracklet
from .fixtures_data import moving_tracklet


def test_config_validation():
    cfg = SamplerConfig(frame_counts=[5, 3, 3], gaps=[4, 3])
    assert cfg.frame_counts == [3, 5]
    assert cfg.gaps == [3, 4]
    with pytest.raises(ValidationError):
        SamplerConfig(frame_counts=[])
    with pytest.raises(ValidationError):
        SamplerConfig(frame_counts=[3, 8], max_frames=5)
    with pytest.raises(ValidationError):
        SamplerConfig(gaps=[0])


def test_sample_clip_deterministic():
    """
    GIVEN a 20-frame sequence and a fixed seed
    WHEN drawing the clip of the same record index twice
    THEN both clips are identical, and other indices vary
    """
    seq = make_sequence(20, [moving_tracklet(1, 20), moving_tracklet(2, 8)])
    cfg = SamplerConfig(seed=1234)
    clip = sample_clip(seq, cfg, 5)
    debug(clip.frames)
    assert clip == sample_clip(seq, cfg, 5)
    assert 3 <= len(clip.frames) <= 5
    assert clip.gap in (3, 4, 5)
    sources = [f.source_frame_id for f in clip.frames]
    assert all(b - a == clip.gap for a, b in zip(sources, sources[1:]))
    assert [f.index for f in clip.frames] == list(
        range(1, len(clip.frames) + 1)
    )
    drawn = {
        tuple(f.source_frame_id for f in sample_clip(seq, cfg, i).frames)
        for i in range(20)
    }
    assert len(drawn) > 1


def test_sample_clip_boundaries():
    cfg = SamplerConfig()
    with pytest.raises(InfeasibleSequenceError):
        sample_clip(make_sequence(3), cfg, 0)

    seq = make_sequence(7, [moving_tracklet(1, 7)])
    for index in range(10):
        clip = sample_clip(seq, cfg, index)
        assert [f.source_frame_id for f in clip.frames] == [1, 4, 7]
        assert clip.gap == 3
        assert list(clip.tracklets[0].boxes) == [1, 2, 3]


def test_sample_clip_reindexes_tracklets():
    seq = make_sequence(
        9,
        [
            moving_tracklet(1, 9),
            make_tracklet(2, {9: (0, 0, 30, 30)}, category="dog"),
        ],
    )
    cfg = SamplerConfig(frame_counts=[3], gaps=[4], max_frames=3)
    clip = sample_clip(seq, cfg, 0)
    assert [f.source_frame_id for f in clip.frames] == [1, 5, 9]
    first, second = clip.tracklets
    assert list(first.boxes) == [1, 2, 3]
    assert first.boxes[2] == seq.tracklets[0].boxes[5]
    assert list(second.boxes) == [3]


def test_single_frame_clip():
    seq = make_sequence(4, [moving_tracklet(1, 2), moving_tracklet(2, 4)])
    clip = single_frame_clip(seq, 3)
    assert clip.gap == 0
    assert clip.frames[0].index == 1
    assert clip.frames[0].source_frame_id == 3
    assert [t.id for t in clip.tracklets] == [2]


def test_filter_small():
    """
    GIVEN boxes around the 1/32 threshold of a 640x480 image
    WHEN filtering
    THEN boxes exactly at the threshold are kept, smaller ones removed
    """
    cfg = SamplerConfig()
    clip = make_clip(
        1,
        [
            make_tracklet(1, {1: (0, 0, 10, 200)}),
            make_tracklet(2, {1: (0, 0, 20, 15)}),
            make_tracklet(3, {1: (0, 0, 100, 14.9)}),
        ],
    )
    counters = {}
    filtered = filter_small(clip, cfg, counters)
    assert [t.id for t in filtered.tracklets] == [2]
    assert counters == dict(too_small=2)

    empty = make_clip(1)
    assert filter_small(empty, cfg) is empty


def test_filter_small_any_frame():
    cfg = SamplerConfig()
    tracklet = make_tracklet(
        1, {1: (0, 0, 100, 100), 2: (0, 0, 5, 100)}, category="cat"
    )
    clip = make_clip(2, [tracklet])
    assert filter_small(clip, cfg).tracklets == []


def test_cap_categories():
    cfg = SamplerConfig(max_categories=15, seed=3)
    tracklets = [
        make_tracklet(i, {1: (0, 0, 50, 50)}, category=f"cat{i:02d}")
        for i in range(1, 21)
    ]
    clip = make_clip(1, tracklets)
    capped = cap_categories(clip, cfg, 0)
    debug(capped.categories)
    assert len(set(capped.categories)) == 15
    assert capped == cap_categories(clip, cfg, 0)

    small = make_clip(1, tracklets[:10])
    assert cap_categories(small, cfg, 0) is small


@pytest.mark.slow
def test_sample_clip_uniform_cells():
    """
    GIVEN a 100-frame sequence
    WHEN drawing 10000 clips with the default configuration
    THEN every (frame count, gap) cell is drawn uniformly, within 3 sigma
    """
    seq = make_sequence(100, [moving_tracklet(1, 100, step=(1, 0))])
    cfg = SamplerConfig(seed=2024)
    n = 10_000
    cells = Counter()
    for index in range(n):
        clip = sample_clip(seq, cfg, index)
        sources = [f.source_frame_id for f in clip.frames]
        assert {b - a for a, b in zip(sources, sources[1:])} == {clip.gap}
        cells[len(clip.frames), clip.gap] += 1
    debug(cells)
    assert set(cells) == {(k, g) for k in (3, 4, 5) for g in (3, 4, 5)}
    p = 1 / 9
    sigma = math.sqrt(n * p * (1 - p))
    for count in cells.values():
        assert abs(count - n * p) <= 3 * sigma
