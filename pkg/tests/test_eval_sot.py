import math
import random

import pytest
from devtools import debug

from foresight_forge.app.evaluation import eval_sot
from foresight_forge.app.evaluation import EvaluationError
from foresight_forge.app.evaluation import SotGroundTruth
from foresight_forge.app.evaluation import SotPrediction

from .fixtures_data import make_box
from .fixtures_data import make_sequence
from .fixtures_data import moving_tracklet

METRICS = ("AO", "SR@0.5", "SR@0.75", "Success", "P", "P_norm")


def gt_of(sequence_id, boxes, length=None):
    return SotGroundTruth(
        sequence_id=sequence_id,
        length=length or max(boxes),
        boxes={f: make_box(*b) for f, b in boxes.items()},
    )


def pred_of(sequence_id, boxes):
    return SotPrediction(
        sequence_id=sequence_id,
        boxes={f: make_box(*b) for f, b in boxes.items()},
    )


def brute_force(preds, gts):
    """
    Direct recomputation of every metric from raw boxes, frame by frame
    """
    by_id = {p.sequence_id: p for p in preds}
    per_sequence = []
    for gt in gts:
        pred = by_id[gt.sequence_id]
        ious, errors, norm_errors = [], [], []
        for frame, g in gt.boxes.items():
            if g.degenerate:
                continue
            p = pred.boxes.get(frame)
            if p is None:
                ious.append(0.0)
                errors.append(math.inf)
                norm_errors.append(math.inf)
                continue
            iw = min(g.xmax, p.xmax) - max(g.xmin, p.xmin)
            ih = min(g.ymax, p.ymax) - max(g.ymin, p.ymin)
            inter = iw * ih if iw > 0 and ih > 0 else 0.0
            ious.append(inter / (g.area + p.area - inter))
            dx = p.center[0] - g.center[0]
            dy = p.center[1] - g.center[1]
            errors.append(math.hypot(dx, dy))
            norm_errors.append(math.hypot(dx / g.width, dy / g.height))

        def rate(values, test):
            return sum(1 for v in values if test(v)) / len(values)

        per_sequence.append(
            {
                "AO": sum(ious) / len(ious),
                "SR@0.5": rate(ious, lambda v: v > 0.5),
                "SR@0.75": rate(ious, lambda v: v > 0.75),
                "Success": sum(
                    rate(ious, lambda v: v > i / 50) for i in range(51)
                )
                / 51,
                "P": rate(errors, lambda v: v <= 20),
                "P_norm": sum(
                    rate(norm_errors, lambda v: v <= i * 0.01)
                    for i in range(51)
                )
                / 51,
            }
        )
    return {
        name: sum(m[name] for m in per_sequence) / len(per_sequence)
        for name in METRICS
    }


def random_benchmark(rng: random.Random):
    gts, preds = [], []
    for s in range(rng.randint(1, 3)):
        length = rng.randint(1, 5)
        gt_boxes, pred_boxes = {}, {}
        for frame in range(1, length + 1):
            if frame > 1 and rng.random() < 0.15:
                continue
            x, y = rng.uniform(0, 500), rng.uniform(0, 300)
            w, h = rng.uniform(5, 120), rng.uniform(5, 120)
            gt_boxes[frame] = (x, y, x + w, y + h)
            if rng.random() < 0.1:
                continue
            px = max(0.0, x + rng.uniform(-25, 25))
            py = max(0.0, y + rng.uniform(-25, 25))
            pw = w * rng.uniform(0.6, 1.4)
            ph = h * rng.uniform(0.6, 1.4)
            pred_boxes[frame] = (px, py, px + pw, py + ph)
        gts.append(gt_of(f"seq{s}", gt_boxes, length))
        preds.append(pred_of(f"seq{s}", pred_boxes))
    return preds, gts


@pytest.mark.parametrize("case", range(50))
def test_metrics_match_brute_force(case):
    """
    GIVEN a random micro-benchmark (up to 3 sequences of up to 5 frames)
    WHEN scoring it
    THEN every metric equals a frame-by-frame recomputation to 1e-12 and
         the success rate does not increase with the threshold
    """
    preds, gts = random_benchmark(random.Random(case))
    report = eval_sot(preds, gts)
    expected = brute_force(preds, gts)
    for name in METRICS:
        assert report.metrics[name] == pytest.approx(
            expected[name], abs=1e-12
        ), name
    assert report.metrics["SR@0.5"] >= report.metrics["SR@0.75"]


def test_perfect_tracker():
    boxes = {1: (10, 10, 50, 90), 2: (12, 10, 52, 90), 3: (14, 11, 54, 91)}
    report = eval_sot([pred_of("a", boxes)], [gt_of("a", boxes)])
    debug(report)
    assert report.metrics["AO"] == 1.0
    assert report.metrics["SR@0.5"] == 1.0
    assert report.metrics["SR@0.75"] == 1.0
    assert report.metrics["P"] == 1.0
    assert report.metrics["P_norm"] == 1.0
    # IoU 1 does not exceed the last threshold
    assert report.metrics["Success"] == pytest.approx(50 / 51)
    assert report.counts == dict(sequences=1, frames=3, missing_frames=0)
    assert report.warnings == []


def test_disjoint_tracker():
    gt = gt_of("a", {1: (0, 0, 10, 10), 2: (0, 0, 10, 10)})
    pred = pred_of("a", {1: (100, 100, 110, 110), 2: (200, 0, 210, 10)})
    report = eval_sot([pred], [gt])
    assert report.metrics["AO"] == 0.0
    assert report.metrics["SR@0.5"] == 0.0
    assert report.metrics["SR@0.75"] == 0.0
    assert report.metrics["P"] == 0.0


def test_two_sequence_example():
    """
    GIVEN per-frame IoUs {1.0, 0.6} on one sequence and {0.4} on another
    WHEN scoring
    THEN AO is the mean of the sequence means, 0.6, and SR@0.5 is 0.5
    """
    square = (0, 0, 10, 10)
    gts = [gt_of("a", {1: square, 2: square}), gt_of("b", {1: square})]
    preds = [
        pred_of("a", {1: square, 2: (0, 0, 6, 10)}),
        pred_of("b", {1: (0, 0, 4, 10)}),
    ]
    report = eval_sot(preds, gts)
    assert report.metrics["AO"] == pytest.approx(0.6, abs=1e-12)
    assert report.metrics["SR@0.5"] == pytest.approx(0.5)
    assert report.per_category == pytest.approx(dict(a=0.8, b=0.4))


def test_duplicated_benchmark_scores_the_same():
    preds, gts = random_benchmark(random.Random(99))
    report = eval_sot(preds, gts)

    def renamed(items):
        return [
            item.copy(update=dict(sequence_id=f"{item.sequence_id}-bis"))
            for item in items
        ]

    copies, gt_copies = renamed(preds), renamed(gts)
    doubled = eval_sot(preds + copies, gts + gt_copies)
    for name in METRICS:
        assert doubled.metrics[name] == pytest.approx(
            report.metrics[name], abs=1e-12
        )
    assert doubled.counts["sequences"] == 2 * report.counts["sequences"]


def test_missing_frames_score_zero():
    gt = gt_of("a", {1: (0, 0, 10, 10), 2: (0, 0, 10, 10)})
    report = eval_sot([pred_of("a", {1: (0, 0, 10, 10)})], [gt])
    assert report.metrics["AO"] == 0.5
    assert report.metrics["P"] == 0.5
    assert report.counts["missing_frames"] == 1
    assert report.warnings

    single = gt_of("b", {1: (0, 0, 10, 10)}, length=3)
    degenerate_pred = SotPrediction(
        sequence_id="b",
        boxes={1: dict(xmin=5, ymin=5, xmax=5, ymax=9, degenerate=True)},
    )
    assert eval_sot([degenerate_pred], [single]).metrics["AO"] == 0.0


def test_eval_sot_errors():
    gt = gt_of("a", {1: (0, 0, 10, 10)}, length=2)
    pred = pred_of("a", {1: (0, 0, 10, 10)})
    with pytest.raises(EvaluationError, match="Empty"):
        eval_sot([pred], [])
    with pytest.raises(EvaluationError, match="unknown sequence zz"):
        eval_sot([pred, pred_of("zz", {1: (0, 0, 1, 1)})], [gt])
    with pytest.raises(EvaluationError, match="Duplicate prediction"):
        eval_sot([pred, pred], [gt])
    with pytest.raises(EvaluationError, match="Duplicate ground-truth"):
        eval_sot([pred], [gt, gt])
    with pytest.raises(EvaluationError, match="beyond"):
        eval_sot([pred_of("a", {3: (0, 0, 10, 10)})], [gt])
    with pytest.raises(EvaluationError, match="No prediction entry"):
        eval_sot([], [gt])
    with pytest.raises(ValueError):
        gt_of("a", {4: (0, 0, 10, 10)}, length=2)


def test_ground_truth_from_sequence():
    seq = make_sequence(4, [moving_tracklet(1, 4, category="airplane")])
    gt = SotGroundTruth.from_sequence(seq)
    assert gt.length == 4
    assert gt.category == "airplane"
    assert list(gt.boxes) == [1, 2, 3, 4]

    crowded = make_sequence(4, [moving_tracklet(1, 4), moving_tracklet(2, 2)])
    with pytest.raises(EvaluationError, match="exactly one"):
        SotGroundTruth.from_sequence(crowded)
