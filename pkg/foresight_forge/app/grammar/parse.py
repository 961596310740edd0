"""
Parsing of trajectory and detection answers

Strict mode accepts exactly one `traj_answer` or `det_answer` (LALR grammar
below, byte-exact). Lenient mode scans arbitrary model output for Id blocks
and detection groups, tolerating prose around them and single blanks after
`Frame`, after `:` and inside boxes.

Both modes share the semantic checks: out-of-range integers are clamped to
[0, 1000] with a warning, repeated frames keep their first entry, and
mismatched `<Idn>`/`</Idm>` tokens are errors.
"""
import re
from typing import Dict
from typing import List
from typing import NamedTuple
from typing import Optional
from typing import Tuple
from typing import Union

from lark import Lark
from lark import Token
from lark import Tree
from lark.exceptions import UnexpectedInput

from ..models import GeometryError
from ..models import NORM_RANGE
from ..models import NormBox
from .types import Diagnostic
from .types import GrammarError
from .types import ParsedTracklet
from .types import ParsedTrajectories
from .types import ParseMode
from .types import Severity

ANSWER_GRAMMAR = r"""
start: traj_answer | det_answer

traj_answer: CATEGORY? id_block+
id_block: ID_OPEN frame_entry (";" frame_entry)* ID_CLOSE
frame_entry: "Frame " INT ":" norm_box

det_answer: det_group (";" det_group)*
det_group: CATEGORY ":" norm_box ("," norm_box)*

norm_box: "[" INT "," INT "," INT "," INT "]"

ID_OPEN: /<Id[0-9]+>/
ID_CLOSE: /<\/Id[0-9]+>/
CATEGORY: /[^;:,\[\]<>\n]+/
INT: /[0-9]+/
"""

_parser = Lark(
    ANSWER_GRAMMAR, parser="lalr", lexer="contextual", propagate_positions=True
)

_BOX = r"\[\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\]"
_BOX_NC = r"\[\s*-?\d+\s*,\s*-?\d+\s*,\s*-?\d+\s*,\s*-?\d+\s*\]"
_BOX_RE = re.compile(_BOX)
_ID_TOKEN = re.compile(r"<(/?)Id(\d+)>")
_ID_CLOSE = re.compile(r"</Id\d+>")
_FRAME_ENTRY = re.compile(r"\s*Frame ?(\d+) ?: ?" + _BOX + r"\s*")
_DET_GROUP = re.compile(
    r"([^;:,\[\]<>\n.!?]+?) ?: ?(" + _BOX_NC + r"(?:\s*,\s*" + _BOX_NC + r")*)"
)
_LENIENT_PREFIX = re.compile(r"[^;:,\[\]<>\n.!?\s][^;:,\[\]<>\n.!?]*")
_STRAY_FRAME = re.compile(r"Frame ?\d+")


class _Entry(NamedTuple):
    frame: int
    values: Tuple[int, int, int, int]
    start: int
    end: int


class _Block(NamedTuple):
    id: int
    entries: List[_Entry]
    start: int
    end: int


class _Group(NamedTuple):
    category: str
    boxes: List[Tuple[Tuple[int, int, int, int], int, int]]
    start: int
    end: int


class _Collector:
    """
    Accumulates diagnostics with byte spans over one input string
    """

    def __init__(self, text: str, mode: ParseMode):
        self.text = text
        self.mode = mode
        self.diagnostics: List[Diagnostic] = []

    def _byte(self, pos: int) -> int:
        return len(self.text[:pos].encode())

    def add(self, severity: Severity, start: int, end: int, message: str):
        self.diagnostics.append(
            Diagnostic(
                severity=severity,
                start=self._byte(start),
                end=self._byte(end),
                message=message,
            )
        )

    def error(self, start: int, end: int, message: str):
        self.add(Severity.ERROR, start, end, message)

    def warning(self, start: int, end: int, message: str):
        self.add(Severity.WARNING, start, end, message)

    def problem(self, start: int, end: int, message: str):
        """
        Error in strict mode, warning in lenient mode
        """
        if self.mode == ParseMode.STRICT:
            self.error(start, end, message)
        else:
            self.warning(start, end, message)

    def to_box(
        self, values: Tuple[int, ...], start: int, end: int
    ) -> Optional[NormBox]:
        clamped = [min(max(v, 0), NORM_RANGE) for v in values]
        if clamped != list(values):
            self.warning(
                start,
                end,
                f"Box {list(values)} clamped to [0, {NORM_RANGE}]",
            )
        xmin, ymin, xmax, ymax = clamped
        try:
            return NormBox(xmin=xmin, ymin=ymin, xmax=xmax, ymax=ymax)
        except ValueError:
            self.problem(start, end, f"Box corners are swapped: {clamped}")
            return None


# Strict mode


def _ints(tokens) -> Tuple[int, ...]:
    return tuple(int(t) for t in tokens)


def _strict_box(tree: Tree) -> Tuple[Tuple[int, int, int, int], int, int]:
    values = _ints(tree.children)
    return values, tree.meta.start_pos, tree.meta.end_pos  # type: ignore


def _strict_collect(
    tree: Tree, collector: _Collector
) -> Tuple[Optional[str], List[_Block], List[_Group]]:
    answer = tree.children[0]
    prefix = None
    blocks: List[_Block] = []
    groups: List[_Group] = []
    if answer.data == "traj_answer":
        for child in answer.children:
            if isinstance(child, Token):
                prefix = str(child)
                continue
            open_tok, *entries, close_tok = child.children
            open_id, close_id = int(open_tok[3:-1]), int(close_tok[4:-1])
            if open_id != close_id:
                collector.error(
                    open_tok.start_pos,
                    close_tok.end_pos,
                    f"<Id{open_id}> closed by </Id{close_id}>",
                )
                continue
            block_entries = []
            for entry in entries:
                index_tok, box_tree = entry.children
                values, _, _ = _strict_box(box_tree)
                block_entries.append(
                    _Entry(
                        int(index_tok),
                        values,
                        entry.meta.start_pos,
                        entry.meta.end_pos,
                    )
                )
            blocks.append(
                _Block(
                    open_id,
                    block_entries,
                    child.meta.start_pos,
                    child.meta.end_pos,
                )
            )
    else:
        for group in answer.children:
            category_tok, *box_trees = group.children
            groups.append(
                _Group(
                    str(category_tok),
                    [_strict_box(box_tree) for box_tree in box_trees],
                    group.meta.start_pos,
                    group.meta.end_pos,
                )
            )
    return prefix, blocks, groups


# Lenient mode


def _lenient_block(
    content: str, offset: int
) -> Optional[List[_Entry]]:
    entries = []
    position = offset
    for part in content.split(";"):
        match = _FRAME_ENTRY.fullmatch(part)
        if match is None:
            return None
        entries.append(
            _Entry(
                int(match.group(1)),
                _ints(match.groups()[1:]),  # type: ignore
                position,
                position + len(part),
            )
        )
        position += len(part) + 1
    return entries


def _lenient_collect(
    text: str, collector: _Collector
) -> Tuple[Optional[str], List[_Block], List[_Group]]:
    blocks: List[_Block] = []
    masked = list(text)
    first_open: Optional[int] = None

    def mask(start: int, end: int) -> None:
        masked[start:end] = "\n" * (end - start)

    opening = None
    for token in _ID_TOKEN.finditer(text):
        is_close, number = token.group(1) == "/", int(token.group(2))
        mask(token.start(), token.end())
        if not is_close:
            if opening is not None:
                collector.error(
                    opening.start(),
                    opening.end(),
                    f"{opening.group(0)} is never closed",
                )
            opening = token
            continue
        if opening is None:
            collector.error(
                token.start(),
                token.end(),
                f"{token.group(0)} without a matching opening token",
            )
            continue
        open_id = int(opening.group(2))
        start, end = opening.start(), token.end()
        mask(start, end)
        if open_id != number:
            collector.error(
                start, end, f"<Id{open_id}> closed by </Id{number}>"
            )
        else:
            entries = _lenient_block(
                text[opening.end() : token.start()], opening.end()
            )
            if entries is None:
                collector.warning(
                    start, end, f"Unparseable <Id{open_id}> block skipped"
                )
            else:
                if first_open is None:
                    first_open = start
                blocks.append(_Block(open_id, entries, start, end))
        opening = None
    if opening is not None:
        collector.error(
            opening.start(),
            opening.end(),
            f"{opening.group(0)} is never closed",
        )

    prefix = None
    if first_open:
        candidate = text[:first_open]
        if not candidate[-1].isspace():
            candidate = candidate.strip()
            if _LENIENT_PREFIX.fullmatch(candidate):
                prefix = candidate

    groups: List[_Group] = []
    masked_text = "".join(masked)
    for match in _DET_GROUP.finditer(masked_text):
        category = match.group(1).strip()
        if _STRAY_FRAME.fullmatch(category):
            collector.warning(
                match.start(),
                match.end(),
                "Frame entry outside any Id block skipped",
            )
            continue
        offset = match.start(2)
        boxes = [
            (_ints(box.groups()), offset + box.start(), offset + box.end())
            for box in _BOX_RE.finditer(match.group(2))
        ]
        groups.append(_Group(category, boxes, match.start(), match.end()))
    return prefix, blocks, groups


def _assemble(
    prefix: Optional[str],
    blocks: List[_Block],
    groups: List[_Group],
    collector: _Collector,
) -> ParsedTrajectories:
    tracklets: Dict[int, ParsedTracklet] = {}
    for block in blocks:
        if block.id in tracklets:
            collector.problem(
                block.start, block.end, f"Repeated <Id{block.id}> block"
            )
            continue
        boxes: Dict[int, NormBox] = {}
        for entry in block.entries:
            if entry.frame < 1:
                collector.problem(
                    entry.start, entry.end, "Frame indices start at 1"
                )
                continue
            if entry.frame in boxes:
                collector.warning(
                    entry.start,
                    entry.end,
                    f"Frame {entry.frame} repeated in <Id{block.id}>, "
                    "first entry kept",
                )
                continue
            box = collector.to_box(entry.values, entry.start, entry.end)
            if box is not None:
                boxes[entry.frame] = box
        if boxes:
            tracklets[block.id] = ParsedTracklet(
                id=block.id,
                category=prefix,
                boxes=dict(sorted(boxes.items())),
            )

    detections = []
    for group in groups:
        if group.category != group.category.strip():
            collector.problem(
                group.start,
                group.end,
                f"Category {group.category!r} has surrounding blanks",
            )
        for values, start, end in group.boxes:
            box = collector.to_box(values, start, end)
            if box is not None:
                detections.append((group.category.strip(), box))

    return ParsedTrajectories(
        tracklets=list(tracklets.values()),
        detections=detections,
        diagnostics=collector.diagnostics,
    )


def parse_response(
    text: str, mode: Union[ParseMode, str] = ParseMode.LENIENT
) -> ParsedTrajectories:
    """
    Parse a trajectory or detection answer

    Never raises on malformed input: problems are reported as diagnostics
    (see `ParsedTrajectories.raise_for_errors`).
    """
    mode = ParseMode(mode)
    collector = _Collector(text, mode)
    if mode == ParseMode.STRICT:
        try:
            tree = _parser.parse(text)
        except UnexpectedInput as e:
            pos = getattr(e, "pos_in_stream", None)
            if pos is None or pos < 0:
                pos = len(text)
            message = str(e).strip().splitlines()[0] if str(e) else ""
            collector.error(
                pos,
                min(pos + 1, len(text)),
                f"Grammar violation: {message or type(e).__name__}",
            )
            return ParsedTrajectories(diagnostics=collector.diagnostics)
        prefix, blocks, groups = _strict_collect(tree, collector)
    else:
        prefix, blocks, groups = _lenient_collect(text, collector)
    return _assemble(prefix, blocks, groups, collector)


def parse_norm_box(
    text: str, mode: Union[ParseMode, str] = ParseMode.STRICT
) -> NormBox:
    """
    Parse a single `[xmin,ymin,xmax,ymax]` literal

    Lenient mode tolerates blanks and clamps out-of-range values.
    """
    if ParseMode(mode) == ParseMode.STRICT:
        try:
            return NormBox.from_literal(text)
        except (GeometryError, ValueError) as e:
            raise GrammarError(str(e))
    match = _BOX_RE.fullmatch(text.strip())
    if match is None:
        raise GrammarError(f"Not a box literal: {text!r}")
    xmin, ymin, xmax, ymax = (
        min(max(v, 0), NORM_RANGE) for v in _ints(match.groups())
    )
    try:
        return NormBox(xmin=xmin, ymin=ymin, xmax=xmax, ymax=ymax)
    except ValueError as e:
        raise GrammarError(str(e))


def split_trajectory_prefix(answer: str) -> Tuple[str, str]:
    """
    Split an answer into its leading trajectory and the text after the
    last `</Idn>` token; the prefix is empty when there is no Id block
    """
    last = None
    for last in _ID_CLOSE.finditer(answer):
        pass
    if last is None:
        return "", answer.strip()
    return answer[: last.end()], answer[last.end() :].strip()
