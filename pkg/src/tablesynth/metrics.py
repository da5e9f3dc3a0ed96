"""Evaluation metrics: tree edit distance, TEDS / TEDS-Struct, AP50."""
from __future__ import annotations

from dataclasses import dataclass, field
from html.parser import HTMLParser
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import ParseFailure
from .model import Rect


# --- table trees -----------------------------------------------------------

@dataclass
class TreeNode:
    tag: str
    colspan: int = 1
    rowspan: int = 1
    text: str = ""
    children: List["TreeNode"] = field(default_factory=list)

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)


class _TreeBuilder(HTMLParser):
    CONTAINER_TAGS = ("table", "thead", "tbody", "tr")
    CELL_TAGS = ("td", "th")

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.root: Optional[TreeNode] = None
        self._stack: List[TreeNode] = []
        self._cell: Optional[TreeNode] = None

    def handle_starttag(self, tag, attrs):
        tag = tag.lower()
        if tag in self.CONTAINER_TAGS:
            node = TreeNode(tag)
            if self._stack:
                self._stack[-1].children.append(node)
            elif self.root is None:
                self.root = node
            self._stack.append(node)
        elif tag in self.CELL_TAGS:
            a = dict(attrs)
            try:
                node = TreeNode(tag, colspan=int(a.get("colspan", 1)),
                                rowspan=int(a.get("rowspan", 1)))
            except (TypeError, ValueError):
                raise ParseFailure("non-integer span attribute")
            if not self._stack:
                raise ParseFailure(f"<{tag}> outside a table")
            self._stack[-1].children.append(node)
            self._cell = node

    def handle_endtag(self, tag):
        tag = tag.lower()
        if tag in self.CONTAINER_TAGS:
            if not self._stack or self._stack[-1].tag != tag:
                raise ParseFailure(f"unbalanced </{tag}>")
            self._stack.pop()
        elif tag in self.CELL_TAGS:
            self._cell = None

    def handle_data(self, data):
        if self._cell is not None:
            self._cell.text += data


def parse_table_tree(markup: str) -> TreeNode:
    """Parse one table element into a rooted ordered labeled tree."""
    builder = _TreeBuilder()
    try:
        builder.feed(markup)
        builder.close()
    except ParseFailure:
        raise
    except Exception as exc:
        raise ParseFailure(str(exc))
    if builder.root is None or builder.root.tag != "table":
        raise ParseFailure("no <table> root")
    if builder._stack:
        raise ParseFailure(f"unclosed tags: {[n.tag for n in builder._stack]}")
    return builder.root


def strip_text(node: TreeNode) -> TreeNode:
    return TreeNode(node.tag, node.colspan, node.rowspan, "",
                    [strip_text(c) for c in node.children])


# --- string edit distance --------------------------------------------------

def normalized_string_distance(a: str, b: str) -> float:
    """Levenshtein distance / max length; 0 when both strings are empty."""
    if not a and not b:
        return 0.0
    la, lb = len(a), len(b)
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        for j in range(1, lb + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[lb] / max(la, lb)


def substitution_cost(n1: TreeNode, n2: TreeNode, content_mode: bool) -> float:
    if n1.tag != n2.tag or n1.colspan != n2.colspan or n1.rowspan != n2.rowspan:
        return 1.0
    if content_mode and n1.tag == "td":
        return normalized_string_distance(n1.text, n2.text)
    return 0.0


# --- Zhang-Shasha ordered tree edit distance -------------------------------

def _postorder(root: TreeNode):
    """Postorder node list and leftmost-leaf-descendant indices (1-based)."""
    nodes: List[TreeNode] = []
    lld: List[int] = []

    def walk(node: TreeNode) -> int:
        first = None
        for ch in node.children:
            idx = walk(ch)
            if first is None:
                first = lld[idx - 1]
        nodes.append(node)
        my = len(nodes)
        lld.append(first if first is not None else my)
        return my

    walk(root)
    return nodes, lld


def tree_edit_distance(a: TreeNode, b: TreeNode,
                       content_mode: bool = True) -> float:
    """Minimal-cost ordered tree edit distance (insert/delete cost 1,
    substitution per substitution_cost)."""
    nodes1, l1 = _postorder(a)
    nodes2, l2 = _postorder(b)
    n, m = len(nodes1), len(nodes2)

    keyroots1 = [i for i in range(1, n + 1)
                 if i == n or all(l1[j - 1] != l1[i - 1] for j in range(i + 1, n + 1))]
    keyroots2 = [j for j in range(1, m + 1)
                 if j == m or all(l2[k - 1] != l2[j - 1] for k in range(j + 1, m + 1))]

    td = [[0.0] * (m + 1) for _ in range(n + 1)]

    for i in keyroots1:
        for j in keyroots2:
            li, lj = l1[i - 1], l2[j - 1]
            fd = [[0.0] * (j - lj + 2) for _ in range(i - li + 2)]
            for di in range(1, i - li + 2):
                fd[di][0] = fd[di - 1][0] + 1.0
            for dj in range(1, j - lj + 2):
                fd[0][dj] = fd[0][dj - 1] + 1.0
            for di in range(1, i - li + 2):
                for dj in range(1, j - lj + 2):
                    gi = li + di - 1  # global index, 1-based
                    gj = lj + dj - 1
                    if l1[gi - 1] == li and l2[gj - 1] == lj:
                        cost = substitution_cost(nodes1[gi - 1], nodes2[gj - 1],
                                                 content_mode)
                        fd[di][dj] = min(fd[di - 1][dj] + 1.0,
                                         fd[di][dj - 1] + 1.0,
                                         fd[di - 1][dj - 1] + cost)
                        td[gi][gj] = fd[di][dj]
                    else:
                        pi = l1[gi - 1] - li
                        pj = l2[gj - 1] - lj
                        fd[di][dj] = min(fd[di - 1][dj] + 1.0,
                                         fd[di][dj - 1] + 1.0,
                                         fd[pi][pj] + td[gi][gj])
    return td[n][m]


def teds(gt_markup: str, pred_markup: str, struct_only: bool = False) -> float:
    """Tree-edit-distance-based similarity in [0, 1]."""
    gt = parse_table_tree(gt_markup)
    pred = parse_table_tree(pred_markup)
    if struct_only:
        gt, pred = strip_text(gt), strip_text(pred)
    dist = tree_edit_distance(gt, pred, content_mode=not struct_only)
    denom = max(gt.size(), pred.size())
    return max(0.0, 1.0 - dist / denom)


# --- AP50 ------------------------------------------------------------------

@dataclass(frozen=True)
class Detection:
    box: Rect
    score: float


@dataclass(frozen=True)
class DetectionSet:
    predictions: Tuple[Detection, ...]
    ground_truth: Tuple[Rect, ...]


def _match_set(ds: DetectionSet, iou_thresh: float) -> List[Tuple[float, bool]]:
    """Greedy COCO-style matching; returns (score, is_tp) per prediction."""
    order = sorted(range(len(ds.predictions)),
                   key=lambda i: -ds.predictions[i].score)
    matched = [False] * len(ds.ground_truth)
    out = []
    for i in order:
        pred = ds.predictions[i]
        best_j, best_iou = -1, iou_thresh
        for j, gt in enumerate(ds.ground_truth):
            if matched[j]:
                continue
            iou = pred.box.iou(gt)
            if iou >= best_iou:
                best_j, best_iou = j, iou
        if best_j >= 0:
            matched[best_j] = True
            out.append((pred.score, True))
        else:
            out.append((pred.score, False))
    return out


def ap50_from_matches(matches: List[Tuple[float, bool]], n_gt: int) -> float:
    """COCO 101-point interpolated AP from (score, is_tp) pairs."""
    if n_gt == 0:
        return 1.0 if not matches else 0.0
    matches = sorted(matches, key=lambda t: -t[0])
    precisions, recalls = [], []
    tp = fp = 0
    for _, is_tp in matches:
        if is_tp:
            tp += 1
        else:
            fp += 1
        precisions.append(tp / (tp + fp))
        recalls.append(tp / n_gt)
    total = 0.0
    for k in range(101):
        r = k / 100.0
        p = max((prec for prec, rec in zip(precisions, recalls) if rec >= r),
                default=0.0)
        total += p
    return total / 101.0


def ap50(ds: DetectionSet, iou_thresh: float = 0.5) -> float:
    return ap50_from_matches(_match_set(ds, iou_thresh), len(ds.ground_truth))


def ap50_dataset(sets: Sequence[DetectionSet], iou_thresh: float = 0.5) -> float:
    """Corpus-level AP50: per-image greedy matching, one global PR curve."""
    matches: List[Tuple[float, bool]] = []
    n_gt = 0
    for ds in sets:
        matches.extend(_match_set(ds, iou_thresh))
        n_gt += len(ds.ground_truth)
    return ap50_from_matches(matches, n_gt)
