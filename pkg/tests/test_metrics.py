import functools
import random

import pytest

from tablesynth.errors import ParseFailure
from tablesynth.metrics import (Detection, DetectionSet, TreeNode, ap50,
                                ap50_dataset, normalized_string_distance,
                                parse_table_tree, strip_text,
                                substitution_cost, teds, tree_edit_distance)
from tablesynth.model import Rect


# --- independent oracle: naive recursive forest edit distance ---------------

def _freeze(node):
    return (node.tag, node.colspan, node.rowspan, node.text,
            tuple(_freeze(c) for c in node.children))


def _thaw(frozen):
    tag, cs, rs, text, children = frozen
    return TreeNode(tag, cs, rs, text, [_thaw(c) for c in children])


def _forest_size(forest):
    return sum(1 + _forest_size(t[4]) for t in forest)


def oracle_distance(a: TreeNode, b: TreeNode, content_mode: bool) -> float:
    @functools.lru_cache(maxsize=None)
    def d(f, g):
        if not f and not g:
            return 0.0
        if not f:
            return float(_forest_size(g))
        if not g:
            return float(_forest_size(f))
        t1, t2 = f[-1], g[-1]
        delete = d(f[:-1] + t1[4], g) + 1.0
        insert = d(f, g[:-1] + t2[4]) + 1.0
        sub = substitution_cost(_thaw(t1), _thaw(t2), content_mode)
        match = d(f[:-1], g[:-1]) + d(t1[4], t2[4]) + sub
        return min(delete, insert, match)

    return d((_freeze(a),), (_freeze(b),))


def random_tree(rng, max_nodes=8):
    budget = rng.randint(1, max_nodes)

    def grow(depth):
        nonlocal budget
        budget -= 1
        tag = rng.choice(["table", "tr", "td", "td", "thead"]) \
            if depth else "table"
        node = TreeNode(tag,
                        colspan=rng.choice([1, 1, 1, 2]),
                        rowspan=rng.choice([1, 1, 2]),
                        text=rng.choice(["", "a", "ab", "合计"]))
        if tag != "td":
            while budget > 0 and rng.random() < 0.6 and depth < 3:
                node.children.append(grow(depth + 1))
        return node

    return grow(0)


# --- tree edit distance -----------------------------------------------------

class TestTreeEditDistance:
    def tree(self, markup):
        return parse_table_tree(markup)

    def test_identical_zero(self):
        t = self.tree("<table><tr><td>a</td><td>b</td></tr></table>")
        assert tree_edit_distance(t, t) == 0.0

    def test_one_deletion(self):
        a = self.tree("<table><tr><td></td><td></td></tr></table>")
        b = self.tree("<table><tr><td></td></tr></table>")
        assert tree_edit_distance(a, b) == 1.0
        assert oracle_distance(a, b, True) == 1.0

    def test_text_substitution_half(self):
        a = self.tree("<table><tr><td>ab</td></tr></table>")
        b = self.tree("<table><tr><td>ac</td></tr></table>")
        assert tree_edit_distance(a, b) == 0.5

    def test_span_mismatch_costs_one(self):
        a = self.tree('<table><tr><td colspan="2">x</td></tr></table>')
        b = self.tree("<table><tr><td>x</td></tr></table>")
        assert tree_edit_distance(a, b) == 1.0

    def test_struct_mode_ignores_text(self):
        a = self.tree("<table><tr><td>ab</td></tr></table>")
        b = self.tree("<table><tr><td>zz</td></tr></table>")
        assert tree_edit_distance(strip_text(a), strip_text(b),
                                  content_mode=False) == 0.0

    def test_agrees_with_oracle_on_random_pairs(self):
        rng = random.Random(4242)
        for _ in range(500):
            a = random_tree(rng)
            b = random_tree(rng)
            got = tree_edit_distance(a, b)
            want = oracle_distance(a, b, True)
            assert got == pytest.approx(want), (_freeze(a), _freeze(b))

    def test_struct_mode_agrees_with_oracle(self):
        rng = random.Random(77)
        for _ in range(200):
            a, b = random_tree(rng), random_tree(rng)
            assert tree_edit_distance(a, b, content_mode=False) == \
                pytest.approx(oracle_distance(a, b, False))


class TestStringDistance:
    def test_examples(self):
        assert normalized_string_distance("", "") == 0.0
        assert normalized_string_distance("ab", "ac") == 0.5
        assert normalized_string_distance("abc", "") == 1.0
        assert normalized_string_distance("kitten", "sitting") == \
            pytest.approx(3 / 7)

    def test_symmetry_and_bounds(self):
        rng = random.Random(5)
        for _ in range(100):
            a = "".join(rng.choice("abc") for _ in range(rng.randint(0, 6)))
            b = "".join(rng.choice("abc") for _ in range(rng.randint(0, 6)))
            d = normalized_string_distance(a, b)
            assert 0.0 <= d <= 1.0
            assert d == normalized_string_distance(b, a)


class TestTeds:
    def test_self_unity(self):
        m = "<table><tr><td>a</td><td>b</td></tr></table>"
        assert teds(m, m) == 1.0
        assert teds(m, m, struct_only=True) == 1.0

    def test_missing_cell_075(self):
        gt = "<table><tr><td>a</td><td>b</td></tr></table>"
        pred = "<table><tr><td>a</td></tr></table>"
        assert teds(gt, pred) == 0.75
        assert teds(gt, pred, struct_only=True) == 0.75

    def test_text_difference_only(self):
        gt = "<table><tr><td>ab</td></tr></table>"
        pred = "<table><tr><td>ac</td></tr></table>"
        assert teds(gt, pred) == pytest.approx(1 - 0.5 / 3)
        assert teds(gt, pred, struct_only=True) == 1.0

    def test_struct_only_not_lower_when_structures_match(self):
        gt = "<table><tr><td>合计</td><td>100</td></tr></table>"
        pred = "<table><tr><td>总计</td><td>101</td></tr></table>"
        assert teds(gt, pred, struct_only=True) >= teds(gt, pred)

    def test_range(self):
        gt = "<table><tr><td>a</td></tr></table>"
        pred = ("<table><tbody>" + "<tr><td>x</td><td>y</td></tr>" * 4
                + "</tbody></table>")
        assert 0.0 <= teds(gt, pred) <= 1.0

    def test_parse_failure(self):
        with pytest.raises(ParseFailure):
            teds("<div>nope</div>", "<table><tr><td>a</td></tr></table>")
        with pytest.raises(ParseFailure):
            teds("<table><tr><td>a</td></tr></table>",
                 '<table><tr><td colspan="x">a</td></tr></table>')


class TestAp50:
    def det(self, x, score):
        return Detection(box=Rect(x, 0, 10, 10), score=score)

    def test_perfect(self):
        gt = (Rect(0, 0, 10, 10), Rect(20, 0, 10, 10))
        preds = (self.det(0, 0.9), self.det(20, 0.8))
        assert ap50(DetectionSet(preds, gt)) == 1.0

    def test_no_predictions(self):
        assert ap50(DetectionSet((), (Rect(0, 0, 10, 10),))) == 0.0

    def test_no_gt_no_predictions(self):
        assert ap50(DetectionSet((), ())) == 1.0

    def test_no_gt_with_predictions(self):
        assert ap50(DetectionSet((self.det(0, 0.9),), ())) == 0.0

    def test_hand_computed_interpolation(self):
        # TP(.9), FP(.8), TP(.7) on 2 GT: AP = (51*1 + 50*(2/3))/101
        gt = (Rect(0, 0, 10, 10), Rect(20, 0, 10, 10))
        preds = (self.det(0, 0.9), self.det(100, 0.8), self.det(20, 0.7))
        expect = (51 * 1.0 + 50 * (2 / 3)) / 101
        assert ap50(DetectionSet(preds, gt)) == pytest.approx(expect)
        assert round(expect, 4) == 0.8350

    def test_iou_threshold_boundary(self):
        # IoU exactly 0.5 counts as a match
        gt = (Rect(0, 0, 10, 10),)
        hit = Detection(box=Rect(0, 0, 10, 20), score=0.9)
        assert Rect(0, 0, 10, 20).iou(gt[0]) == pytest.approx(0.5)
        assert ap50(DetectionSet((hit,), gt)) == 1.0
        miss = Detection(box=Rect(0, 0, 10, 21), score=0.9)
        assert ap50(DetectionSet((miss,), gt)) == 0.0

    def test_score_rescaling_invariance(self):
        gt = (Rect(0, 0, 10, 10), Rect(20, 0, 10, 10))
        preds = (self.det(0, 0.9), self.det(100, 0.5), self.det(20, 0.3))
        scaled = tuple(Detection(p.box, p.score * 0.1) for p in preds)
        assert ap50(DetectionSet(preds, gt)) == \
            ap50(DetectionSet(scaled, gt))

    def test_high_score_false_positive_penalized(self):
        # a false positive ranked above the match caps precision at 1/2
        gt = (Rect(0, 0, 10, 10),)
        preds = (self.det(100, 0.95), self.det(0, 0.9))
        assert ap50(DetectionSet(preds, gt)) == pytest.approx(0.5)

    def test_dataset_pools_matches(self):
        a = DetectionSet((self.det(0, 0.9),), (Rect(0, 0, 10, 10),))
        b = DetectionSet((), (Rect(0, 0, 10, 10),))
        # one of two GT found at high score: recall caps at 0.5
        val = ap50_dataset([a, b])
        assert val == pytest.approx(51 / 101)
