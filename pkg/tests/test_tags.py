"""Hierarchical compatibility tags and the descriptor-tree index."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetflow import (
    BadTagError,
    DuplicateIdError,
    Tag,
    TagIndex,
    UnknownIdError,
    format_tag,
    is_ancestor_or_equal,
    parse_tag,
    specificity,
)
from oracles import index_candidates_oracle, tag_ancestor_oracle

descriptor = st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789_-", min_size=1, max_size=6)
tag_text = st.lists(descriptor, min_size=1, max_size=6).map(".".join)


class TestParsing:
    def test_round_trip(self):
        assert format_tag(parse_tag("fpga.xilinx.virtex.xcv100")) == "fpga.xilinx.virtex.xcv100"

    def test_display_form_is_canonicalized(self):
        assert format_tag(parse_tag("FPGA.Xilinx.Virtex")) == "fpga.xilinx.virtex"

    def test_specificity_counts_descriptors(self):
        assert specificity(parse_tag("cpu")) == 1
        assert specificity(parse_tag("fpga.xilinx.virtex.xcv100")) == 4

    @pytest.mark.parametrize("bad", ["", ".", "a..b", ".a", "a.", "a b", "a.B@"])
    def test_malformed_text_is_rejected(self, bad):
        with pytest.raises(BadTagError):
            parse_tag(bad)

    def test_tags_are_values(self):
        assert parse_tag("cpu.x86") == parse_tag("CPU.X86")
        assert len({parse_tag("a.b"), parse_tag("a.b"), parse_tag("a")}) == 2

    @given(tag_text)
    def test_round_trip_any(self, text):
        assert format_tag(parse_tag(text)) == text


class TestAncestry:
    def test_platform_examples(self):
        proc = parse_tag("fpga.xilinx.virtex")
        impl = parse_tag("fpga.xilinx.virtex.xcv100")
        assert is_ancestor_or_equal(proc, impl)
        assert not is_ancestor_or_equal(parse_tag("fpga.xilinx.virtex.revb"), impl)
        assert is_ancestor_or_equal(impl, impl)

    def test_sibling_prefix_text_is_not_ancestry(self):
        # descriptor-level prefix, not string prefix
        assert not is_ancestor_or_equal(parse_tag("cpu.x8"), parse_tag("cpu.x86"))

    @given(tag_text, tag_text)
    @settings(max_examples=300)
    def test_matches_linear_oracle(self, a, b):
        assert is_ancestor_or_equal(parse_tag(a), parse_tag(b)) == tag_ancestor_oracle(a, b)

    @given(tag_text)
    def test_reflexive(self, a):
        assert is_ancestor_or_equal(parse_tag(a), parse_tag(a))

    @given(tag_text, tag_text, tag_text)
    @settings(max_examples=200)
    def test_transitive(self, a, b, c):
        ta, tb, tc = parse_tag(a), parse_tag(b), parse_tag(c)
        if is_ancestor_or_equal(ta, tb) and is_ancestor_or_equal(tb, tc):
            assert is_ancestor_or_equal(ta, tc)

    @given(tag_text, tag_text)
    @settings(max_examples=200)
    def test_antisymmetric(self, a, b):
        ta, tb = parse_tag(a), parse_tag(b)
        if is_ancestor_or_equal(ta, tb) and is_ancestor_or_equal(tb, ta):
            assert ta == tb


class TestIndex:
    def test_candidates_walk_the_ancestor_path(self):
        idx = TagIndex()
        idx.insert(parse_tag("fpga"), "root")
        idx.insert(parse_tag("fpga.xilinx"), "mid")
        idx.insert(parse_tag("fpga.xilinx.virtex"), "leaf")
        idx.insert(parse_tag("fpga.altera"), "other")
        got = idx.candidates(parse_tag("fpga.xilinx.virtex.xcv100"))
        assert sorted(got) == ["leaf", "mid", "root"]

    def test_unrelated_branches_do_not_match(self):
        idx = TagIndex()
        idx.insert(parse_tag("cpu.arm"), "a")
        assert idx.candidates(parse_tag("cpu.x86")) == set()

    def test_identifier_sits_on_exactly_one_node(self):
        idx = TagIndex()
        idx.insert(parse_tag("cpu"), "a")
        with pytest.raises(DuplicateIdError):
            idx.insert(parse_tag("fpga"), "a")

    def test_remove_then_reinsert(self):
        idx = TagIndex()
        idx.insert(parse_tag("cpu.x86"), "a")
        idx.remove("a")
        assert idx.candidates(parse_tag("cpu.x86.i7")) == set()
        idx.insert(parse_tag("gpu"), "a")
        assert idx.candidates(parse_tag("gpu.nvidia")) == {"a"}

    def test_remove_unknown_identifier(self):
        with pytest.raises(UnknownIdError):
            TagIndex().remove("ghost")

    def test_multiple_ids_per_node(self):
        idx = TagIndex()
        idx.insert(parse_tag("cpu"), "a")
        idx.insert(parse_tag("cpu"), "b")
        assert sorted(idx.candidates(parse_tag("cpu"))) == ["a", "b"]

    def test_randomized_against_linear_scan(self):
        rng = random.Random(20240817)
        alphabet = ["cpu", "fpga", "gpu", "xilinx", "altera", "virtex", "a", "b"]
        for _ in range(50):
            idx = TagIndex()
            entries = []
            for i in range(rng.randint(0, 30)):
                text = ".".join(
                    rng.choice(alphabet) for _ in range(rng.randint(1, 4))
                )
                idx.insert(parse_tag(text), f"id{i}")
                entries.append((f"id{i}", text))
            # interleave removals
            removed = set()
            for ident, _ in entries:
                if rng.random() < 0.25:
                    idx.remove(ident)
                    removed.add(ident)
            live = [(i, t) for i, t in entries if i not in removed]
            for _ in range(10):
                query = ".".join(rng.choice(alphabet) for _ in range(rng.randint(1, 5)))
                assert sorted(idx.candidates(parse_tag(query))) == index_candidates_oracle(
                    live, query
                )


def test_tag_is_immutable():
    tag = parse_tag("cpu.x86")
    with pytest.raises(Exception):
        tag.descriptors = ("gpu",)
    assert isinstance(tag, Tag)
