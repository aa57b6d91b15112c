"""Hierarchical compatibility tags.

A tag is an ordered list of descriptors written ``"type.make.family.model"``,
lower-cased on parse. Compatibility between a processor and an implementation
is pure prefix ancestry: the processor's tag must be an equal-or-ancestor
prefix of the implementation's tag. Specificity grows with descriptor count,
so a more specific implementation can only land on an equally or less
specific processor.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import (
    DuplicateIdError,
    EmptyDescriptorError,
    EmptyTagError,
    IllegalCharacterError,
    UnknownIdError,
)

SEPARATOR = "."
_DESCRIPTOR_RE = re.compile(r"^[a-z0-9_-]+$")


@dataclass(frozen=True)
class Tag:
    """Immutable descriptor path; canonical text form is lower-case, dot-joined."""

    descriptors: tuple[str, ...]

    def __post_init__(self):
        if not self.descriptors:
            raise EmptyTagError("tag must have at least one descriptor")
        for d in self.descriptors:
            if not d:
                raise EmptyDescriptorError("empty descriptor in tag")
            if not _DESCRIPTOR_RE.match(d):
                raise IllegalCharacterError(f"illegal descriptor {d!r}")

    def __str__(self) -> str:
        return SEPARATOR.join(self.descriptors)


def parse_tag(text: str) -> Tag:
    """Parse dot-separated descriptors, case-folding to lower case.

    Raises EmptyTagError for empty input, EmptyDescriptorError for a
    leading/trailing/double dot, IllegalCharacterError for anything outside
    ``[a-z0-9_-]`` after folding.
    """
    if not isinstance(text, str) or text == "":
        raise EmptyTagError("tag text is empty")
    return Tag(tuple(part.lower() for part in text.split(SEPARATOR)))


def format_tag(tag: Tag) -> str:
    """Canonical text form; ``parse_tag(format_tag(t)) == t``."""
    return str(tag)


def specificity(tag: Tag) -> int:
    """Number of descriptors; grows as the tag narrows down the hierarchy."""
    return len(tag.descriptors)


def is_ancestor_or_equal(processor_tag: Tag, implementation_tag: Tag) -> bool:
    """True iff the processor tag is a (proper or equal) prefix of the
    implementation tag.

    This is the single compatibility predicate used platform-wide.
    """
    p = processor_tag.descriptors
    i = implementation_tag.descriptors
    return len(p) <= len(i) and i[: len(p)] == p


class _Node:
    __slots__ = ("children", "ids")

    def __init__(self):
        self.children: dict[str, _Node] = {}
        self.ids: set[str] = set()


class TagIndex:
    """Descriptor tree mapping tags to attached identifiers.

    Lookups return all identifiers attached along the root-to-node path of a
    query tag, i.e. exactly the ancestor-or-equal entries. An identifier may
    live on at most one node.
    """

    def __init__(self):
        self._root = _Node()
        self._where: dict[str, Tag] = {}

    def __contains__(self, identifier: str) -> bool:
        return identifier in self._where

    def __len__(self) -> int:
        return len(self._where)

    def insert(self, tag: Tag, identifier: str) -> None:
        if identifier in self._where:
            raise DuplicateIdError(f"id {identifier!r} already indexed")
        node = self._root
        for d in tag.descriptors:
            node = node.children.setdefault(d, _Node())
        node.ids.add(identifier)
        self._where[identifier] = tag

    def remove(self, identifier: str) -> None:
        tag = self._where.pop(identifier, None)
        if tag is None:
            raise UnknownIdError(f"id {identifier!r} not indexed")
        node = self._root
        path = []
        for d in tag.descriptors:
            path.append((node, d))
            node = node.children[d]
        node.ids.discard(identifier)
        # prune now-empty branches
        for parent, d in reversed(path):
            child = parent.children[d]
            if child.ids or child.children:
                break
            del parent.children[d]

    def candidates(self, implementation_tag: Tag) -> set[str]:
        """Identifiers attached on the path spelled by ``implementation_tag``.

        These are precisely the ids whose tag is ancestor-or-equal to the
        query, so an indexed processor appears iff it is compatible.
        """
        out: set[str] = set()
        node = self._root
        for d in implementation_tag.descriptors:
            node = node.children.get(d)
            if node is None:
                return out
            out |= node.ids
        return out
