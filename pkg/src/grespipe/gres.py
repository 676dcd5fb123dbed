"""Grammar and data model for SLURM general-resource (GRES) expressions.

A GRES expression is a comma-separated list of segments, each of the form
``name[:subtype][:count]``, as emitted by ``sinfo -o "%G"`` and accepted by
``--gres=`` requests.  Examples:

    gpu:k80ce:4,mps:no_consume:1,gpuexcl:no_consume:1
    gpu:v100:2
    hbm:16G
    hbm:0

Counts may carry a binary unit suffix (K, M, G, T, P; 1024-based, following
SLURM's memory-style convention), which is preserved verbatim so that
rendering reproduces the original text exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

__all__ = [
    "GresEntry",
    "GresList",
    "GresParseError",
    "EmptySegment",
    "MalformedCount",
    "TooManyFields",
    "parse_gres_expression",
    "render_gres_expression",
    "total_capacity",
]

_COUNT_RE = re.compile(r"[0-9]+[KMGTP]?\Z")
_SUFFIX_RANK = {"K": 1, "M": 2, "G": 3, "T": 4, "P": 5}


class GresParseError(ValueError):
    """A GRES expression violates the ``name[:subtype][:count]`` grammar."""

    def __init__(self, message: str, segment_index: int):
        super().__init__(f"segment {segment_index}: {message}")
        self.segment_index = segment_index


class EmptySegment(GresParseError):
    """A segment between commas, or a field between colons, is empty."""


class MalformedCount(GresParseError):
    """A count token does not match ``[0-9]+[KMGTP]?``."""


class TooManyFields(GresParseError):
    """A segment has more than three colon-separated tokens."""


def expand_count(literal: str) -> int:
    """Expand a count literal such as ``16G`` into its base-unit integer.

    The suffix multiplier is 1024 to the power of the suffix rank
    (K=1 ... P=5); a bare number has rank 0.
    """
    if not _COUNT_RE.fullmatch(literal):
        raise ValueError(f"not a count literal: {literal!r}")
    if literal[-1] in _SUFFIX_RANK:
        return int(literal[:-1]) * 1024 ** _SUFFIX_RANK[literal[-1]]
    return int(literal)


@dataclass(frozen=True)
class GresEntry:
    """One parsed GRES segment.

    ``count_literal`` is the count token exactly as written (digits plus
    optional suffix), or ``None`` when the segment carried no count at all;
    an omitted count means 1.  Keeping the literal makes rendering lossless:
    ``gpu`` and ``gpu:1`` parse to distinct entries and render back to their
    original forms, as do suffixed counts like ``16G``.
    """

    name: str
    subtype: str | None = None
    count: int = 1
    count_literal: str | None = None

    def __post_init__(self) -> None:
        _check_token("name", self.name)
        if self.subtype is not None:
            _check_token("subtype", self.subtype)
        if self.count < 0:
            raise ValueError(f"negative count: {self.count}")
        if self.count_literal is None:
            if self.count != 1:
                raise ValueError("an entry without a count literal defaults to count 1")
        elif expand_count(self.count_literal) != self.count:
            raise ValueError(
                f"count {self.count} does not match literal {self.count_literal!r}"
            )

    @property
    def count_suffix(self) -> str | None:
        """Unit suffix of the count literal (one of K, M, G, T, P), if any."""
        if self.count_literal and self.count_literal[-1] in _SUFFIX_RANK:
            return self.count_literal[-1]
        return None

    def __str__(self) -> str:
        parts = [self.name]
        if self.subtype is not None:
            parts.append(self.subtype)
        if self.count_literal is not None:
            parts.append(self.count_literal)
        return ":".join(parts)


def _check_token(label: str, value: str) -> None:
    if not value:
        raise ValueError(f"{label} must be non-empty")
    if ":" in value or "," in value:
        raise ValueError(f"{label} must not contain ':' or ',': {value!r}")


@dataclass(frozen=True)
class GresList:
    """An ordered list of GRES entries; order is preserved exactly as parsed."""

    entries: tuple[GresEntry, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))

    def __iter__(self) -> Iterator[GresEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __str__(self) -> str:
        return ",".join(str(entry) for entry in self.entries)


def parse_gres_expression(text: str) -> GresList:
    """Parse a single-line GRES expression into a :class:`GresList`.

    Splits on ``,``; each segment splits on ``:`` into one to three tokens
    read as ``name[:subtype][:count]``.  In the two-token form the second
    token is a count when it matches ``[0-9]+[KMGTP]?`` and a subtype
    otherwise.  An omitted count defaults to 1.  The empty string parses to
    an empty list.

    Raises :class:`EmptySegment`, :class:`MalformedCount` or
    :class:`TooManyFields`; empty fields inside a segment (``gpu:`` or
    ``:v100``) report as :class:`EmptySegment`.
    """
    if text == "":
        return GresList()
    entries = []
    for index, segment in enumerate(text.split(",")):
        if segment == "":
            raise EmptySegment("empty segment", index)
        tokens = segment.split(":")
        if len(tokens) > 3:
            raise TooManyFields(f"{len(tokens)} fields in {segment!r}", index)
        name = tokens[0]
        if name == "":
            raise EmptySegment(f"empty name in {segment!r}", index)
        subtype: str | None = None
        literal: str | None = None
        if len(tokens) == 2:
            token = tokens[1]
            if token == "":
                raise EmptySegment(f"empty field in {segment!r}", index)
            if _COUNT_RE.fullmatch(token):
                literal = token
            else:
                subtype = token
        elif len(tokens) == 3:
            subtype = tokens[1]
            if subtype == "":
                raise EmptySegment(f"empty subtype in {segment!r}", index)
            literal = tokens[2]
            if not _COUNT_RE.fullmatch(literal):
                raise MalformedCount(f"bad count {literal!r} in {segment!r}", index)
        count = expand_count(literal) if literal is not None else 1
        entries.append(GresEntry(name, subtype, count, literal))
    return GresList(tuple(entries))


def render_gres_expression(gres_list: GresList) -> str:
    """Render a :class:`GresList` back to its comma/colon joined wire form.

    Count literals are re-emitted verbatim, so rendering the result of
    :func:`parse_gres_expression` reproduces the input exactly.
    """
    return str(gres_list)


def total_capacity(
    lists: Iterable[GresList],
    resource_name: str,
    subtype_filter: str | None = None,
) -> int:
    """Sum the counts of all entries matching ``resource_name`` (and, when
    given, ``subtype_filter``) across a collection of GRES lists.

    Unmatched names yield 0.
    """
    return sum(
        entry.count
        for gres_list in lists
        for entry in gres_list
        if entry.name == resource_name
        and (subtype_filter is None or entry.subtype == subtype_filter)
    )
