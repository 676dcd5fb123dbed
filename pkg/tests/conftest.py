"""Shared constants, fixtures and generators for the test suite."""

from __future__ import annotations

import random
import string

import pytest

from grespipe import data
from grespipe.infoprovider import SiteConfig
from grespipe.lrms import ClusterFixture, NodeClass, load_fixture

# The six node-class GRES lines of the emulated cluster, in fixture order.
SINFO_BARE_LINES = [
    "(null)",
    "gpu:k80ce:4,mps:no_consume:1,gpuexcl:no_consume:1",
    "gpu:k80ce:8,mps:no_consume:1,gpuexcl:no_consume:1",
    "gpu:v100:2,mps:no_consume:1,gpuexcl:no_consume:1",
    "hbm:16G",
    "hbm:0",
]
RESOURCE_LINES = [line for line in SINFO_BARE_LINES if line != "(null)"]
PREFIXED_LINES = [f"gresinfo={line}" for line in SINFO_BARE_LINES]

TOKEN_CHARS = string.ascii_lowercase + string.digits + "_-."
ESCAPABLE_CHARS = "&<>\"'"


@pytest.fixture
def kebnekaise_fixture() -> ClusterFixture:
    return load_fixture(data.KEBNEKAISE_FIXTURE)


@pytest.fixture
def site_config() -> SiteConfig:
    return SiteConfig.from_file(data.SITE_CONF)


def random_token(rng: random.Random, alphabet: str = TOKEN_CHARS) -> str:
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 8)))


def random_count_literal(rng: random.Random) -> str:
    # Canonical digits (no leading zeros) plus an optional binary suffix.
    return str(rng.randint(0, 99999)) + rng.choice(["", "K", "M", "G", "T", "P"])


def random_gres_segment(rng: random.Random, alphabet: str = TOKEN_CHARS) -> str:
    name = random_token(rng, alphabet)
    form = rng.randint(0, 3)
    if form == 0:
        return name
    if form == 1:
        return f"{name}:{random_token(rng, alphabet)}"
    if form == 2:
        return f"{name}:{random_count_literal(rng)}"
    return f"{name}:{random_token(rng, alphabet)}:{random_count_literal(rng)}"


def random_gres_line(rng: random.Random, alphabet: str = TOKEN_CHARS) -> str:
    return ",".join(random_gres_segment(rng, alphabet) for _ in range(rng.randint(1, 4)))


def random_fixture(
    rng: random.Random,
    null_fraction: float | None = None,
    escapable: bool = False,
) -> ClusterFixture:
    """A valid random fixture; ``null_fraction`` steers how many node classes
    advertise nothing (``(null)``), and ``escapable`` mixes XML-significant
    characters into the resource tokens.
    """
    if null_fraction is None:
        null_fraction = rng.random()
    alphabet = TOKEN_CHARS + (ESCAPABLE_CHARS if escapable else "")
    classes = []
    for index in range(rng.randint(1, 8)):
        if rng.random() < null_fraction:
            line = "(null)"
        else:
            line = random_gres_line(rng, alphabet)
            if rng.random() < 0.1:
                # A line merely containing the null marker is also dropped.
                line = f"{random_token(rng)}(null){random_token(rng)}:{random_count_literal(rng)}"
        classes.append(NodeClass(f"part{index}", rng.randint(1, 100), line))
    return ClusterFixture("random-cluster", tuple(classes))


def brute_force_match(
    request: list[tuple[str, str | None, int]],
    classes: list[list[tuple[str, str | None, int]]],
) -> bool:
    """Exhaustive matchmaking oracle over raw (name, subtype, count) tuples:
    some single class must satisfy every requested entry.
    """
    if not request:
        return True
    for node_class in classes:
        satisfied_all = True
        for want_name, want_subtype, want_count in request:
            entry_found = False
            for have_name, have_subtype, have_count in node_class:
                if have_name != want_name:
                    continue
                if want_subtype is not None and have_subtype != want_subtype:
                    continue
                if have_count < want_count:
                    continue
                entry_found = True
                break
            if not entry_found:
                satisfied_all = False
                break
        if satisfied_all:
            return True
    return False
