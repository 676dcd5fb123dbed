"""LRMS query layer with a fixture-driven SLURM emulation.

The emulation reproduces the discovery side of the batch system: a cluster
fixture describes node classes and their general-resource lines, a query
renders them the way ``sinfo -a -h -o "gresinfo=%G"`` would, and collection
extracts the GRES strings while discarding ``(null)`` lines.

An exec-based backend that shells out to a real ``sinfo`` is provided behind
the same interface for deployment parity.
"""

from __future__ import annotations

import subprocess
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path

from .gres import GresParseError, parse_gres_expression

__all__ = [
    "NULL_TOKEN",
    "SINFO_FORMAT",
    "NodeClass",
    "ClusterTotals",
    "ClusterFixture",
    "ClusterSnapshot",
    "LrmsError",
    "UnsupportedFormat",
    "InvalidFixture",
    "load_fixture",
    "sinfo_query",
    "read_gres_info",
    "collect_cluster_info",
    "LrmsBackend",
    "SlurmFixtureBackend",
    "SlurmExecBackend",
]

NULL_TOKEN = "(null)"
SINFO_FORMAT = "gresinfo=%G"
SINFO_ARGS = ("-a", "-h", "-o", SINFO_FORMAT)


class LrmsError(Exception):
    """Base class for LRMS query failures."""


class UnsupportedFormat(LrmsError):
    """The requested sinfo output template is not supported."""


class InvalidFixture(LrmsError):
    """A cluster fixture violates its invariants or cannot be read."""


@dataclass(frozen=True)
class NodeClass:
    """One class of identical nodes: partition, node count and GRES line."""

    partition: str
    node_count: int
    gres_line: str


@dataclass(frozen=True)
class ClusterTotals:
    """Optional fixture bookkeeping; not consumed by the pipeline."""

    total_nodes: int
    total_cpus: int


@dataclass(frozen=True)
class ClusterFixture:
    cluster_name: str
    node_classes: tuple[NodeClass, ...]
    totals: ClusterTotals | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "node_classes", tuple(self.node_classes))

    def validate(self) -> None:
        """Raise :class:`InvalidFixture` unless the fixture is usable."""
        if not self.node_classes:
            raise InvalidFixture("fixture has no node classes")
        for node_class in self.node_classes:
            if not node_class.partition:
                raise InvalidFixture("node class with empty partition name")
            if node_class.node_count < 1:
                raise InvalidFixture(
                    f"partition {node_class.partition!r}: node_count must be positive"
                )
            line = node_class.gres_line
            if not line:
                raise InvalidFixture(
                    f"partition {node_class.partition!r}: empty gres line"
                )
            if line == NULL_TOKEN:
                continue
            try:
                parse_gres_expression(line)
            except GresParseError as exc:
                raise InvalidFixture(
                    f"partition {node_class.partition!r}: bad gres line {line!r}: {exc}"
                ) from exc


@dataclass(frozen=True)
class ClusterSnapshot:
    """Collected LRMS information: the raw GRES expressions of a cluster.

    ``gres`` holds one string per node class, in fixture order, with
    ``(null)`` lines already removed.  ``collected_at`` is a unix timestamp
    with seconds precision.
    """

    cluster_name: str
    gres: tuple[str, ...]
    collected_at: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "gres", tuple(self.gres))
        for value in self.gres:
            if not value or value == NULL_TOKEN:
                raise ValueError(f"snapshot must not contain {value!r}")


def load_fixture(path: str | Path, cluster_name: str | None = None) -> ClusterFixture:
    """Load a cluster fixture from a line-oriented text file.

    One record per line, ``partition|node_count|gres_line``; lines starting
    with ``#`` and blank lines are ignored.  The cluster name defaults to the
    file's stem.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidFixture(f"cannot read fixture {path}: {exc}") from exc
    node_classes = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("|", 2)
        if len(fields) != 3:
            raise InvalidFixture(f"{path}:{lineno}: expected partition|node_count|gres_line")
        partition, count_text, gres_line = (field.strip() for field in fields)
        try:
            node_count = int(count_text)
        except ValueError as exc:
            raise InvalidFixture(f"{path}:{lineno}: bad node count {count_text!r}") from exc
        node_classes.append(NodeClass(partition, node_count, gres_line))
    fixture = ClusterFixture(cluster_name or path.stem, tuple(node_classes))
    fixture.validate()
    return fixture


def sinfo_query(fixture: ClusterFixture, format: str) -> list[str]:
    """Render the fixture the way ``sinfo -a -h -o <format>`` would.

    Only the ``gresinfo=%G`` template is supported; one output line per node
    class in fixture order, ``(null)`` lines included verbatim, no header.
    """
    if format != SINFO_FORMAT:
        raise UnsupportedFormat(f"unsupported sinfo format: {format!r}")
    return [format.replace("%G", node_class.gres_line) for node_class in fixture.node_classes]


def _get_variable(key: str, line: str) -> str:
    prefix = key + "="
    if not line.startswith(prefix):
        raise LrmsError(f"line does not carry {key!r}: {line!r}")
    return line[len(prefix):]


def _extract_gres(lines: list[str]) -> list[str]:
    # Any line containing the null token is dropped (substring match, not
    # equality), then the key prefix is stripped.
    extracted = []
    for line in lines:
        if NULL_TOKEN in line:
            continue
        extracted.append(_get_variable("gresinfo", line))
    return extracted


def read_gres_info(fixture: ClusterFixture) -> list[str]:
    """Return the fixture's GRES expressions with ``(null)`` lines removed.

    Duplicate lines are preserved as-is, in fixture order.
    """
    return _extract_gres(sinfo_query(fixture, SINFO_FORMAT))


def collect_cluster_info(fixture: ClusterFixture, now: float | None = None) -> ClusterSnapshot:
    """Collect a :class:`ClusterSnapshot` from a fixture.

    ``now`` overrides the collection timestamp, for deterministic tests.
    """
    fixture.validate()
    gres = tuple(read_gres_info(fixture))
    timestamp = int(time.time() if now is None else now)
    return ClusterSnapshot(fixture.cluster_name, gres, timestamp)


class LrmsBackend(ABC):
    """Seam for LRMS flavours; the SLURM emulation is the built-in one."""

    @abstractmethod
    def collect(self) -> ClusterSnapshot:
        """Query the LRMS and return a fresh snapshot."""


class SlurmFixtureBackend(LrmsBackend):
    """SLURM emulation driven by an in-memory :class:`ClusterFixture`."""

    def __init__(self, fixture: ClusterFixture):
        self.fixture = fixture

    def collect(self) -> ClusterSnapshot:
        return collect_cluster_info(self.fixture)


class SlurmExecBackend(LrmsBackend):
    """Backend that runs a real ``sinfo -a -h -o "gresinfo=%G"``.

    External process invocations are serialized.  Lines yielding an empty
    value are skipped defensively (a live scheduler reports ``(null)`` for
    resource-less nodes, but an empty field would violate the snapshot
    contract).
    """

    def __init__(self, cluster_name: str, sinfo_path: str = "sinfo"):
        self.cluster_name = cluster_name
        self.sinfo_path = sinfo_path
        self._lock = threading.Lock()

    def collect(self) -> ClusterSnapshot:
        with self._lock:
            try:
                proc = subprocess.run(
                    [self.sinfo_path, *SINFO_ARGS],
                    capture_output=True,
                    text=True,
                    check=False,
                )
            except OSError as exc:
                raise LrmsError(f"cannot run {self.sinfo_path}: {exc}") from exc
        if proc.returncode != 0:
            raise LrmsError(
                f"{self.sinfo_path} exited {proc.returncode}: {proc.stderr.strip()}"
            )
        lines = [line for line in proc.stdout.splitlines() if line.strip()]
        gres = [value for value in _extract_gres(lines) if value]
        return ClusterSnapshot(self.cluster_name, tuple(gres), int(time.time()))
