"""Client side of the pipeline: fetch the info document, parse it back into
computing-manager records, and format them the way ``arcinfo`` prints them.
"""

from __future__ import annotations

import urllib.error
import urllib.parse
import urllib.request
from xml.etree import ElementTree

from .infoprovider import ComputingManagerRecord, ComputingServiceRecord

__all__ = [
    "ClientError",
    "MalformedXml",
    "NoServices",
    "FetchError",
    "Unreachable",
    "BadStatus",
    "BadContentType",
    "parse_execution_targets",
    "format_arcinfo",
    "fetch_info",
]

_XML_MIME_TYPES = ("application/xml", "text/xml")


class ClientError(Exception):
    """Base class for client-side failures."""


class MalformedXml(ClientError):
    """The document is not well-formed XML."""


class NoServices(ClientError):
    """The document contains no ComputingService element."""


class FetchError(ClientError):
    """Base class for transport failures."""


class Unreachable(FetchError):
    """The endpoint could not be contacted."""


class BadStatus(FetchError):
    """The endpoint answered with a non-200 status."""

    def __init__(self, status: int, message: str = ""):
        super().__init__(message or f"unexpected HTTP status {status}")
        self.status = status


class BadContentType(FetchError):
    """The endpoint answered with a non-XML content type."""


def parse_execution_targets(xml_text: str) -> list[ComputingServiceRecord]:
    """Parse an info document into computing-service records.

    The walk is lenient: ComputingService elements are found at any depth,
    unknown siblings are ignored, and one record is produced per
    (service, manager) pair.  Each Resource text node under a manager's
    GeneralResources is appended in document order; an absent or empty
    GeneralResources yields an empty list.  A service without managers
    produces a single record with an empty manager.

    Raises :class:`MalformedXml` for non-well-formed input and
    :class:`NoServices` when no ComputingService element exists.
    """
    try:
        root = ElementTree.fromstring(xml_text)
    except ElementTree.ParseError as exc:
        raise MalformedXml(str(exc)) from exc
    parent_of = {child: parent for parent in root.iter() for child in parent}
    records = []
    found_service = False
    for service in root.iter("ComputingService"):
        found_service = True
        admin_domain = _enclosing_admin_domain(service, parent_of)
        service_id = service.get("id", "")
        managers = list(service.iter("ComputingManager"))
        if not managers:
            records.append(
                ComputingServiceRecord(admin_domain, service_id, ComputingManagerRecord(""))
            )
            continue
        for manager in managers:
            resources = [
                resource.text or ""
                for block in manager.iter("GeneralResources")
                for resource in block.iter("Resource")
            ]
            records.append(
                ComputingServiceRecord(
                    admin_domain,
                    service_id,
                    ComputingManagerRecord(manager.get("id", ""), tuple(resources)),
                )
            )
    if not found_service:
        raise NoServices("document contains no ComputingService element")
    return records


def _enclosing_admin_domain(element, parent_of) -> str:
    node = element
    while node is not None:
        if node.tag == "AdminDomain":
            return node.get("id", "")
        node = parent_of.get(node)
    return ""


def format_arcinfo(records: list[ComputingServiceRecord]) -> str:
    """Format records as the human-readable report.

    One "Computing service:" block per record with a "Batch System
    Information:" section; when the manager has general resources the
    "General resources:" header is printed followed by one resource string
    per line, indented two additional spaces.  An empty resource list omits
    the header entirely.
    """
    lines = []
    for record in records:
        header = "Computing service:"
        if record.service_id:
            header += f" {record.service_id}"
        lines.append(header)
        lines.append("  Batch System Information:")
        if record.manager.general_resources:
            lines.append("    General resources:")
            lines.extend(f"      {resource}" for resource in record.manager.general_resources)
    if not lines:
        return ""
    return "\n".join(lines) + "\n"


def fetch_info(url: str, timeout: float = 10.0) -> str:
    """Fetch an info document over plain HTTP and return its body.

    Raises :class:`Unreachable` on connection failure, :class:`BadStatus`
    on a non-200 answer and :class:`BadContentType` when the response is
    not XML.
    """
    scheme = urllib.parse.urlsplit(url).scheme
    if scheme != "http":
        raise ValueError(f"http URL required, got {url!r}")
    request = urllib.request.Request(url, headers={"Accept": "application/xml"})
    try:
        with urllib.request.urlopen(request, timeout=timeout) as response:
            status = response.status
            content_type = response.headers.get("Content-Type", "")
            body = response.read()
    except urllib.error.HTTPError as exc:
        raise BadStatus(exc.code) from exc
    except (urllib.error.URLError, OSError) as exc:
        raise Unreachable(f"cannot reach {url}: {exc}") from exc
    if status != 200:
        raise BadStatus(status)
    mime = content_type.split(";", 1)[0].strip().lower()
    if mime not in _XML_MIME_TYPES and not mime.endswith("+xml"):
        raise BadContentType(f"expected XML, got {content_type!r}")
    return body.decode("utf-8")
