"""Document loading and corpus manifests.

Loads plain text, Markdown, and HTML sources listed in a JSONL manifest,
attaches per-document scalar metadata, and normalizes text for chunking.
Binary formats (PDF, Word scans, ...) must be converted to a supported
text-bearing format before ingestion.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from typing import Union

from .errors import RagError

Scalar = Union[str, int, float, bool]

SUPPORTED_EXTENSIONS = (".txt", ".md", ".html", ".htm")


class ManifestError(RagError):
    """Base for manifest parsing failures."""


class MalformedLineError(ManifestError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"manifest line {line_no}: {reason}")
        self.line_no = line_no


class DuplicateIdError(ManifestError):
    def __init__(self, doc_id: str):
        super().__init__(f"duplicate document id {doc_id!r}")
        self.doc_id = doc_id


class NonScalarMetadataError(ManifestError):
    def __init__(self, doc_id: str, key: str):
        super().__init__(f"document {doc_id!r}: metadata key {key!r} is not a scalar")
        self.doc_id = doc_id
        self.key = key


class InvalidEncodingError(RagError):
    """Source file is not valid UTF-8."""


class UnsupportedExtensionError(RagError):
    """File type is not directly ingestible; convert it externally first."""


@dataclass
class Document:
    """A normalized source text plus its corpus metadata."""

    id: str
    text: str
    metadata: dict[str, Scalar] = field(default_factory=dict)
    source_path: str = ""


@dataclass
class ManifestEntry:
    id: str
    path: str
    metadata: dict[str, Scalar] = field(default_factory=dict)


@dataclass
class Manifest:
    entries: list[ManifestEntry] = field(default_factory=list)


@dataclass
class IngestFailure:
    doc_id: str
    path: str
    error: str


@dataclass
class IngestReport:
    documents: list[Document] = field(default_factory=list)
    failures: list[IngestFailure] = field(default_factory=list)


def parse_manifest(data: bytes) -> Manifest:
    """Parse a JSONL manifest: one object per line with required `id` and `path`.

    Any other top-level key becomes document metadata and must hold a scalar
    (string, integer, float, or boolean). Blank lines are ignored.
    """
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    for line_no, raw in enumerate(data.split(b"\n"), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw.decode("utf-8-sig"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise MalformedLineError(line_no, str(exc)) from exc
        if not isinstance(obj, dict):
            raise MalformedLineError(line_no, "expected a JSON object")
        doc_id = obj.get("id")
        path = obj.get("path")
        if not isinstance(doc_id, str) or not doc_id:
            raise MalformedLineError(line_no, "missing or non-string 'id'")
        if not isinstance(path, str) or not path:
            raise MalformedLineError(line_no, "missing or non-string 'path'")
        if doc_id in seen:
            raise DuplicateIdError(doc_id)
        seen.add(doc_id)
        metadata: dict[str, Scalar] = {}
        for key, value in obj.items():
            if key in ("id", "path"):
                continue
            if not key:
                raise MalformedLineError(line_no, "empty metadata key")
            if not isinstance(value, (str, int, float, bool)):
                raise NonScalarMetadataError(doc_id, key)
            metadata[key] = value
        entries.append(ManifestEntry(id=doc_id, path=path, metadata=metadata))
    return Manifest(entries=entries)


def serialize_manifest(manifest: Manifest) -> bytes:
    """Inverse of parse_manifest: one JSON object per line, UTF-8."""
    lines = [
        json.dumps({"id": e.id, "path": e.path, **e.metadata}, ensure_ascii=False)
        for e in manifest.entries
    ]
    if not lines:
        return b""
    return ("\n".join(lines) + "\n").encode("utf-8")


def normalize_text(raw: str) -> str:
    """Canonicalize whitespace.

    Carriage returns are dropped, tabs become spaces, whitespace runs that
    contain a newline collapse to exactly one newline (paragraph break), other
    runs collapse to a single space, and the ends are trimmed. Idempotent.
    """
    text = raw.replace("\r", "").replace("\t", " ")
    text = re.sub(r"[ \n]*\n[ \n]*", "\n", text)
    text = re.sub(r" {2,}", " ", text)
    return text.strip(" \n")


# Tags that delimit block-level content; their boundaries become newlines so
# paragraph structure survives tag stripping.
_BLOCK_TAGS = frozenset(
    {
        "address", "article", "aside", "blockquote", "br", "dd", "div", "dl",
        "dt", "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2",
        "h3", "h4", "h5", "h6", "header", "hr", "li", "main", "nav", "ol", "p",
        "pre", "section", "table", "tbody", "td", "tfoot", "th", "thead", "tr",
        "ul",
    }
)
_SKIPPED_TAGS = frozenset({"script", "style"})


class _HtmlTextExtractor(HTMLParser):
    """Collects visible text; script/style contents are dropped."""

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self._parts: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in _SKIPPED_TAGS:
            self._skip_depth += 1
        elif tag in _BLOCK_TAGS:
            self._parts.append("\n")

    def handle_startendtag(self, tag, attrs):
        if tag in _BLOCK_TAGS:
            self._parts.append("\n")

    def handle_endtag(self, tag):
        if tag in _SKIPPED_TAGS:
            self._skip_depth = max(0, self._skip_depth - 1)
        elif tag in _BLOCK_TAGS:
            self._parts.append("\n")

    def handle_data(self, data):
        if not self._skip_depth:
            self._parts.append(data)

    def text(self) -> str:
        return "".join(self._parts)


def strip_html(markup: str) -> str:
    """Strip tags from HTML, keeping visible text with block boundaries as newlines."""
    extractor = _HtmlTextExtractor()
    extractor.feed(markup)
    extractor.close()
    return extractor.text()


def load_document(entry: ManifestEntry, root: str | Path | None = None) -> Document:
    """Load one manifest entry into a normalized Document.

    Relative paths resolve against `root` (the manifest's directory, usually).
    """
    path = Path(entry.path)
    if root is not None and not path.is_absolute():
        path = Path(root) / path
    ext = path.suffix.lower()
    if ext not in SUPPORTED_EXTENSIONS:
        raise UnsupportedExtensionError(
            f"{path}: unsupported extension {ext!r}; convert to one of "
            f"{', '.join(SUPPORTED_EXTENSIONS)} first"
        )
    raw = path.read_bytes()
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise InvalidEncodingError(f"{path}: not valid UTF-8 ({exc})") from exc
    if ext in (".html", ".htm"):
        text = strip_html(text)
    return Document(
        id=entry.id,
        text=normalize_text(text),
        metadata=dict(entry.metadata),
        source_path=str(entry.path),
    )


def load_manifest_documents(manifest: Manifest, root: str | Path | None = None) -> IngestReport:
    """Load every manifest entry, collecting per-entry failures instead of aborting."""
    report = IngestReport()
    for entry in manifest.entries:
        try:
            report.documents.append(load_document(entry, root))
        except (RagError, OSError) as exc:
            report.failures.append(IngestFailure(entry.id, entry.path, str(exc)))
    return report
