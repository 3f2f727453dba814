"""Text segment serialization into a single model-readable string."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class SerializedText:
    """A serialized description plus bookkeeping for segment attribution.

    ``segment_spans`` maps each segment name to its [start, end) character
    range in ``text`` (covering the "Name: content" block), so token-level
    attributions can be rolled up per segment.
    """

    text: str
    token_count: int
    segment_spans: dict[str, tuple[int, int]]

    def segment_of(self, char_pos: int) -> str | None:
        for name, (start, end) in self.segment_spans.items():
            if start <= char_pos < end:
                return name
        return None


def serialize_text(segments: dict[str, str]) -> SerializedText:
    """Join segments as ``"Name: content"`` blocks separated by single spaces.

    Segment order follows the input mapping order. Segment names must not
    contain ``": "``. The token count is the whitespace token count of the
    full string.
    """
    if not segments:
        raise ValueError("need at least one text segment")
    parts = []
    spans = {}
    pos = 0
    for i, (name, content) in enumerate(segments.items()):
        if ": " in name:
            raise ValueError(f"segment name {name!r} contains ': '")
        if i > 0:
            pos += 1  # joining space
        block = f"{name}: {content}"
        spans[name] = (pos, pos + len(block))
        parts.append(block)
        pos += len(block)
    text = " ".join(parts)
    return SerializedText(text=text, token_count=len(text.split()), segment_spans=spans)
