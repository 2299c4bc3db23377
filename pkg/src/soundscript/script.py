"""Audio-script data model: parse, validate, serialize.

An audio script is a JSON list of nodes.  Each node is one audio element
(speech, music, or sound effect) with a layout: foreground elements play
sequentially on the main timeline, background elements are begin/end pairs
mixed underneath the enclosed foreground elements.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field, replace

from .errors import (
    MalformedJson,
    MissingField,
    NoJsonArrayFound,
    NotAList,
    ParseError,
    UnknownAudioType,
    UnknownKey,
)

log = logging.getLogger(__name__)

AUDIO_TYPES = ("speech", "music", "sound_effect")
LAYOUTS = ("foreground", "background")
ACTIONS = ("begin", "end")

VOL_MIN = -70
VOL_MAX = 0

# Canonical key order for serialization; mirrors the order scripts are
# normally written in.
_KEY_ORDER = ("audio_type", "layout", "id", "action", "character", "vol", "len", "desc", "text")


@dataclass(frozen=True)
class AudioNode:
    audio_type: str
    layout: str
    vol: float | None = None
    len: float | None = None
    desc: str | None = None
    character: str | None = None
    text: str | None = None
    id: int | None = None
    action: str | None = None

    @property
    def is_foreground(self) -> bool:
        return self.layout == "foreground"

    @property
    def is_background(self) -> bool:
        return self.layout == "background"

    def to_dict(self) -> dict:
        out = {}
        for key in _KEY_ORDER:
            value = getattr(self, key)
            if value is None:
                continue
            if key in ("vol", "len") and float(value).is_integer():
                value = int(value)
            out[key] = value
        return out


@dataclass(frozen=True)
class AudioScript:
    nodes: tuple[AudioNode, ...]
    source_text: str | None = None

    def __iter__(self):
        return iter(self.nodes)

    def __len__(self):
        return len(self.nodes)

    def foreground_nodes(self) -> list[AudioNode]:
        return [n for n in self.nodes if n.is_foreground]


@dataclass(frozen=True)
class Issue:
    code: str
    node_index: int | None
    message: str

    def as_dict(self) -> dict:
        return {"code": self.code, "node_index": self.node_index, "message": self.message}


@dataclass
class ValidationReport:
    errors: list[Issue] = field(default_factory=list)
    warnings: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error_codes(self) -> list[str]:
        return [issue.code for issue in self.errors]

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "errors": [i.as_dict() for i in self.errors],
            "warnings": [i.as_dict() for i in self.warnings],
        }

    def summary(self) -> str:
        if self.ok and not self.warnings:
            return "script OK"
        lines = []
        for issue in self.errors:
            where = "script" if issue.node_index is None else f"node {issue.node_index}"
            lines.append(f"error [{issue.code}] at {where}: {issue.message}")
        for issue in self.warnings:
            where = "script" if issue.node_index is None else f"node {issue.node_index}"
            lines.append(f"warning [{issue.code}] at {where}: {issue.message}")
        return "\n".join(lines)


# Keys each node shape may carry.  Required keys must be present (strict
# parse raises MissingField); optional keys may be absent.
_SHAPES = {
    ("speech", "foreground"): ({"audio_type", "layout", "character", "vol", "text"}, set()),
    ("music", "foreground"): ({"audio_type", "layout", "vol", "len", "desc"}, set()),
    ("sound_effect", "foreground"): ({"audio_type", "layout", "vol", "len", "desc"}, set()),
    ("music", "background", "begin"): ({"audio_type", "layout", "id", "action", "vol", "desc"}, set()),
    ("music", "background", "end"): ({"audio_type", "layout", "id", "action"}, set()),
    ("sound_effect", "background", "begin"): ({"audio_type", "layout", "id", "action", "vol", "desc"}, set()),
    ("sound_effect", "background", "end"): ({"audio_type", "layout", "id", "action"}, set()),
}


def _parse_node(raw: dict, index: int, *, strict_keys: bool, strict_fields: bool) -> AudioNode:
    if not isinstance(raw, dict):
        raise MalformedJson(f"node {index} is not a JSON object", node_index=index)

    audio_type = raw.get("audio_type")
    if audio_type is None:
        raise MissingField(f"node {index} has no audio_type", node_index=index)
    if audio_type not in AUDIO_TYPES:
        raise UnknownAudioType(f"node {index}: unknown audio_type {audio_type!r}", node_index=index)

    layout = raw.get("layout")
    if layout is None:
        raise MissingField(f"node {index} has no layout", node_index=index)
    if layout not in LAYOUTS:
        raise ParseError(f"node {index}: unknown layout {layout!r}", node_index=index)

    action = raw.get("action")
    if layout == "background" and audio_type != "speech":
        # background speech is left to validate(), which reports
        # SpeechNotForeground instead of a parse failure
        if action is None:
            raise MissingField(f"node {index}: background node has no action", node_index=index)
        if action not in ACTIONS:
            raise ParseError(f"node {index}: unknown action {action!r}", node_index=index)
        shape_key = (audio_type, layout, action)
    else:
        shape_key = (audio_type, layout)

    shape = _SHAPES.get(shape_key)
    if shape is None:
        # speech/background has no shape; defer the layout rule to validate()
        # so it surfaces as SpeechNotForeground rather than a parse failure.
        allowed = {"audio_type", "layout", "character", "vol", "text", "id", "action"}
        required = {"audio_type", "layout"}
    else:
        required, extra = shape
        allowed = required | extra

    unknown = set(raw) - allowed
    if unknown:
        msg = f"node {index}: unexpected keys {sorted(unknown)}"
        if strict_keys:
            raise UnknownKey(msg, node_index=index)
        log.warning(msg)

    if strict_fields:
        missing = required - set(raw)
        if missing:
            raise MissingField(
                f"node {index}: missing required field(s) {sorted(missing)}", node_index=index
            )

    def _num(key):
        value = raw.get(key)
        if value is None:
            return None
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ParseError(f"node {index}: {key} must be a number", node_index=index)
        return float(value)

    node_id = raw.get("id")
    if node_id is not None and (not isinstance(node_id, int) or isinstance(node_id, bool)):
        raise ParseError(f"node {index}: id must be an integer", node_index=index)

    return AudioNode(
        audio_type=audio_type,
        layout=layout,
        vol=_num("vol"),
        len=_num("len"),
        desc=raw.get("desc"),
        character=raw.get("character"),
        text=raw.get("text"),
        id=node_id,
        action=action,
    )


def parse_script(raw_json: str | bytes, *, lenient: bool = False,
                 source_text: str | None = None,
                 defer_field_checks: bool = False) -> AudioScript:
    """Parse raw JSON text into an AudioScript.

    Strict mode (default) rejects unknown keys and missing required fields
    at parse time; lenient mode drops unknown keys with a warning.  With
    ``defer_field_checks`` field-presence problems are left to validate().
    """
    if isinstance(raw_json, bytes):
        raw_json = raw_json.decode("utf-8", errors="replace")
    try:
        data = json.loads(raw_json)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise NotAList(f"top-level JSON value is {type(data).__name__}, expected a list")
    strict = not lenient
    nodes = tuple(
        _parse_node(item, i, strict_keys=strict, strict_fields=strict and not defer_field_checks)
        for i, item in enumerate(data)
    )
    return AudioScript(nodes=nodes, source_text=source_text)


_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*\n(.*?)```", re.DOTALL)


def extract_script(llm_output: str) -> str:
    """Pull the first top-level JSON array out of free-form LLM text.

    Handles code fences and leading/trailing prose.  Purely mechanical:
    bracket matching plus a JSON parse check, no repair.
    """
    candidates = [m.group(1) for m in _FENCE_RE.finditer(llm_output)]
    candidates.append(llm_output)
    for text in candidates:
        found = _first_json_array(text)
        if found is not None:
            return found
    raise NoJsonArrayFound("no parseable JSON array found in LLM output")


def _first_json_array(text: str) -> str | None:
    start = text.find("[")
    while start != -1:
        depth = 0
        in_string = False
        escaped = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
                continue
            if ch == '"':
                in_string = True
            elif ch == "[":
                depth += 1
            elif ch == "]":
                depth -= 1
                if depth == 0:
                    candidate = text[start : i + 1]
                    try:
                        if isinstance(json.loads(candidate), list):
                            return candidate
                    except json.JSONDecodeError:
                        pass
                    break
        start = text.find("[", start + 1)
    return None


def validate(script: AudioScript) -> ValidationReport:
    """Check every script invariant; always returns a report, never raises."""
    report = ValidationReport()
    err = report.errors.append
    warn = report.warnings.append

    foreground_seen = 0
    # (audio_type, id) -> index of the open begin node, plus fg count at begin
    open_spans: dict[tuple[str, int], tuple[int, int]] = {}
    closed: set[tuple[str, int]] = set()

    for i, node in enumerate(script.nodes):
        if node.vol is not None and not (VOL_MIN <= node.vol <= VOL_MAX):
            err(Issue("VolOutOfRange", i, f"vol {node.vol} outside [{VOL_MIN}, {VOL_MAX}] LUFS"))

        if node.audio_type == "speech":
            if node.layout != "foreground":
                err(Issue("SpeechNotForeground", i, "speech can only be foreground"))
            if not node.character:
                err(Issue("MissingField", i, "speech node needs a nonempty character"))
            if not node.text:
                err(Issue("MissingField", i, "speech node needs a nonempty text"))
            if node.vol is None:
                err(Issue("MissingField", i, "speech node needs vol"))
            if node.len is not None:
                warn(Issue("UnexpectedField", i, "speech length is decided at generation time; len ignored"))
            if node.layout == "foreground":
                foreground_seen += 1
            continue

        if node.is_foreground:
            if node.len is None:
                err(Issue("MissingLen", i, f"foreground {node.audio_type} needs len"))
            elif node.len <= 0:
                err(Issue("NonPositiveLen", i, f"len must be > 0, got {node.len}"))
            if not node.desc:
                err(Issue("MissingField", i, f"foreground {node.audio_type} needs a nonempty desc"))
            if node.vol is None:
                err(Issue("MissingField", i, f"foreground {node.audio_type} needs vol"))
            foreground_seen += 1
            continue

        # background node
        if node.action not in ACTIONS:
            err(Issue("MissingField", i, "background node needs action begin|end"))
            continue
        if node.id is None:
            err(Issue("MissingField", i, "background node needs an id"))
            continue
        key = (node.audio_type, node.id)
        if node.action == "begin":
            if key in open_spans:
                err(Issue("UnbalancedBackground", i,
                          f"duplicate begin for {node.audio_type} id {node.id}"))
                continue
            if node.vol is None:
                err(Issue("MissingField", i, "background begin needs vol"))
            if not node.desc:
                err(Issue("MissingField", i, "background begin needs a nonempty desc"))
            same_type_open = [k for k in open_spans if k[0] == node.audio_type]
            if same_type_open:
                warn(Issue("OverlappingBackgroundsSameType", i,
                           f"{node.audio_type} id {node.id} overlaps open id(s) "
                           f"{sorted(k[1] for k in same_type_open)}"))
            open_spans[key] = (i, foreground_seen)
        else:
            if key not in open_spans:
                err(Issue("UnbalancedBackground", i,
                          f"end before begin for {node.audio_type} id {node.id}"))
                continue
            begin_index, fg_at_begin = open_spans.pop(key)
            closed.add(key)
            if foreground_seen == fg_at_begin:
                err(Issue("EmptyBackgroundSpan", i,
                          f"{node.audio_type} id {node.id} encloses no foreground audio"))

    for (audio_type, span_id), (begin_index, _) in open_spans.items():
        err(Issue("UnbalancedBackground", begin_index,
                  f"missing end for {audio_type} id {span_id}"))

    if foreground_seen == 0:
        err(Issue("NoForeground", None, "script has no foreground audio"))

    return report


def auto_close(script: AudioScript) -> AudioScript:
    """Append implicit `end` nodes for any background span left open."""
    open_spans: dict[tuple[str, int], AudioNode] = {}
    for node in script.nodes:
        if node.is_background and node.id is not None:
            key = (node.audio_type, node.id)
            if node.action == "begin":
                open_spans.setdefault(key, node)
            elif node.action == "end":
                open_spans.pop(key, None)
    if not open_spans:
        return script
    tail = tuple(
        AudioNode(audio_type=audio_type, layout="background", id=span_id, action="end")
        for (audio_type, span_id) in open_spans
    )
    return replace(script, nodes=script.nodes + tail)


def serialize_script(script: AudioScript) -> str:
    """Canonical JSON form: stable key order, one node per line."""
    if not script.nodes:
        return "[]"
    lines = ",\n".join("    " + json.dumps(node.to_dict()) for node in script.nodes)
    return "[\n" + lines + "\n]"


def validate_text(raw_json: str, *, lenient: bool = False,
                  close_open_spans: bool = False) -> tuple[AudioScript | None, ValidationReport]:
    """Parse-then-validate convenience used by the CLI and batch checks.

    Parse failures are folded into the report under their error code so a
    single report describes any input.
    """
    try:
        script = parse_script(raw_json, lenient=lenient, defer_field_checks=True)
    except ParseError as exc:
        report = ValidationReport()
        report.errors.append(Issue(exc.code, exc.node_index, str(exc)))
        return None, report
    if close_open_spans:
        script = auto_close(script)
    return script, validate(script)
