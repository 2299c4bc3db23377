"""Compile a validated audio script into an execution plan.

The plan is a flat list of steps over single-assignment buffers.  Speech
lengths are unknown until generation, so every duration that depends on
them is kept symbolic (a DurationExpr over foreground segment lengths) and
resolved by the executor after the foreground clips exist.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import CompileError, UncoveredCharacter, UnresolvedSegment
from .script import AudioNode, AudioScript
from .voices import VoiceMap, list_characters


# ---------------------------------------------------------------------------
# Symbolic durations

@dataclass(frozen=True)
class Const:
    seconds: float

    def __post_init__(self):
        if self.seconds < 0:
            raise ValueError("Const duration must be >= 0")


@dataclass(frozen=True)
class SegLen:
    segment: int


@dataclass(frozen=True)
class Sum:
    terms: tuple = ()


DurationExpr = Const | SegLen | Sum


def eval_duration(expr: DurationExpr, resolved) -> float:
    """Evaluate a duration expression given per-segment lengths in seconds.

    Works over any numeric type (float, Fraction) supplied in ``resolved``.
    """
    if isinstance(expr, Const):
        return expr.seconds
    if isinstance(expr, SegLen):
        try:
            return resolved[expr.segment]
        except KeyError:
            raise UnresolvedSegment(f"segment {expr.segment} has no resolved length") from None
    if isinstance(expr, Sum):
        total = 0
        for term in expr.terms:
            total = total + eval_duration(term, resolved)
        return total
    raise TypeError(f"not a DurationExpr: {expr!r}")


def duration_to_text(expr: DurationExpr) -> str:
    if isinstance(expr, Const):
        return f"{expr.seconds:g}"
    if isinstance(expr, SegLen):
        return f"len(b{expr.segment})"
    if isinstance(expr, Sum):
        if not expr.terms:
            return "0"
        return " + ".join(duration_to_text(t) for t in expr.terms)
    raise TypeError(f"not a DurationExpr: {expr!r}")


def _expr_to_json(expr: DurationExpr) -> dict:
    if isinstance(expr, Const):
        return {"const": expr.seconds}
    if isinstance(expr, SegLen):
        return {"seg_len": expr.segment}
    if isinstance(expr, Sum):
        return {"sum": [_expr_to_json(t) for t in expr.terms]}
    raise TypeError(f"not a DurationExpr: {expr!r}")


def _expr_from_json(data: dict) -> DurationExpr:
    if "const" in data:
        return Const(data["const"])
    if "seg_len" in data:
        return SegLen(data["seg_len"])
    if "sum" in data:
        return Sum(tuple(_expr_from_json(t) for t in data["sum"]))
    raise ValueError(f"bad duration expression: {data!r}")


# ---------------------------------------------------------------------------
# Plan steps

@dataclass(frozen=True)
class GenSpeech:
    buf: int
    text: str
    preset_id: str
    target_lufs: float


@dataclass(frozen=True)
class GenAudio:
    buf: int
    kind: str  # "music" | "sound_effect"
    desc: str
    duration: DurationExpr
    target_lufs: float
    background: bool = False


@dataclass(frozen=True)
class Concat:
    buf: int
    inputs: tuple[int, ...]


@dataclass(frozen=True)
class MixAt:
    buf: int
    base: int
    overlay: int
    offset: DurationExpr


@dataclass(frozen=True)
class Emit:
    buf: int


PlanStep = GenSpeech | GenAudio | Concat | MixAt | Emit


@dataclass(frozen=True)
class ForegroundSegment:
    index: int
    node: AudioNode
    symbolic_len: DurationExpr


@dataclass(frozen=True)
class BackgroundSpan:
    audio_type: str
    id: int
    vol: float
    desc: str
    begin_foreground_id: int
    end_foreground_id: int


@dataclass(frozen=True)
class ExecutionPlan:
    steps: tuple[PlanStep, ...]
    output_buffer: int
    segments: tuple[ForegroundSegment, ...] = ()
    spans: tuple[BackgroundSpan, ...] = ()

    def foreground_count(self) -> int:
        return len(self.segments)


def compile_script(script: AudioScript, voices: VoiceMap) -> ExecutionPlan:
    """Turn a validated script plus a voice map into an execution plan.

    Foreground nodes become generation steps for segments 0..F-1, then one
    concat; each background span becomes a generation step whose target
    length spans the enclosed segments, then a mix at the span's offset on
    the foreground timeline.
    """
    for character in list_characters(script):
        if character not in voices.assignments:
            raise UncoveredCharacter(f"no voice assigned for character {character!r}")

    segments: list[ForegroundSegment] = []
    spans: list[BackgroundSpan] = []
    open_spans: dict[tuple[str, int], dict] = {}

    for node in script.nodes:
        if node.is_foreground:
            index = len(segments)
            if node.audio_type == "speech":
                symbolic = SegLen(index)
            else:
                symbolic = Const(float(node.len))
            segments.append(ForegroundSegment(index=index, node=node, symbolic_len=symbolic))
        else:
            key = (node.audio_type, node.id)
            if node.action == "begin":
                if key in open_spans:
                    raise CompileError(f"duplicate begin for {key} (script not validated?)")
                open_spans[key] = {"node": node, "begin": len(segments)}
            else:
                pending = open_spans.pop(key, None)
                if pending is None:
                    raise CompileError(f"end before begin for {key} (script not validated?)")
                begin_node = pending["node"]
                spans.append(BackgroundSpan(
                    audio_type=node.audio_type,
                    id=node.id,
                    vol=float(begin_node.vol),
                    desc=begin_node.desc,
                    begin_foreground_id=pending["begin"],
                    end_foreground_id=len(segments),
                ))
    if open_spans:
        raise CompileError(f"unclosed background span(s): {sorted(open_spans)}")
    if not segments:
        raise CompileError("script has no foreground audio (script not validated?)")

    steps: list[PlanStep] = []
    for seg in segments:
        node = seg.node
        if node.audio_type == "speech":
            steps.append(GenSpeech(
                buf=seg.index,
                text=node.text,
                preset_id=voices.preset_for(node.character),
                target_lufs=float(node.vol),
            ))
        else:
            steps.append(GenAudio(
                buf=seg.index,
                kind=node.audio_type,
                desc=node.desc,
                duration=seg.symbolic_len,
                target_lufs=float(node.vol),
            ))

    next_buf = len(segments)
    concat_buf = next_buf
    steps.append(Concat(buf=concat_buf, inputs=tuple(range(len(segments)))))
    next_buf += 1

    overlay_bufs = []
    for span in spans:
        duration = Sum(tuple(SegLen(i) for i in range(span.begin_foreground_id,
                                                      span.end_foreground_id)))
        steps.append(GenAudio(
            buf=next_buf,
            kind=span.audio_type,
            desc=span.desc,
            duration=duration,
            target_lufs=span.vol,
            background=True,
        ))
        overlay_bufs.append(next_buf)
        next_buf += 1

    base = concat_buf
    for span, overlay in zip(spans, overlay_bufs):
        offset = Sum(tuple(SegLen(i) for i in range(span.begin_foreground_id)))
        steps.append(MixAt(buf=next_buf, base=base, overlay=overlay, offset=offset))
        base = next_buf
        next_buf += 1

    steps.append(Emit(buf=base))
    return ExecutionPlan(
        steps=tuple(steps),
        output_buffer=base,
        segments=tuple(segments),
        spans=tuple(spans),
    )


def plan_to_text(plan: ExecutionPlan) -> str:
    """Deterministic one-step-per-line pseudo-program listing."""
    lines = []
    for step in plan.steps:
        if isinstance(step, GenSpeech):
            lines.append(
                f'b{step.buf} = gen_speech(text={json.dumps(step.text)}, '
                f'voice={json.dumps(step.preset_id)}, lufs={step.target_lufs:g})'
            )
        elif isinstance(step, GenAudio):
            fn = "gen_music" if step.kind == "music" else "gen_sound_effect"
            lines.append(
                f'b{step.buf} = {fn}(desc={json.dumps(step.desc)}, '
                f'duration={duration_to_text(step.duration)}, lufs={step.target_lufs:g})'
            )
        elif isinstance(step, Concat):
            args = ", ".join(f"b{i}" for i in step.inputs)
            lines.append(f"b{step.buf} = concat({args})")
        elif isinstance(step, MixAt):
            lines.append(
                f"b{step.buf} = mix(b{step.base}, b{step.overlay}, "
                f"offset={duration_to_text(step.offset)})"
            )
        elif isinstance(step, Emit):
            lines.append(f"emit(b{step.buf})")
    return "\n".join(lines) + "\n"


def plan_to_json(plan: ExecutionPlan) -> str:
    """Stable JSON dump of the plan for tooling; round-trips via plan_from_json."""
    steps = []
    for step in plan.steps:
        if isinstance(step, GenSpeech):
            steps.append({"op": "gen_speech", "buf": step.buf, "text": step.text,
                          "preset_id": step.preset_id, "target_lufs": step.target_lufs})
        elif isinstance(step, GenAudio):
            steps.append({"op": "gen_audio", "buf": step.buf, "kind": step.kind,
                          "desc": step.desc, "duration": _expr_to_json(step.duration),
                          "target_lufs": step.target_lufs, "background": step.background})
        elif isinstance(step, Concat):
            steps.append({"op": "concat", "buf": step.buf, "inputs": list(step.inputs)})
        elif isinstance(step, MixAt):
            steps.append({"op": "mix_at", "buf": step.buf, "base": step.base,
                          "overlay": step.overlay, "offset": _expr_to_json(step.offset)})
        elif isinstance(step, Emit):
            steps.append({"op": "emit", "buf": step.buf})
    doc = {"output_buffer": plan.output_buffer, "steps": steps}
    return json.dumps(doc, indent=2)


def plan_from_json(text: str) -> ExecutionPlan:
    doc = json.loads(text)
    steps: list[PlanStep] = []
    for raw in doc["steps"]:
        op = raw["op"]
        if op == "gen_speech":
            steps.append(GenSpeech(buf=raw["buf"], text=raw["text"],
                                   preset_id=raw["preset_id"],
                                   target_lufs=raw["target_lufs"]))
        elif op == "gen_audio":
            steps.append(GenAudio(buf=raw["buf"], kind=raw["kind"], desc=raw["desc"],
                                  duration=_expr_from_json(raw["duration"]),
                                  target_lufs=raw["target_lufs"],
                                  background=raw.get("background", False)))
        elif op == "concat":
            steps.append(Concat(buf=raw["buf"], inputs=tuple(raw["inputs"])))
        elif op == "mix_at":
            steps.append(MixAt(buf=raw["buf"], base=raw["base"], overlay=raw["overlay"],
                               offset=_expr_from_json(raw["offset"])))
        elif op == "emit":
            steps.append(Emit(buf=raw["buf"]))
        else:
            raise ValueError(f"unknown plan op {op!r}")
    return ExecutionPlan(steps=tuple(steps), output_buffer=doc["output_buffer"])
