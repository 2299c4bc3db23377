"""Execute a compiled plan against a generation backend.

Phase 1 generates every foreground clip and records its resolved length;
phase 2 resolves the symbolic durations, generates backgrounds at their
targets, then applies concat/mix steps in plan order.  All duration
arithmetic is done in integer samples.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .audio.buffer import (
    SAMPLE_RATE,
    AudioBuffer,
    concat,
    mix_at_samples,
    resample_to_engine_rate,
    seconds_to_samples,
    trim_or_pad_samples,
)
from .audio.loudness import normalize_lufs
from .backends import GeneratorBackend
from .errors import (
    BackendError,
    DurationResolutionError,
    SilentInput,
    SoundscriptError,
    TooShort,
    UnresolvedSegment,
)
from .plan import Concat, Const, Emit, ExecutionPlan, GenAudio, GenSpeech, MixAt, SegLen, Sum


@dataclass
class StepRecord:
    index: int
    op: str
    seconds: float
    detail: dict = field(default_factory=dict)

    def as_dict(self, include_timings: bool = True) -> dict:
        out = {"index": self.index, "op": self.op, **self.detail}
        if include_timings:
            out["seconds"] = self.seconds
        return out


@dataclass
class RenderReport:
    steps: list[StepRecord] = field(default_factory=list)
    total_duration: float = 0.0
    clipped_samples: int = 0
    warnings: list[str] = field(default_factory=list)

    def as_dict(self, include_timings: bool = True) -> dict:
        return {
            "total_duration": self.total_duration,
            "clipped_samples": self.clipped_samples,
            "warnings": self.warnings,
            "steps": [s.as_dict(include_timings) for s in self.steps],
        }


def _eval_samples(expr, resolved: dict[int, int]) -> int:
    if isinstance(expr, Const):
        return seconds_to_samples(expr.seconds)
    if isinstance(expr, SegLen):
        try:
            return resolved[expr.segment]
        except KeyError:
            raise UnresolvedSegment(f"segment {expr.segment} not yet generated") from None
    if isinstance(expr, Sum):
        return sum(_eval_samples(t, resolved) for t in expr.terms)
    raise DurationResolutionError(f"not a duration expression: {expr!r}")


def execute(plan: ExecutionPlan, backend: GeneratorBackend, *, jobs: int = 1,
            master_lufs: float | None = None) -> tuple[AudioBuffer, RenderReport]:
    """Run a plan; returns the final buffer plus a render report."""
    report = RenderReport()
    buffers: dict[int, AudioBuffer] = {}
    resolved: dict[int, int] = {}

    gen_steps = [
        (i, s) for i, s in enumerate(plan.steps)
        if isinstance(s, (GenSpeech, GenAudio))
    ]
    foreground = [(i, s) for i, s in gen_steps
                  if isinstance(s, GenSpeech) or not s.background]
    background = [(i, s) for i, s in gen_steps
                  if isinstance(s, GenAudio) and s.background]

    def run_phase(steps):
        if jobs > 1 and len(steps) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(lambda item: _generate(item[0], item[1]), steps))
        else:
            results = [_generate(i, s) for i, s in steps]
        for record in results:
            report.steps.append(record)

    def _generate(index: int, step) -> StepRecord:
        start = time.perf_counter()
        try:
            if isinstance(step, GenSpeech):
                samples, rate = backend.gen_speech(step.text, step.preset_id)
                buf = resample_to_engine_rate(samples, rate)
                target_samples = len(buf)
                detail = {"buf": step.buf, "kind": "speech"}
            else:
                target_samples = _eval_samples(step.duration, resolved)
                gen = backend.gen_music if step.kind == "music" else backend.gen_sfx
                samples, rate = gen(step.desc, target_samples / SAMPLE_RATE)
                buf = resample_to_engine_rate(samples, rate)
                buf = trim_or_pad_samples(buf, target_samples)
                detail = {"buf": step.buf, "kind": step.kind}
        except SoundscriptError:
            raise
        except Exception as exc:
            raise BackendError(f"generation failed: {exc}", step=index) from exc

        detail["target_lufs"] = step.target_lufs
        try:
            buf, measured, clipped = normalize_lufs(buf, step.target_lufs)
            detail["measured_lufs"] = measured
            if clipped:
                detail["clipped_samples"] = clipped
                report.warnings.append(
                    f"step {index}: {clipped} sample(s) clamped after gain"
                )
                report.clipped_samples += clipped
        except (TooShort, SilentInput) as exc:
            detail["normalization_skipped"] = str(exc)
            report.warnings.append(f"step {index}: normalization skipped: {exc}")

        buffers[step.buf] = buf
        resolved[step.buf] = len(buf)
        return StepRecord(index=index, op=type(step).__name__.lower(),
                          seconds=time.perf_counter() - start, detail=detail)

    try:
        run_phase(foreground)
        run_phase(background)
    except BackendError:
        raise
    except UnresolvedSegment as exc:
        raise DurationResolutionError(str(exc)) from exc

    final: AudioBuffer | None = None
    for index, step in enumerate(plan.steps):
        if isinstance(step, (GenSpeech, GenAudio)):
            continue
        start = time.perf_counter()
        if isinstance(step, Concat):
            buffers[step.buf] = concat([buffers[i] for i in step.inputs])
            detail = {"buf": step.buf, "inputs": list(step.inputs)}
        elif isinstance(step, MixAt):
            offset = _eval_samples(step.offset, resolved)
            mixed, clipped = mix_at_samples(buffers[step.base], buffers[step.overlay], offset)
            buffers[step.buf] = mixed
            detail = {"buf": step.buf, "offset_samples": offset}
            if clipped:
                detail["clipped_samples"] = clipped
                report.warnings.append(f"step {index}: {clipped} sample(s) clamped in mix")
                report.clipped_samples += clipped
        elif isinstance(step, Emit):
            final = buffers[step.buf]
            detail = {"buf": step.buf}
        else:
            raise BackendError(f"unknown step type {type(step).__name__}", step=index)
        report.steps.append(StepRecord(index=index, op=type(step).__name__.lower(),
                                       seconds=time.perf_counter() - start, detail=detail))

    if final is None:
        raise BackendError("plan has no emit step")

    if master_lufs is not None:
        start = time.perf_counter()
        final, measured, clipped = normalize_lufs(final, master_lufs)
        if clipped:
            report.warnings.append(f"master normalization clamped {clipped} sample(s)")
            report.clipped_samples += clipped
        report.steps.append(StepRecord(
            index=len(plan.steps), op="master_normalize",
            seconds=time.perf_counter() - start,
            detail={"measured_lufs": measured, "target_lufs": master_lufs},
        ))

    report.steps.sort(key=lambda r: r.index)
    report.total_duration = final.duration
    return final, report
