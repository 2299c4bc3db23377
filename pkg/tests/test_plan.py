import json
import random
from fractions import Fraction

import pytest

from script_gen import random_script, segment_durations, timeline_oracle
from soundscript.errors import UncoveredCharacter, UnresolvedSegment
from soundscript.plan import (
    Concat,
    Const,
    Emit,
    GenAudio,
    GenSpeech,
    MixAt,
    SegLen,
    Sum,
    compile_script,
    eval_duration,
    plan_from_json,
    plan_to_json,
    plan_to_text,
)
from soundscript.script import parse_script, validate
from soundscript.voices import VoiceMap, allocate_voices, list_characters


def _voices_for(script):
    return VoiceMap(assignments={
        c: f"voice_{i}" for i, c in enumerate(list_characters(script))})


class TestEvalDuration:
    def test_sum_of_seg_lens(self):
        expr = Sum((SegLen(0), SegLen(1)))
        assert eval_duration(expr, {0: 3.2, 1: 1.8}) == 5.0

    def test_empty_sum(self):
        assert eval_duration(Sum(), {}) == 0.0

    def test_const(self):
        assert eval_duration(Const(2.0), {}) == 2.0

    def test_unresolved(self):
        with pytest.raises(UnresolvedSegment):
            eval_duration(SegLen(3), {0: 1.0})

    def test_fractions_stay_exact(self):
        expr = Sum((SegLen(0), SegLen(1)))
        result = eval_duration(expr, {0: Fraction(2, 5), 1: Fraction(1, 2)})
        assert result == Fraction(9, 10)


class TestCompileMarsNews:
    def test_structure(self, mars_news_script, default_catalog):
        voices = allocate_voices(mars_news_script, default_catalog)
        plan = compile_script(mars_news_script, voices)
        assert plan.foreground_count() == 4
        assert len(plan.spans) == 1
        span = plan.spans[0]
        assert (span.audio_type, span.id) == ("music", 1)
        assert span.begin_foreground_id == 0
        assert span.end_foreground_id == 1

        mixes = [s for s in plan.steps if isinstance(s, MixAt)]
        assert len(mixes) == 1
        assert mixes[0].offset == Sum(())
        bg_gens = [s for s in plan.steps if isinstance(s, GenAudio) and s.background]
        assert len(bg_gens) == 1
        assert bg_gens[0].duration == Sum((SegLen(0),))

    def test_no_background_script(self):
        script = parse_script(json.dumps([{
            "audio_type": "sound_effect", "layout": "foreground",
            "vol": -35, "len": 2, "desc": "door slam",
        }]))
        plan = compile_script(script, VoiceMap())
        kinds = [type(s).__name__ for s in plan.steps]
        assert kinds == ["GenAudio", "Concat", "Emit"]
        assert plan.steps[0].duration == Const(2.0)

    def test_uncovered_character(self, mars_news_script):
        with pytest.raises(UncoveredCharacter):
            compile_script(mars_news_script, VoiceMap(assignments={"News Anchor": "x"}))

    def test_compile_is_deterministic(self, mars_news_script, default_catalog):
        voices = allocate_voices(mars_news_script, default_catalog)
        assert compile_script(mars_news_script, voices) == \
            compile_script(mars_news_script, voices)


class TestPlanStructureProperties:
    def test_two_phase_ordering_and_single_assignment(self):
        rng = random.Random(12345)
        for _ in range(100):
            script = random_script(rng)
            plan = compile_script(script, _voices_for(script))
            assigned = set()
            seen_background_gen = False
            emits = 0
            for step in plan.steps:
                if isinstance(step, (GenSpeech, GenAudio, Concat, MixAt)):
                    assert step.buf not in assigned, "buffer reassigned"
                    assigned.add(step.buf)
                if isinstance(step, GenAudio) and step.background:
                    seen_background_gen = True
                if isinstance(step, (GenSpeech, GenAudio)) and not (
                        isinstance(step, GenAudio) and step.background):
                    assert not seen_background_gen, "foreground gen after background gen"
                if isinstance(step, Concat):
                    assert all(i in assigned for i in step.inputs)
                if isinstance(step, MixAt):
                    assert step.base in assigned and step.overlay in assigned
                if isinstance(step, Emit):
                    emits += 1
                    assert step.buf in assigned
            assert emits == 1

    def test_backgrounds_never_overrun_foreground_timeline(self):
        rng = random.Random(999)
        for _ in range(100):
            script = random_script(rng)
            plan = compile_script(script, _voices_for(script))
            durations = segment_durations(script)
            resolved = dict(enumerate(durations))
            total = sum(durations, Fraction(0))
            bg_gens = {s.buf: s for s in plan.steps
                       if isinstance(s, GenAudio) and s.background}
            for step in plan.steps:
                if isinstance(step, MixAt):
                    offset = eval_duration(step.offset, resolved)
                    target = eval_duration(bg_gens[step.overlay].duration, resolved)
                    assert offset + target <= total


class TestOracleEquivalence:
    def test_200_random_scripts_match_timeline_oracle_exactly(self):
        rng = random.Random(2024)
        for i in range(200):
            script = random_script(rng, max_foreground=10)
            assert validate(script).ok, f"generator produced invalid script at {i}"
            plan = compile_script(script, _voices_for(script))
            durations = segment_durations(script)
            resolved = dict(enumerate(durations))
            bg_gens = {s.buf: s for s in plan.steps
                       if isinstance(s, GenAudio) and s.background}
            compiled = []
            for step in plan.steps:
                if isinstance(step, MixAt):
                    compiled.append((
                        eval_duration(step.offset, resolved),
                        eval_duration(bg_gens[step.overlay].duration, resolved),
                    ))
            assert compiled == timeline_oracle(script, durations)


class TestPlanOutput:
    def test_listing_is_deterministic(self, mars_news_script, default_catalog):
        voices = allocate_voices(mars_news_script, default_catalog)
        plan = compile_script(mars_news_script, voices)
        assert plan_to_text(plan) == plan_to_text(plan)

    def test_listing_shape(self, mars_news_script, default_catalog):
        voices = allocate_voices(mars_news_script, default_catalog)
        lines = plan_to_text(compile_script(mars_news_script, voices)).strip().splitlines()
        assert len(lines) == 8
        assert lines[0].startswith("b0 = gen_speech(")
        assert lines[4] == "b4 = concat(b0, b1, b2, b3)"
        assert lines[5].endswith("duration=len(b0), lufs=-30)")
        assert lines[6] == "b6 = mix(b4, b5, offset=0)"
        assert lines[7] == "emit(b6)"

    def test_single_sfx_listing_is_three_lines(self):
        script = parse_script(json.dumps([{
            "audio_type": "sound_effect", "layout": "foreground",
            "vol": -35, "len": 2, "desc": "door slam",
        }]))
        lines = plan_to_text(compile_script(script, VoiceMap())).strip().splitlines()
        assert len(lines) == 3

    def test_json_round_trip(self, mars_news_script, default_catalog):
        voices = allocate_voices(mars_news_script, default_catalog)
        plan = compile_script(mars_news_script, voices)
        restored = plan_from_json(plan_to_json(plan))
        assert restored.steps == plan.steps
        assert restored.output_buffer == plan.output_buffer
