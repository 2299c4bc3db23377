import json

import pytest

from soundscript.chat import CHAT_REVISION_PROMPT, ChatSession
from soundscript.errors import ScriptWritingFailed
from soundscript.script import parse_script, serialize_script, validate
from soundscript.writer import (
    DURATION_SUFFIX,
    SCRIPT_WRITER_PROMPT,
    ReplayClient,
    WriteRequest,
    batch_csr,
    build_script_prompt,
    write_script,
)

VALID_SCRIPT = json.dumps([
    {"audio_type": "sound_effect", "layout": "foreground",
     "vol": -35, "len": 2, "desc": "door creak"},
])


class TestPrompt:
    def test_mentions_three_audio_types(self):
        assert "three types of audio: sound effects, music, and speech" \
            in SCRIPT_WRITER_PROMPT

    def test_golden_fragments(self):
        assert "act as an audio script writer" in SCRIPT_WRITER_PROMPT
        assert "Speech can only be foreground." in SCRIPT_WRITER_PROMPT
        assert '"action": "begin"' in SCRIPT_WRITER_PROMPT
        assert "vol (dB" not in SCRIPT_WRITER_PROMPT  # uses prose, not field names

    def test_duration_suffix(self):
        _, msg = build_script_prompt(
            WriteRequest(instruction="a thunderstorm", duration_hint=10))
        assert msg == ("a thunderstorm"
                       " the duration of generated audio must be 10 seconds.")

    def test_no_suffix_without_hint(self):
        system, msg = build_script_prompt(WriteRequest(instruction="a thunderstorm"))
        assert msg == "a thunderstorm"
        assert system == SCRIPT_WRITER_PROMPT

    def test_suffix_drops_trailing_zero(self):
        assert DURATION_SUFFIX.format(seconds=7.0).endswith("must be 7 seconds.")

    def test_empty_instruction_rejected(self):
        with pytest.raises(ValueError):
            WriteRequest(instruction="  ")


class TestWriteScript:
    def test_first_try_success(self):
        client = ReplayClient({"a door": VALID_SCRIPT})
        script, attempts = write_script(WriteRequest(instruction="a door"), client)
        assert attempts == 1
        assert len(script.nodes) == 1

    def test_extracts_from_fenced_prose(self):
        raw = f"Sure! Here is the script:\n```json\n{VALID_SCRIPT}\n```\nEnjoy."
        client = ReplayClient({"a door": raw})
        script, _ = write_script(WriteRequest(instruction="a door"), client)
        assert validate(script).ok

    def test_retry_with_corrective_feedback(self):
        bad = json.dumps([
            {"audio_type": "speech", "layout": "background",
             "character": "A", "vol": -15, "text": "hi"},
        ])
        client = ReplayClient({"a door": [bad, VALID_SCRIPT]})
        script, attempts = write_script(
            WriteRequest(instruction="a door", max_retries=2), client)
        assert attempts == 2
        assert validate(script).ok

    def test_exhaustion_raises_with_attempt_count(self):
        client = ReplayClient({"a door": "no json here at all"})
        with pytest.raises(ScriptWritingFailed) as excinfo:
            write_script(WriteRequest(instruction="a door", max_retries=1), client)
        assert excinfo.value.attempts == 2

    def test_zero_retries_is_single_shot(self):
        calls = []

        class Counting(ReplayClient):
            def complete(self, system_prompt, user_message, temperature=0.0):
                calls.append(user_message)
                return super().complete(system_prompt, user_message, temperature)

        client = Counting({"a door": "not a script"})
        with pytest.raises(ScriptWritingFailed):
            write_script(WriteRequest(instruction="a door", max_retries=0), client)
        assert len(calls) == 1


class TestReplayClient:
    def test_prefix_match_covers_duration_suffix(self):
        client = ReplayClient({"a door": VALID_SCRIPT})
        out = client.complete("sys", "a door the duration of generated audio "
                                     "must be 5 seconds.")
        assert out == VALID_SCRIPT

    def test_list_values_consumed_in_order(self):
        client = ReplayClient({"k": ["first", "second"]})
        assert client.complete("s", "k") == "first"
        assert client.complete("s", "k") == "second"
        assert client.complete("s", "k") == "second"  # sticks at the last one

    def test_missing_key(self):
        with pytest.raises(KeyError):
            ReplayClient({}).complete("s", "unknown")


class TestBatchCsr:
    def test_all_good(self):
        client = ReplayClient({f"story {i}": VALID_SCRIPT for i in range(4)})
        result = batch_csr([f"story {i}" for i in range(4)], client)
        assert result == {"success_count": 4, "total": 4, "rate": 1.0}

    def test_all_bad(self):
        client = ReplayClient({f"story {i}": "garbage" for i in range(3)})
        result = batch_csr([f"story {i}" for i in range(3)], client)
        assert result == {"success_count": 0, "total": 3, "rate": 0.0}

    def test_replay_corpus_rate(self, csr_replay):
        client = ReplayClient(csr_replay)
        result = batch_csr(sorted(csr_replay), client)
        assert result["rate"] == 0.94

    def test_jobs_do_not_change_result(self, csr_replay):
        serial = batch_csr(sorted(csr_replay), ReplayClient(csr_replay))
        parallel = batch_csr(sorted(csr_replay), ReplayClient(csr_replay), jobs=8)
        assert serial == parallel

    def test_empty_batch_rejected(self):
        with pytest.raises(ValueError):
            batch_csr([], ReplayClient({}))


class TestChatSession:
    @pytest.fixture
    def replay(self):
        with open("tests/fixtures/chat_replay.json") as fh:
            return json.load(fh)

    @pytest.fixture
    def base_script(self):
        with open("tests/fixtures/farm_base.json") as fh:
            return parse_script(fh.read())

    def test_accepted_turn_updates_script(self, replay, base_script):
        session = ChatSession(client=ReplayClient(replay), script=base_script)
        accepted, detail = session.revise(
            "add a dog barking background and a man shouting after the cow mooing")
        assert accepted
        assert "dog barking" in serialize_script(session.script)
        assert "+" in detail

    def test_rejected_turn_keeps_script(self, replay, base_script):
        session = ChatSession(client=ReplayClient(replay), script=base_script)
        before = serialize_script(base_script)
        accepted, detail = session.revise("make the goat sing opera")
        assert not accepted
        assert serialize_script(session.script) == before
        assert "unchanged" in detail

    def test_transcript_records_all_turns(self, replay, base_script):
        session = ChatSession(client=ReplayClient(replay), script=base_script)
        session.revise("adjust the goat bleating sound to 3 seconds")
        session.revise("make the goat sing opera")
        transcript = session.transcript()
        assert [t["accepted"] for t in transcript["turns"]] == [True, False]
        assert transcript["final_script"] is not None

    def test_revision_prompt_extends_writer_prompt(self):
        assert CHAT_REVISION_PROMPT.startswith(SCRIPT_WRITER_PROMPT)
        assert "edit instruction" in CHAT_REVISION_PROMPT
