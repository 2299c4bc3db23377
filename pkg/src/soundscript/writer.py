"""LLM-backed audio script writing.

Wraps a user instruction in the script-writing prompt, asks an LLM client
for a completion, extracts and validates the JSON script, and retries with
the validation report as corrective feedback.  Clients are pluggable; a
replay client reading canned responses keeps everything offline.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import requests

from .errors import ExtractionError, ParseError, ScriptWritingFailed
from .plan import compile_script
from .script import AudioScript, extract_script, parse_script, validate
from .voices import VoiceMap, list_characters

log = logging.getLogger(__name__)

SCRIPT_WRITER_PROMPT = """\
I want you to act as an audio script writer. I'll give you an instruction which is a general idea and you will make it an audio script in List format containing a series of JSON nodes.

The script must follow the rules below:

Each line represents an audio JSON node. There are three types of audio: sound effects, music, and speech. For each audio, there are two types of layouts: foreground and background. Foreground audios are played sequentially, and background audios are sound effects or music which are played while the foreground audio is being played.

Sound effects can be foreground or background. For sound effects, you must provide its layout, volume (dB, LUFS standard), length (in seconds), and detailed description of the sound effect. Example: {"audio_type": "sound_effect", "layout": "foreground", "vol": -35, "len": 2, "desc": "Airport beeping sound"}

Music can be foreground or background. For music, you must provide its layout, volume (dB, LUFS standard), length (in seconds), and detailed description of the music. Example: {"audio_type": "music", "layout": "foreground", "vol": -35, "len": 10, "desc": "Uplifting newsroom music"}

Speech can only be foreground. For speech, you must provide the character, volume (dB, LUFS standard), and the character's line. You do not need to specify the length of the speech. Example: {"audio_type": "speech", "layout": "foreground", "character": "News Anchor", "vol": -15, "text": "Good evening, this is BBC News"}

For background sound effects, you must specify the id of the background sound effect, and you must specify the beginning and the end of a background sound effect in separate lines, hence you do not need to specify the length of the audio. Example: {"audio_type": "sound_effect", "layout": "background", "id": 1, "action": "begin", "vol": -35, "desc": "Airport ambiance"} ... {"audio_type": "sound_effect", "layout": "background", "id": 1, "action": "end"}

For background music, it's the same as background sound effects.

The output format must be a list of the root node containing all the audio JSON nodes.
"""

DURATION_SUFFIX = " the duration of generated audio must be {seconds:g} seconds."


@dataclass(frozen=True)
class WriteRequest:
    instruction: str
    duration_hint: float | None = None
    max_retries: int = 2
    temperature: float = 0.0

    def __post_init__(self):
        if not self.instruction.strip():
            raise ValueError("instruction must be nonempty")


class LlmClient:
    """Minimal chat-completion interface; no retry logic lives here."""

    def complete(self, system_prompt: str, user_message: str, temperature: float = 0.0) -> str:
        raise NotImplementedError


class ReplayClient(LlmClient):
    """Serves canned responses from a {instruction: response} mapping.

    Lookup matches any stored key that is a prefix of the user message, so
    duration suffixes and corrective-feedback retries still hit.  A value
    may be a list of responses, consumed in order across calls.
    """

    def __init__(self, responses: dict):
        self.responses = dict(responses)
        self._cursors: dict[str, int] = {}

    @classmethod
    def from_file(cls, path) -> "ReplayClient":
        with open(path) as fh:
            return cls(json.load(fh))

    def complete(self, system_prompt: str, user_message: str, temperature: float = 0.0) -> str:
        key = self._match(user_message)
        if key is None:
            raise KeyError(f"no canned response for message {user_message[:80]!r}")
        value = self.responses[key]
        if isinstance(value, list):
            cursor = self._cursors.get(key, 0)
            self._cursors[key] = min(cursor + 1, len(value) - 1)
            return value[cursor]
        return value

    def _match(self, user_message: str):
        if user_message in self.responses:
            return user_message
        best = None
        for key in self.responses:
            if user_message.startswith(key) and (best is None or len(key) > len(best)):
                best = key
        if best is None:
            # chat turns embed the instruction mid-message
            for key in self.responses:
                if key in user_message and (best is None or len(key) > len(best)):
                    best = key
        return best


class HttpLlmClient(LlmClient):
    """Chat-completion JSON endpoint client (OpenAI-style wire format).

    Base URL and model come from the constructor; the API key is read from
    the environment only.
    """

    def __init__(self, base_url: str, model: str, api_key_env: str = "LLM_API_KEY",
                 timeout: float = 120.0):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = os.environ.get(api_key_env, "")
        self.timeout = timeout

    def complete(self, system_prompt: str, user_message: str, temperature: float = 0.0) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        response = requests.post(
            f"{self.base_url}/chat/completions",
            json={
                "model": self.model,
                "temperature": temperature,
                "messages": [
                    {"role": "system", "content": system_prompt},
                    {"role": "user", "content": user_message},
                ],
            },
            headers=headers,
            timeout=self.timeout,
        )
        response.raise_for_status()
        return response.json()["choices"][0]["message"]["content"]


def build_script_prompt(req: WriteRequest) -> tuple[str, str]:
    """System prompt + user message for a write request."""
    user_message = req.instruction
    if req.duration_hint is not None:
        user_message += DURATION_SUFFIX.format(seconds=req.duration_hint)
    return SCRIPT_WRITER_PROMPT, user_message


def write_script(req: WriteRequest, client: LlmClient) -> tuple[AudioScript, int]:
    """Ask the LLM for a script until one validates; returns (script, attempts).

    Each failed attempt re-prompts with the failure report appended as
    corrective feedback.
    """
    system_prompt, base_message = build_script_prompt(req)
    user_message = base_message
    last_failure = "no response"
    attempts = 0
    for attempts in range(1, req.max_retries + 2):
        try:
            raw = client.complete(system_prompt, user_message, temperature=req.temperature)
        except Exception as exc:
            last_failure = f"LLM call failed: {exc}"
            log.warning("attempt %d: %s", attempts, last_failure)
            continue
        try:
            script_text = extract_script(raw)
            script = parse_script(script_text, lenient=True, defer_field_checks=True,
                                  source_text=req.instruction)
        except (ExtractionError, ParseError) as exc:
            last_failure = f"{type(exc).__name__}: {exc}"
            user_message = _corrective(base_message, last_failure)
            log.info("attempt %d failed: %s", attempts, last_failure)
            continue
        report = validate(script)
        if report.ok:
            return script, attempts
        last_failure = report.summary()
        user_message = _corrective(base_message, last_failure)
        log.info("attempt %d failed validation:\n%s", attempts, last_failure)
    raise ScriptWritingFailed(
        f"no valid script after {attempts} attempt(s); last failure:\n{last_failure}",
        attempts=attempts,
    )


def _corrective(base_message: str, failure: str) -> str:
    return (
        f"{base_message}\n\nYour previous output failed validation: {failure}\n"
        "Please output a corrected audio script."
    )


def script_compiles(script: AudioScript) -> bool:
    """True when the script both validates and compiles."""
    if not validate(script).ok:
        return False
    voices = VoiceMap(assignments={
        c: f"voice_{i}" for i, c in enumerate(list_characters(script))
    })
    try:
        compile_script(script, voices)
    except Exception:
        return False
    return True


def batch_csr(instructions: list[str], client: LlmClient, *, jobs: int = 1) -> dict:
    """Single-shot compilation success rate over a batch of instructions."""
    if not instructions:
        raise ValueError("instructions list is empty")

    def one(instruction: str) -> bool:
        try:
            script, _ = write_script(
                WriteRequest(instruction=instruction, max_retries=0), client
            )
        except ScriptWritingFailed:
            return False
        return script_compiles(script)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(one, instructions))
    else:
        outcomes = [one(i) for i in instructions]
    success = sum(outcomes)
    return {"success_count": success, "total": len(instructions),
            "rate": success / len(instructions)}
