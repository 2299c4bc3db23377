"""Voice presets and character-to-voice casting.

Each script character gets one preset from the catalog.  The deterministic
allocator matches catalog order to first-appearance order; the LLM
allocator asks for a character -> voice-type CSV and falls back to the
deterministic rule when the response cannot be used.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from importlib import resources

from .errors import CsvError, TooManyCharacters, UnknownVoiceType
from .script import AudioScript, extract_script  # noqa: F401  (extract shares fence rules)

log = logging.getLogger(__name__)

VOICE_CAST_PROMPT = """\
Given an audio script in json format, for each character that appeared in the "character" attribute, you should map the character to a "voice type" according to their lines and the "voice types" features. Each character must be mapped to a different voice type, and each "voice type" must be from one of the following:

{voice_lines}

Output should be in the format of CSV, like:
'''
[character 1], [voice type 1]
[character 2], [voice type 2]
...
'''
"""


@dataclass(frozen=True)
class VoicePreset:
    preset_id: str
    display_name: str
    gender: str = ""
    accent: str = ""
    notes: str = ""

    def trait_line(self) -> str:
        traits = ", ".join(t for t in (f"a normal {self.gender} adult voice" if self.gender else "",
                                       f"{self.accent} accent" if self.accent else "",
                                       self.notes) if t)
        return f"- {self.display_name}: {traits}"


@dataclass(frozen=True)
class VoiceMap:
    assignments: dict[str, str] = field(default_factory=dict)

    def preset_for(self, character: str) -> str:
        return self.assignments[character]

    def covers(self, characters) -> bool:
        return all(c in self.assignments for c in characters)


def load_catalog(path=None) -> list[VoicePreset]:
    """Load the voice catalog from a JSON file; default catalog is packaged."""
    if path is None:
        raw = resources.files("soundscript.data").joinpath("voices.json").read_text()
    else:
        with open(path) as fh:
            raw = fh.read()
    entries = json.loads(raw)
    catalog = [
        VoicePreset(
            preset_id=e["preset_id"],
            display_name=e["display_name"],
            gender=e.get("gender", ""),
            accent=e.get("accent", ""),
            notes=e.get("notes", ""),
        )
        for e in entries
    ]
    seen = set()
    for preset in catalog:
        if preset.preset_id in seen:
            raise ValueError(f"duplicate preset_id {preset.preset_id!r} in catalog")
        seen.add(preset.preset_id)
    return catalog


def list_characters(script: AudioScript) -> list[str]:
    """Distinct speech characters in first-appearance order."""
    seen: list[str] = []
    for node in script.nodes:
        if node.audio_type == "speech" and node.character and node.character not in seen:
            seen.append(node.character)
    return seen


def parse_voice_csv(text: str) -> dict[str, str]:
    """Parse a "character, voice type" CSV response.

    Splits each line on the first comma; code fences and surrounding prose
    lines without commas are skipped.  Duplicate characters: last wins,
    with a warning.
    """
    mapping: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip().strip("`'\"")
        if not line or "," not in line:
            continue
        character, _, voice = line.partition(",")
        character, voice = character.strip(), voice.strip()
        if not character or not voice:
            continue
        if character in mapping:
            log.warning("duplicate voice assignment for %r; keeping the last one", character)
        mapping[character] = voice
    if not mapping:
        raise CsvError("no 'character, voice type' lines found in response")
    return mapping


def build_cast_prompt(catalog: list[VoicePreset]) -> str:
    lines = "\n".join(p.trait_line() for p in catalog)
    return VOICE_CAST_PROMPT.format(voice_lines=lines)


def _deterministic(characters: list[str], catalog: list[VoicePreset],
                   allow_reuse: bool) -> VoiceMap:
    if len(characters) > len(catalog) and not allow_reuse:
        raise TooManyCharacters(
            f"{len(characters)} characters but only {len(catalog)} voice presets"
        )
    assignments = {
        character: catalog[i % len(catalog)].preset_id
        for i, character in enumerate(characters)
    }
    return VoiceMap(assignments=assignments)


def allocate_voices(script: AudioScript, catalog: list[VoicePreset],
                    allocator: str = "deterministic", llm_client=None,
                    allow_reuse: bool = False) -> VoiceMap:
    """Assign one catalog preset per character.

    ``allocator`` is "deterministic" or "llm".  The llm path sends the
    casting prompt plus the serialized script, parses the CSV answer, and
    retries once on an unknown voice type before falling back to the
    deterministic rule.
    """
    if not catalog:
        raise ValueError("voice catalog is empty")
    characters = list_characters(script)
    if not characters:
        return VoiceMap()
    if len(characters) > len(catalog) and not allow_reuse:
        raise TooManyCharacters(
            f"{len(characters)} characters but only {len(catalog)} voice presets"
        )
    if allocator == "deterministic":
        return _deterministic(characters, catalog, allow_reuse)
    if allocator != "llm":
        raise ValueError(f"unknown allocator {allocator!r}")
    if llm_client is None:
        raise ValueError("llm allocator needs an llm_client")

    from .script import serialize_script

    system_prompt = build_cast_prompt(catalog)
    by_name = {p.display_name: p.preset_id for p in catalog}
    user_message = serialize_script(script)
    for attempt in range(2):
        try:
            response = llm_client.complete(system_prompt, user_message, temperature=0.0)
            csv_map = parse_voice_csv(response)
            return _resolve_csv(csv_map, characters, by_name)
        except (CsvError, UnknownVoiceType) as exc:
            log.warning("voice casting attempt %d failed: %s", attempt + 1, exc)
    log.warning("falling back to deterministic voice allocation")
    return _deterministic(characters, catalog, allow_reuse)


def _resolve_csv(csv_map: dict[str, str], characters: list[str],
                 by_name: dict[str, str]) -> VoiceMap:
    assignments: dict[str, str] = {}
    used: set[str] = set()
    for character in characters:
        voice_name = csv_map.get(character)
        if voice_name is None:
            raise CsvError(f"no voice assigned for character {character!r}")
        preset_id = by_name.get(voice_name)
        if preset_id is None:
            raise UnknownVoiceType(f"voice type {voice_name!r} is not in the catalog")
        if preset_id in used:
            raise UnknownVoiceType(f"voice type {voice_name!r} assigned twice")
        used.add(preset_id)
        assignments[character] = preset_id
    return VoiceMap(assignments=assignments)
