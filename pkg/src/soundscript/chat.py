"""Multi-round co-creation: revise a script through dialogue.

Each user turn sends the current script plus the edit instruction to the
LLM, which answers with a full revised script.  Invalid turns leave the
script untouched.
"""

from __future__ import annotations

import difflib
import json
from dataclasses import dataclass, field

from .script import AudioScript, extract_script, parse_script, serialize_script, validate
from .writer import SCRIPT_WRITER_PROMPT, LlmClient

CHAT_REVISION_PROMPT = SCRIPT_WRITER_PROMPT + """
You will be given the current audio script and an edit instruction. Apply the instruction and output the full revised audio script as a JSON list following the same rules.
"""


@dataclass
class ChatTurn:
    instruction: str
    accepted: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return {"instruction": self.instruction, "accepted": self.accepted,
                "detail": self.detail}


@dataclass
class ChatSession:
    client: LlmClient
    script: AudioScript | None = None
    turns: list[ChatTurn] = field(default_factory=list)

    def revise(self, instruction: str) -> tuple[bool, str]:
        """One dialogue turn; returns (accepted, human-readable detail)."""
        current = serialize_script(self.script) if self.script else "[]"
        user_message = (
            f"Current audio script:\n{current}\n\nEdit instruction: {instruction}"
        )
        try:
            raw = self.client.complete(CHAT_REVISION_PROMPT, user_message, temperature=0.0)
            revised = parse_script(extract_script(raw), lenient=True, defer_field_checks=True)
        except Exception as exc:
            detail = f"turn rejected ({type(exc).__name__}: {exc}); script unchanged"
            self.turns.append(ChatTurn(instruction, False, detail))
            return False, detail
        report = validate(revised)
        if not report.ok:
            detail = f"revised script failed validation; script unchanged\n{report.summary()}"
            self.turns.append(ChatTurn(instruction, False, detail))
            return False, detail
        detail = self._diff(revised)
        self.script = revised
        self.turns.append(ChatTurn(instruction, True, detail))
        return True, detail

    def _diff(self, revised: AudioScript) -> str:
        before = serialize_script(self.script).splitlines() if self.script else []
        after = serialize_script(revised).splitlines()
        lines = [
            line for line in difflib.unified_diff(before, after, lineterm="", n=0)
            if line.startswith(("+", "-")) and not line.startswith(("+++", "---"))
        ]
        return "\n".join(lines) if lines else "(no change)"

    def transcript(self) -> dict:
        return {
            "turns": [t.as_dict() for t in self.turns],
            "final_script": json.loads(serialize_script(self.script)) if self.script else None,
        }
