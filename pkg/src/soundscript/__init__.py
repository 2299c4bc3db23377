"""Structured audio-script compiler and rendering engine.

Parse JSON audio scripts describing speech, music, and sound effects,
compile them into execution plans, and render them through pluggable
generation backends with LUFS loudness control.
"""

from .plan import ExecutionPlan, compile_script, eval_duration
from .script import (
    AudioNode,
    AudioScript,
    ValidationReport,
    extract_script,
    parse_script,
    serialize_script,
    validate,
)
from .voices import VoiceMap, VoicePreset, allocate_voices, list_characters, load_catalog

__version__ = "0.1.0"

__all__ = [
    "AudioNode",
    "AudioScript",
    "ValidationReport",
    "parse_script",
    "extract_script",
    "serialize_script",
    "validate",
    "VoicePreset",
    "VoiceMap",
    "load_catalog",
    "list_characters",
    "allocate_voices",
    "ExecutionPlan",
    "compile_script",
    "eval_duration",
    "__version__",
]
