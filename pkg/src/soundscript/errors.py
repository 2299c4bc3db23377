"""Exception hierarchy shared across the package."""


class SoundscriptError(Exception):
    """Base class for everything raised on purpose by this package."""


class ParseError(SoundscriptError):
    """Raised when raw script text cannot be turned into an AudioScript."""

    code = "ParseError"

    def __init__(self, message, node_index=None):
        super().__init__(message)
        self.node_index = node_index


class MalformedJson(ParseError):
    code = "MalformedJson"


class NotAList(ParseError):
    code = "NotAList"


class UnknownAudioType(ParseError):
    code = "UnknownAudioType"


class MissingField(ParseError):
    code = "MissingField"


class UnknownKey(ParseError):
    code = "UnknownKey"


class ExtractionError(SoundscriptError):
    pass


class NoJsonArrayFound(ExtractionError):
    pass


class CsvError(SoundscriptError):
    """Voice-casting CSV response could not be parsed."""


class TooManyCharacters(SoundscriptError):
    """More script characters than available voice presets."""


class UnknownVoiceType(SoundscriptError):
    """LLM named a voice type that is not in the catalog."""


class CompileError(SoundscriptError):
    pass


class UncoveredCharacter(CompileError):
    """A speech character has no voice assignment."""


class UnresolvedSegment(SoundscriptError):
    """A symbolic duration references a segment with no resolved length."""


class EngineError(SoundscriptError):
    pass


class EmptyInput(EngineError):
    pass


class TooShort(EngineError):
    """Signal shorter than one loudness gating block."""


class SilentInput(EngineError):
    """Cannot normalize a signal whose loudness is -inf."""


class UnsupportedRate(EngineError):
    pass


class MalformedWav(EngineError):
    pass


class UnsupportedEncoding(EngineError):
    pass


class BackendError(SoundscriptError):
    """A generation backend failed; carries the plan step index when known."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class HttpError(BackendError):
    def __init__(self, message, status=None, step=None):
        super().__init__(message, step=step)
        self.status = status


class BadWav(BackendError):
    pass


class EmptyText(BackendError):
    pass


class DurationResolutionError(EngineError):
    pass


class ScriptWritingFailed(SoundscriptError):
    """LLM script writing exhausted its retries; carries the last report."""

    def __init__(self, message, report=None, attempts=0):
        super().__init__(message)
        self.report = report
        self.attempts = attempts
