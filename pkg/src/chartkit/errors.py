"""Exception types shared across the toolkit."""

from __future__ import annotations


class ChartkitError(Exception):
    """Base class for all errors raised by this package."""


class InvalidBox(ChartkitError, ValueError):
    """A bounding box violates the x_min < x_max / y_min < y_max contract."""


class EmptyGroundTruth(ChartkitError):
    """Recall requested against an empty ground-truth box list."""


class MalformedJson(ChartkitError):
    """Input bytes are not valid UTF-8 JSON."""


class SchemaViolation(ChartkitError):
    """A document does not match the expected schema.

    ``path`` identifies the offending location (JSON pointer-ish string or a
    line number for JSONL files).
    """

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class BoxOutOfBounds(ChartkitError):
    """A box in a location file lies outside the image bounds."""

    def __init__(self, path: str, detail: str = ""):
        message = f"{path}: box outside image bounds"
        if detail:
            message += f" ({detail})"
        super().__init__(message)
        self.path = path


class UnknownCategory(ChartkitError):
    """No grounding template registered for an element category."""


class EmptyScript(ChartkitError):
    """A chart-to-code record requires a non-empty script."""


class NoParseableContent(ChartkitError):
    """Model output contained no parseable QA pairs."""


class NoAnswerBlock(ChartkitError):
    """Response text contains no <answer> block to extract."""


class UnparseableBox(ChartkitError):
    """A grounding answer body did not yield valid bounding boxes."""


class JudgeParseError(ChartkitError):
    """The judge verdict did not match the required JSON grammar."""


class GroupTooSmall(ChartkitError):
    """Group-relative advantages need at least two rollouts."""


class DuplicateQuestionId(ChartkitError):
    """Two benchmark items share a question_id."""


class EmptyBenchmark(ChartkitError):
    """Evaluation over zero benchmark items is undefined."""


class ProviderError(ChartkitError):
    """The model provider returned a non-retryable error."""

    def __init__(self, status: int, detail: str = ""):
        super().__init__(f"provider error {status}: {detail}" if detail else f"provider error {status}")
        self.status = status


class ReplayMiss(ChartkitError):
    """Replay mode found no cached response for a request key."""

    def __init__(self, key: str):
        super().__init__(f"no cached response for key {key}")
        self.key = key


class Timeout(ChartkitError):
    """A live model call exceeded its deadline."""


class NoCodeBlock(ChartkitError):
    """A model response expected to carry code had no fenced block."""


class EvolutionFailed(ChartkitError):
    """Code evolution did not produce a runnable script within the retry budget."""


class InsufficientRecords(ChartkitError):
    """Requested RL split size exceeds the available record pool."""
