"""Exception and warning types shared across the pipeline."""


class BookscoreError(Exception):
    """Base class for all pipeline errors."""


# --- corpus ---------------------------------------------------------------

class NoChaptersFound(BookscoreError):
    """Chapter marker never matched in the book text."""


class EmptyChapter(BookscoreError):
    """A chapter contains zero paragraphs."""


class MalformedTimestamp(BookscoreError):
    """SRT cue with an unparseable or inverted timestamp."""


class SizeMismatch(BookscoreError):
    """Embedding blob length disagrees with the manifest."""


class DuplicateId(BookscoreError):
    """Embedding manifest declares the same id twice."""


class UnresolvedEmbedding(BookscoreError):
    """An id required by a later stage resolves in no bundle."""


class MissingEmbedding(BookscoreError):
    """A specific embedding key was requested but is absent."""


class OverlapWarning(UserWarning):
    """Non-fatal: subtitle cues overlap in time."""


# --- music ----------------------------------------------------------------

class TooShort(BookscoreError):
    """Audio shorter than one analysis window."""


class AllSilent(BookscoreError):
    """Keystrength series has no non-silent frames."""


class KernelShrunkWarning(UserWarning):
    """Novelty kernel reduced to fit a small self-similarity matrix."""


# --- scenes / align / refine ----------------------------------------------

class QTooLarge(BookscoreError):
    """Requested more scenes than there are shots."""


class InfeasibleShape(BookscoreError):
    """Fewer scenes than chapters; the alignment path cannot exist."""


class NoCandidateScenes(BookscoreError):
    """No scene is coarse-aligned to the segment's chapter."""


# --- weave ----------------------------------------------------------------

class MissingScores(BookscoreError):
    """Emotion table lacks a paragraph required for voting."""


class EmptyPool(BookscoreError):
    """No music segment in the album is usable for retrieval."""


# --- cli ------------------------------------------------------------------

class ConfigError(BookscoreError):
    """Pipeline config missing, malformed, or out of range."""


class MissingPrerequisite(BookscoreError):
    """A stage was run before the artifact it depends on exists."""


class AudioCutOutOfRange(BookscoreError):
    """Manifest in/out points fall outside the track audio."""
