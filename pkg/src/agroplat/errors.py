"""Domain exceptions shared across the platform.

Every error a service raises intentionally derives from PlatformError so the
gateway can map it to an HTTP status and the CLI can exit 1 with a clean
message instead of a traceback.
"""


class PlatformError(Exception):
    """Base class for all expected domain errors."""

    code = "error"


# --- image / analysis ---------------------------------------------------

class DecodeError(PlatformError):
    code = "decode_error"


class EmptyMask(PlatformError):
    """An index map has no valid pixel to summarize or render."""

    code = "empty_mask"


# --- neural network -----------------------------------------------------

class SpecError(PlatformError):
    """Network layer list does not chain into a consistent shape sequence."""

    code = "spec_error"


class ShapeError(PlatformError):
    code = "shape_error"


class DegenerateDataset(PlatformError):
    """A class present in the dataset got no items in the training split."""

    code = "degenerate_dataset"


class FormatError(PlatformError):
    """Model container bytes are malformed (magic/version/length)."""

    code = "format_error"


# --- registry / auth ----------------------------------------------------

class WeakSecret(PlatformError):
    code = "weak_secret"


class DuplicateName(PlatformError):
    code = "duplicate_name"


class BadCredentials(PlatformError):
    code = "bad_credentials"


class Unauthenticated(PlatformError):
    code = "unauthenticated"


class Forbidden(PlatformError):
    code = "forbidden"


class UnknownUser(PlatformError):
    code = "unknown_user"


class UnknownFarm(PlatformError):
    code = "unknown_farm"


class UnknownCrop(PlatformError):
    code = "unknown_crop"


class NotOwner(PlatformError):
    code = "not_owner"


# --- persistence --------------------------------------------------------

class NotFound(PlatformError):
    code = "not_found"


class VersionConflict(PlatformError):
    """Compare-and-set write lost: stored version != expected version."""

    code = "version_conflict"

    def __init__(self, expected, found, message=None):
        super().__init__(message or f"expected version {expected}, found {found}")
        self.expected = expected
        self.found = found


# --- workflow state machines ---------------------------------------------

class StateConflict(PlatformError):
    """Operation requires the record to be in a different lifecycle state."""

    code = "state_conflict"


class PipelineError(PlatformError):
    """Sample processing failed; the request stays Submitted and is retryable."""

    code = "pipeline_error"


class AlreadyClaimed(StateConflict):
    code = "already_claimed"


class NotAssignee(PlatformError):
    code = "not_assignee"


class AlreadyDiagnosed(StateConflict):
    code = "already_diagnosed"


# --- marketplace ----------------------------------------------------------

class PastDeadline(PlatformError):
    code = "past_deadline"


class MissingField(PlatformError):
    code = "missing_field"


class AuctionClosed(StateConflict):
    code = "auction_closed"


class BidTooLow(PlatformError):
    """Bid does not strictly exceed the current best offer."""

    code = "bid_too_low"

    def __init__(self, current_best, message=None):
        super().__init__(message or f"bid must exceed current best {current_best}")
        self.current_best = current_best


class NotYetEnded(StateConflict):
    code = "not_yet_ended"


class AlreadyClosed(StateConflict):
    code = "already_closed"


# --- chat -----------------------------------------------------------------

class SelfThread(PlatformError):
    code = "self_thread"


class NotParticipant(PlatformError):
    code = "not_participant"


class EmptyBody(PlatformError):
    code = "empty_body"


class TooLong(PlatformError):
    code = "too_long"


# --- analytics --------------------------------------------------------------

class TooFewPoints(PlatformError):
    code = "too_few_points"


class BadSpan(PlatformError):
    code = "bad_span"
