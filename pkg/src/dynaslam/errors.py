"""Exception types raised by the filter, classifier, and harness."""


class DynaslamError(Exception):
    """Base class for all library-specific errors."""


class CholeskyFailure(DynaslamError):
    """Covariance not positive definite even after jitter escalation.

    Raised by sigma-point generation; usually indicates filter divergence.
    """


class ZeroRange(DynaslamError):
    """Landmark coincides with the sensor origin; bearing is undefined."""


class UnknownLandmark(DynaslamError):
    """Measurement or removal request refers to an id not in the state."""


class DuplicateLandmark(DynaslamError):
    """Augmentation requested for an id already present in the state."""


class SingularInnovation(DynaslamError):
    """Innovation covariance is not invertible; correction impossible."""


class ZeroDisplacement(DynaslamError):
    """Robot displacement between sightings too small to define the
    approach angle; classification must be skipped for this step."""


class StaleTrack(DynaslamError):
    """Track's last sighting is older than the staleness limit."""


class PlacementExhausted(DynaslamError):
    """Rejection sampling failed to place a landmark near a waypoint."""


class LengthMismatch(DynaslamError):
    """Estimated and ground-truth polylines differ in length."""


class FilterDiverged(DynaslamError):
    """A trial aborted because the filter state became unusable."""


class ConfigError(DynaslamError):
    """Invalid or unknown configuration key, section, or value."""
