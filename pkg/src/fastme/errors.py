"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or inconsistent configuration (bad flag combination, unknown kind)."""


class VideoFormatError(ValueError):
    """Malformed or unsupported video container data."""


class TruncationError(VideoFormatError):
    """Stream ended mid-frame; carries the index of the frame that was cut."""

    def __init__(self, message: str, frame_index: int | None = None):
        super().__init__(message)
        self.frame_index = frame_index


class AttentionFormatError(ValueError):
    """Attention map file does not conform to the documented JSON schema."""


class DegenerateDataError(ValueError):
    """Sample data cannot support the requested estimate (e.g. all-zero SADs)."""
