"""Error types raised by the rendering pipeline."""


class FigsError(Exception):
    """Base class for all delayfigs errors."""


class SchemaMismatchError(FigsError):
    """A CSV file does not carry the schema its figure kind expects."""


class InvalidStyleError(FigsError):
    """A style map contains unknown keys or badly typed values."""
