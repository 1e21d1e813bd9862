"""Exception types shared across the harness."""


class SasAuditError(Exception):
    """Base class for all harness errors."""


class ConfigError(SasAuditError):
    """A run configuration is malformed or internally inconsistent."""


class GenerationError(SasAuditError):
    """A corpus request cannot be satisfied with exact counts."""


class SchemaError(SasAuditError):
    """A serialized record violates the JSONL schema."""


class ScoringError(SasAuditError):
    """A scorer could not produce a valid score for a record."""


class DegenerateDataError(SasAuditError):
    """Scored data is too thin for the requested estimate."""


class BridgeError(SasAuditError):
    """Base class for external-scorer bridge failures."""


class HandshakeError(BridgeError):
    """The peer did not complete a valid protocol handshake."""


class ProtocolError(BridgeError):
    """The peer violated the line protocol mid-session."""


class BridgeTimeout(BridgeError):
    """The peer did not answer within the configured deadline."""
