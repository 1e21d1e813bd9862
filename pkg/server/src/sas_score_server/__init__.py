"""Reference scoring server for the sas-score/1 stdio protocol."""

from .backends import (
    BackendError,
    ToyLexiconBackend,
    TransformersBackend,
    load_backend,
    normalize_seven_class,
    normalize_signed,
)
from .server import PROTOCOL_VERSION, serve

__version__ = "0.1.0"
