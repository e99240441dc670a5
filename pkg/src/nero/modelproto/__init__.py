"""Wire protocol between the engine and any model, plus synthetic reference models."""

from .client import HttpModel
from .encoding import (
    INPUT_KIND_FOR_MODALITY,
    MODALITIES,
    PROTOCOL_VERSION,
    WireError,
    decode_array,
    decode_input,
    decode_output,
    encode_array,
    encode_input,
    encode_output,
)
from .errors import (
    BatchLimitError,
    HandshakeError,
    MalformedResponseError,
    ModalityMismatchError,
    ModelProtocolError,
    TransportError,
)
from .server import ModelServer, serve_model
from .synthetic import (
    ModelDescriptor,
    SyntheticModel,
    SyntheticModelSpec,
    make_wire_id,
    parse_wire_id,
)

__all__ = [
    "BatchLimitError",
    "HandshakeError",
    "HttpModel",
    "INPUT_KIND_FOR_MODALITY",
    "MODALITIES",
    "MalformedResponseError",
    "ModalityMismatchError",
    "ModelDescriptor",
    "ModelProtocolError",
    "ModelServer",
    "PROTOCOL_VERSION",
    "SyntheticModel",
    "SyntheticModelSpec",
    "TransportError",
    "WireError",
    "decode_array",
    "decode_input",
    "decode_output",
    "encode_array",
    "encode_input",
    "encode_output",
    "make_wire_id",
    "parse_wire_id",
    "serve_model",
]
