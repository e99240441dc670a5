"""Errors shared by the protocol client, server, and in-process models."""


class ModelProtocolError(Exception):
    """Base class for inference-protocol failures."""


class TransportError(ModelProtocolError):
    """The endpoint could not be reached or did not answer in time."""


class MalformedResponseError(ModelProtocolError):
    """The endpoint answered with something outside the protocol schema."""


class ModalityMismatchError(ModelProtocolError):
    """Inputs do not match the model's declared modality."""


class HandshakeError(ModelProtocolError):
    """Protocol version mismatch at describe time."""


class BatchLimitError(ModelProtocolError):
    """Batch exceeds the model's declared maximum (or is empty)."""
