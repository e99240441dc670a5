"""Reference adapter: any predict function, served over the NERO inference protocol."""

from .server import (
    AdapterConfig,
    AdapterServer,
    PayloadError,
    decode_batch,
    decode_block,
    encode_block,
    encode_outputs,
    serve,
)

__all__ = [
    "AdapterConfig",
    "AdapterServer",
    "PayloadError",
    "decode_batch",
    "decode_block",
    "encode_block",
    "encode_outputs",
    "serve",
]
