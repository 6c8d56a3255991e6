"""Binary network checkpoints (bit-exact round trip).

Format ``DBNM`` version 1, all multi-byte fields little-endian:

    bytes 0-3   magic "DBNM"
    u32         version (1)
    u32         layer count
    per layer:  u32 fan_out, u32 fan_in, u8 activation tag
                (0 scaled tanh, 1 rectified, 2 identity),
                fan_out*fan_in float64 weights (row-major),
                fan_out float64 biases
"""

import struct
from pathlib import Path

import numpy as np

from .errors import BadMagic, CorruptLength, IoError, UnsupportedVersion
from .layers import Activation, DenseLayer, NetworkParams

MAGIC = b"DBNM"
VERSION = 1


def params_to_bytes(params: NetworkParams) -> bytes:
    chunks = [MAGIC, struct.pack("<II", VERSION, len(params.layers))]
    for layer in params.layers:
        chunks.append(struct.pack("<IIB", layer.fan_out, layer.fan_in, int(layer.activation)))
        chunks.append(np.ascontiguousarray(layer.weights, dtype="<f8").tobytes())
        chunks.append(np.ascontiguousarray(layer.bias, dtype="<f8").tobytes())
    return b"".join(chunks)


def params_from_bytes(data: bytes) -> NetworkParams:
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic(f"expected {MAGIC!r}, got {data[:4]!r}")
    if len(data) < 12:
        raise CorruptLength("header truncated")
    version, layer_count = struct.unpack("<II", data[4:12])
    if version != VERSION:
        raise UnsupportedVersion(f"version {version}, supported: {VERSION}")
    offset = 12
    layers = []
    for _ in range(layer_count):
        if len(data) < offset + 9:
            raise CorruptLength("layer header truncated")
        fan_out, fan_in, tag = struct.unpack_from("<IIB", data, offset)
        offset += 9
        try:
            activation = Activation(tag)
        except ValueError:
            raise CorruptLength(f"unknown activation tag {tag}") from None
        w_bytes = fan_out * fan_in * 8
        b_bytes = fan_out * 8
        if len(data) < offset + w_bytes + b_bytes:
            raise CorruptLength("layer payload truncated")
        weights = np.frombuffer(data, dtype="<f8", count=fan_out * fan_in, offset=offset)
        weights = weights.reshape(fan_out, fan_in).copy()
        offset += w_bytes
        bias = np.frombuffer(data, dtype="<f8", count=fan_out, offset=offset).copy()
        offset += b_bytes
        layers.append(DenseLayer(weights, bias, activation))
    if offset != len(data):
        raise CorruptLength(f"{len(data) - offset} trailing bytes")
    return NetworkParams(layers)


def save_checkpoint(params: NetworkParams, path) -> None:
    try:
        Path(path).write_bytes(params_to_bytes(params))
    except OSError as exc:
        raise IoError(f"writing {path}: {exc}") from exc


def load_checkpoint(path) -> NetworkParams:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"reading {path}: {exc}") from exc
    return params_from_bytes(data)
