"""Binary container for data cubes ("RDC1") and range-Doppler map dumps ("RDM1").

Layout, all little-endian::

    magic      4 bytes
    version    u16 (= 1)
    dims       4 x u32
    seed       u64
    params     10 x f64, RadarParams fields in declaration order
    samples    interleaved f32 (re, im), row-major over dims

Cube dims are ``[n_tx, n_chirps, n_rx, n_samples]``; map dims are
``[n_tx, n_rx, n_chirps, n_samples]``.
"""

from __future__ import annotations

import dataclasses
import struct
from pathlib import Path

import numpy as np

from .config import RadarParams
from .processing import RangeDopplerMaps
from .synth import DataCube

CUBE_MAGIC = b"RDC1"
MAP_MAGIC = b"RDM1"
VERSION = 1

_PARAM_FIELDS = [f.name for f in dataclasses.fields(RadarParams)]
_INT_FIELDS = {"n_samples", "n_chirps", "n_tx", "n_rx"}
_HEADER = struct.Struct("<4sH4IQ" + "d" * len(_PARAM_FIELDS))
_SECTIONS = [("magic", 4), ("version", 2), ("dims", 16), ("seed", 8),
             ("params", 8 * len(_PARAM_FIELDS))]


class CubeFormatError(ValueError):
    pass


def _encode(magic: bytes, dims, seed: int, params: RadarParams, data: np.ndarray) -> bytes:
    values = [float(getattr(params, name)) for name in _PARAM_FIELDS]
    header = _HEADER.pack(magic, VERSION, *dims, seed, *values)
    body = np.ascontiguousarray(data, dtype="<c8").tobytes()
    return header + body


def _decode(raw: bytes, magic: bytes, source: str):
    offset = 0
    for name, size in _SECTIONS:
        if len(raw) < offset + size:
            raise CubeFormatError(f"{source}: truncated in {name} section "
                                  f"(need {offset + size} bytes, have {len(raw)})")
        offset += size
    got_magic, version, *rest = _HEADER.unpack_from(raw)
    if got_magic != magic:
        raise CubeFormatError(f"{source}: {magic.decode()} expected, found {got_magic!r}")
    if version != VERSION:
        raise CubeFormatError(f"{source}: unsupported version {version} (expected {VERSION})")
    dims, seed, values = tuple(rest[:4]), rest[4], rest[5:]
    kwargs = {}
    for name, value in zip(_PARAM_FIELDS, values):
        kwargs[name] = int(value) if name in _INT_FIELDS else value
    params = RadarParams(**kwargs)
    if 0 in dims:
        raise CubeFormatError(f"{source}: zero-length dimension in {dims}")
    n_values = int(np.prod(dims))
    body = raw[_HEADER.size:]
    if len(body) < 8 * n_values:
        raise CubeFormatError(f"{source}: truncated in samples section "
                              f"(need {8 * n_values} bytes, have {len(body)})")
    if len(body) > 8 * n_values:
        raise CubeFormatError(f"{source}: {len(body) - 8 * n_values} trailing bytes after samples")
    data = np.frombuffer(body, dtype="<c8").reshape(dims).astype(np.complex64)
    return dims, seed, params, data


def encode_cube(cube: DataCube) -> bytes:
    return _encode(CUBE_MAGIC, cube.shape, cube.seed, cube.params, cube.samples)


def decode_cube(raw: bytes, source: str = "<bytes>") -> DataCube:
    dims, seed, params, data = _decode(raw, CUBE_MAGIC, source)
    expected = (params.n_tx, params.n_chirps, params.n_rx, params.n_samples)
    if dims != expected:
        raise CubeFormatError(f"{source}: dims {dims} disagree with stored params {expected}")
    return DataCube(samples=data, params=params, seed=seed)


def write_cube(cube: DataCube, path: str | Path) -> None:
    """Write a cube; samples are stored as complex64."""
    Path(path).write_bytes(encode_cube(cube))


def read_cube(path: str | Path) -> DataCube:
    return decode_cube(Path(path).read_bytes(), str(path))


def write_maps(maps: RangeDopplerMaps, path: str | Path, seed: int = 0) -> None:
    Path(path).write_bytes(_encode(MAP_MAGIC, maps.maps.shape, seed, maps.derived.params, maps.maps))


def read_maps(path: str | Path) -> tuple[np.ndarray, RadarParams, int]:
    """Return (maps, params, seed) from a map dump."""
    dims, seed, params, data = _decode(Path(path).read_bytes(), MAP_MAGIC, str(path))
    expected = (params.n_tx, params.n_rx, params.n_chirps, params.n_samples)
    if dims != expected:
        raise CubeFormatError(f"{path}: dims {dims} disagree with stored params {expected}")
    return data, params, seed
