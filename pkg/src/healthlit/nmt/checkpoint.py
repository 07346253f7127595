"""Binary checkpoint container.

Layout::

    b"HLNMT\\n"                 6-byte magic
    uint64 little-endian       header length in bytes
    header                     UTF-8 JSON (sorted keys): format_version, config,
                               vocab, steps, final_loss, params=[{name, shape}]
    parameter blocks           little-endian float64, C order, in PARAM_ORDER
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..errors import ContractError
from .model import PARAM_ORDER, ModelConfig, check_params
from .vocab import Vocabulary

MAGIC = b"HLNMT\n"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    config: ModelConfig
    vocab: Vocabulary
    params: dict
    steps: int = 0
    final_loss: float = float("nan")
    format_version: int = FORMAT_VERSION

    def header(self) -> dict:
        return {
            "format_version": self.format_version,
            "config": asdict(self.config),
            "vocab": self.vocab.to_dict(),
            "steps": int(self.steps),
            "final_loss": float(self.final_loss),
            "params": [{"name": k, "shape": list(self.params[k].shape)} for k in PARAM_ORDER],
        }

    def to_bytes(self) -> bytes:
        header = json.dumps(self.header(), sort_keys=True, ensure_ascii=False).encode("utf-8")
        blocks = [np.ascontiguousarray(self.params[k], dtype="<f8").tobytes() for k in PARAM_ORDER]
        return MAGIC + struct.pack("<Q", len(header)) + header + b"".join(blocks)

    def save(self, path) -> Path:
        path = Path(path)
        path.write_bytes(self.to_bytes())
        return path

    @classmethod
    def from_bytes(cls, data: bytes) -> "Checkpoint":
        if not data.startswith(MAGIC):
            raise ContractError("not a checkpoint file (bad magic)")
        off = len(MAGIC)
        (hlen,) = struct.unpack_from("<Q", data, off)
        off += 8
        header = json.loads(data[off : off + hlen].decode("utf-8"))
        off += hlen
        if header.get("format_version") != FORMAT_VERSION:
            raise ContractError(f"unsupported checkpoint version {header.get('format_version')}")
        config = ModelConfig(**header["config"])
        vocab = Vocabulary.from_dict(header["vocab"])
        params = {}
        for spec in header["params"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            nbytes = 8 * count
            if off + nbytes > len(data):
                raise ContractError("checkpoint is truncated")
            params[spec["name"]] = np.frombuffer(data, dtype="<f8", count=count, offset=off).astype(np.float64).reshape(shape)
            off += nbytes
        if off != len(data):
            raise ContractError("trailing bytes after the last parameter block")
        check_params(params, config, len(vocab))
        return cls(config, vocab, params, header["steps"], header["final_loss"], header["format_version"])

    @classmethod
    def load(cls, path) -> "Checkpoint":
        return cls.from_bytes(Path(path).read_bytes())
