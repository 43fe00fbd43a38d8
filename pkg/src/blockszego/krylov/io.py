"""Basis dumps and counter reports.

Binary layout (little endian): the 8-byte magic ``BSZBASIS``, then ``n``,
``s``, ``m`` as int64, then the ``n x ms`` complex128 payload in column-major
order. Counter reports are flat ``key = value`` text, one entry per line.
"""
import numpy as np

from ..errors import InvalidInput
from .types import BlockBasis

MAGIC = b"BSZBASIS"
_HEADER = np.dtype([("n", "<i8"), ("s", "<i8"), ("m", "<i8")])


def write_basis(path, basis):
    M = np.asarray(basis.matrix, dtype="<c16")
    header = np.array([(basis.n, basis.s, len(basis))], dtype=_HEADER)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(header.tobytes())
        fh.write(M.tobytes(order="F"))


def read_basis(path, kind="polynomial"):
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise InvalidInput(f"{path}: not a basis dump")
        h = np.frombuffer(fh.read(_HEADER.itemsize), dtype=_HEADER)[0]
        n, s, m = int(h["n"]), int(h["s"]), int(h["m"])
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != n * s * m:
        raise InvalidInput(f"{path}: payload has {data.size} entries, header says {n * s * m}")
    M = data.reshape((n, s * m), order="F").astype(complex, order="F")
    return BlockBasis(M, s, kind)


def format_counters(counters, **extra):
    items = dict(counters.as_dict())
    items["inner_products_per_step"] = " ".join(map(str, counters.inner_products_per_step))
    items.update(extra)
    return "".join(f"{k} = {v}\n" for k, v in items.items())


def parse_counters(text):
    out = {}
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, _, value = line.partition("=")
        value = value.strip()
        try:
            out[key.strip()] = int(value)
        except ValueError:
            out[key.strip()] = value
    return out
