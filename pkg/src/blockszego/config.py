"""Run configuration: one INI file with every default spelled out.

``blockszego print-config`` prints the defaults below; a file passed with
``--config`` overrides them section by section, and command-line flags
override the file.
"""
import configparser
import io
import os

from .errors import InvalidParameter

#: Environment variable that overrides the output directory.
OUTPUT_ENV = "BLOCKSZEGO_OUTPUT_DIR"

DEFAULTS = {
    "matrix": {
        # floquet | unitary-spectrum | normal-spectrum | identity | <path to .mtx>
        "kind": "floquet",
        "n": "2000",
        "seed": "0",
        # unitary-spectrum only: copies of the repeated eigenvalue 1 and the excluded half-arc
        "repeated": "4",
        "gap": "0.35",
        # floquet only: use alpha_j = 0 for every j
        "zero_alphas": "no",
    },
    "run": {
        "s": "4",
        "m": "30",
        "algorithms": "arnoldi, isometric, laurent_gs, cmv",
        "dump_basis": "no",
    },
    "tolerances": {
        "eps_defl": "1e-8",
        "rank_tol": "1e-10",
    },
    "timing": {
        "n": "20000",
        "s": "10",
        "ms": "10, 20, 30, 40, 50, 60",
        "seed": "0",
        "repeats": "1",
    },
    "accuracy": {
        "n": "20000",
        "s": "10",
        "ms": "10, 20, 30, 40, 50, 60",
        "seed": "0",
    },
    "ritz": {
        "n": "800",
        "seed": "0",
        "ms": "1-20",
        "block_sizes": "1, 4",
        "weight": "1.0",
        "gap": "0.35",
    },
    "verify": {
        "seed": "0",
        "n": "200",
        "s": "3",
        "m": "10",
        "instances": "5",
    },
    "output": {
        "dir": "results",
    },
}


def load(path=None):
    cfg = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cfg.read_dict(DEFAULTS)
    if path is not None:
        if not os.path.exists(path):
            raise InvalidParameter(f"config file {path} not found")
        cfg.read(path)
    return cfg


def dump(cfg):
    buf = io.StringIO()
    cfg.write(buf)
    return buf.getvalue()


def output_dir(cfg, override=None):
    d = override or os.environ.get(OUTPUT_ENV) or cfg["output"]["dir"]
    os.makedirs(d, exist_ok=True)
    return d


def int_list(text):
    """Parse ``"10, 20, 30"`` or ranges like ``"1-20"`` into a list of ints."""
    out = []
    for part in str(text).replace(",", " ").split():
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out:
        raise InvalidParameter(f"empty list {text!r}")
    return out


def name_list(text):
    return [w for w in str(text).replace(",", " ").split() if w]
