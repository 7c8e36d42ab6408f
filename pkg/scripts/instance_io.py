#!/usr/bin/env python3
"""
Packing Bilinear Toolkit - Instance Files

Instance documents are YAML with a fixed header:

    format_version: 1
    kind: pdb | ar
    name: <free text>
    metadata: {...}

followed by dense row-major matrices (P, p, Q, q for PDB; A, B, c, d, R, r and
first_stage for AR). Floats are written with 17 significant digits so a
write/read cycle reproduces every bit. See docs/INSTANCE_FORMAT.md.

Monotone NAE-3SAT formulas use a DIMACS-like text file: comment lines start
with 'c', the header is 'p mnae V C', then C lines of three variable indices.

Author: Bilinear Toolkit
Date: October 2025
"""

import logging
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import yaml

from ar_solver import ORTHANT, ArInstance
from errors import ConfigError
from hardness_reduction import MnaeInstance
from pdb_solver import PdbInstance
from polytope import PackingPolytope

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
PathLike = Union[str, Path]


class InstanceDumper(yaml.SafeDumper):
    """SafeDumper writing floats with 17 significant digits."""


def _represent_float(dumper: yaml.SafeDumper, value: float):
    if value != value:
        text = ".nan"
    elif value in (float("inf"), float("-inf")):
        text = ".inf" if value > 0 else "-.inf"
    else:
        text = "%.17g" % value
        if not any(ch in text for ch in ".en"):
            text += ".0"
    return dumper.represent_scalar("tag:yaml.org,2002:float", text)


InstanceDumper.add_representer(float, _represent_float)


def _plain(obj: Any) -> Any:
    """Convert numpy values and tuples into YAML-safe python values."""
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _matrix(doc: Dict[str, Any], key: str, cols: int = None) -> np.ndarray:
    if key not in doc:
        raise ConfigError(f"Instance document is missing '{key}'")
    value = np.array(doc[key], dtype=float)
    if value.size == 0 and cols is not None:
        return value.reshape(0, cols)
    return value


def _vector(doc: Dict[str, Any], key: str) -> np.ndarray:
    if key not in doc:
        raise ConfigError(f"Instance document is missing '{key}'")
    return np.array(doc[key], dtype=float).ravel()


def pdb_to_document(inst: PdbInstance, name: str = "pdb") -> Dict[str, Any]:
    return _plain({
        "format_version": FORMAT_VERSION,
        "kind": "pdb",
        "name": name,
        "metadata": inst.metadata,
        "n": inst.n,
        "P": inst.X.matrix,
        "p": inst.X.rhs,
        "Q": inst.Y.matrix,
        "q": inst.Y.rhs,
    })


def ar_to_document(inst: ArInstance, name: str = "ar") -> Dict[str, Any]:
    return _plain({
        "format_version": FORMAT_VERSION,
        "kind": "ar",
        "name": name,
        "metadata": inst.metadata,
        "first_stage": inst.first_stage,
        "A": inst.A,
        "B": inst.B,
        "c": inst.c,
        "d": inst.d,
        "R": inst.R,
        "r": inst.r,
    })


def document_to_instance(doc: Dict[str, Any]) -> Union[PdbInstance, ArInstance]:
    """
    Build an instance from a parsed document.

    Raises:
        ConfigError: Unknown version or kind, or missing fields
        DimensionMismatch: Inconsistent shapes
    """
    if not isinstance(doc, dict):
        raise ConfigError("Instance document must be a mapping")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ConfigError(f"Unsupported format_version {version!r} (expected {FORMAT_VERSION})")
    kind = doc.get("kind")
    metadata = doc.get("metadata") or {}

    if kind == "pdb":
        n = int(doc.get("n", 0)) or None
        X = PackingPolytope(_matrix(doc, "P", n), _vector(doc, "p"), name="X")
        Y = PackingPolytope(_matrix(doc, "Q", n), _vector(doc, "q"), name="Y")
        return PdbInstance(X=X, Y=Y, metadata=metadata)
    if kind == "ar":
        A = _matrix(doc, "A")
        U = PackingPolytope(_matrix(doc, "R", A.shape[0] if A.ndim == 2 else None), _vector(doc, "r"), name="U")
        return ArInstance(A=A, B=_matrix(doc, "B"), c=_vector(doc, "c"), d=_vector(doc, "d"),
                          uncertainty=U, first_stage=doc.get("first_stage", ORTHANT), metadata=metadata)
    raise ConfigError(f"Unknown instance kind {kind!r}")


def dump_instance(inst: Union[PdbInstance, ArInstance], name: str = None) -> str:
    if isinstance(inst, PdbInstance):
        doc = pdb_to_document(inst, name or "pdb")
    elif isinstance(inst, ArInstance):
        doc = ar_to_document(inst, name or "ar")
    else:
        raise ConfigError(f"Cannot serialize {type(inst).__name__}")
    return yaml.dump(doc, Dumper=InstanceDumper, sort_keys=False, default_flow_style=None, width=4096)


def write_instance(inst: Union[PdbInstance, ArInstance], path: PathLike, name: str = None) -> Path:
    """
    Write an instance document.

    Args:
        inst: PDB or AR instance
        path: Output file
        name: Document name (defaults to the kind)

    Returns:
        Path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_instance(inst, name), encoding="utf-8")
    logger.info(f"Instance written: {path}")
    return path


def write_document(doc: Dict[str, Any], path: PathLike) -> Path:
    """Write any result mapping (numpy values allowed) with the instance float format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = yaml.dump(_plain(doc), Dumper=InstanceDumper, sort_keys=False, default_flow_style=None, width=4096)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Results written: {path}")
    return path


def read_instance(path: PathLike) -> Union[PdbInstance, ArInstance]:
    """
    Read an instance document.

    Raises:
        FileNotFoundError: File does not exist
        ConfigError: Malformed document
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Instance file not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse instance file {path}: {e}") from e
    inst = document_to_instance(doc)
    logger.info(f"Instance loaded from: {path} ({doc['kind']})")
    return inst


def read_pdb_instance(path: PathLike) -> PdbInstance:
    inst = read_instance(path)
    if not isinstance(inst, PdbInstance):
        raise ConfigError(f"{path} does not hold a PDB instance")
    return inst


def read_ar_instance(path: PathLike) -> ArInstance:
    inst = read_instance(path)
    if not isinstance(inst, ArInstance):
        raise ConfigError(f"{path} does not hold an AR instance")
    return inst


def format_mnae(inst: MnaeInstance, comment: str = None) -> str:
    lines = [f"c {comment}"] if comment else []
    lines.append(f"p mnae {inst.num_vars} {inst.num_clauses}")
    lines += [" ".join(str(v) for v in clause) for clause in inst.clauses]
    return "\n".join(lines) + "\n"


def parse_mnae(text: str) -> MnaeInstance:
    """
    Parse the DIMACS-like formula text. A trailing 0 on a clause line is accepted.

    Raises:
        ConfigError: Missing header, wrong clause count or malformed line
    """
    header = None
    clauses = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "mnae":
                raise ConfigError(f"Line {lineno}: expected 'p mnae V C', got {line!r}")
            header = (int(parts[2]), int(parts[3]))
            continue
        if header is None:
            raise ConfigError(f"Line {lineno}: clause before the 'p mnae' header")
        try:
            values = [int(v) for v in parts]
        except ValueError:
            raise ConfigError(f"Line {lineno}: non-integer token in {line!r}") from None
        if len(values) == 4 and values[-1] == 0:
            values = values[:3]
        if len(values) != 3:
            raise ConfigError(f"Line {lineno}: clause must list exactly 3 variables")
        clauses.append(tuple(values))
    if header is None:
        raise ConfigError("Formula has no 'p mnae V C' header")
    if len(clauses) != header[1]:
        raise ConfigError(f"Header announces {header[1]} clauses, found {len(clauses)}")
    return MnaeInstance(num_vars=header[0], clauses=tuple(clauses))


def write_mnae(inst: MnaeInstance, path: PathLike, comment: str = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_mnae(inst, comment), encoding="utf-8")
    logger.info(f"Formula written: {path}")
    return path


def read_mnae(path: PathLike) -> MnaeInstance:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Formula file not found: {path}")
    return parse_mnae(path.read_text(encoding="utf-8"))
