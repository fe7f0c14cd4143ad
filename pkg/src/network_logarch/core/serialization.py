"""
Canonical JSON serialization for the domain types.

Every artifact is an object {"type": <name>, "data": <to_dict()>} written
with sorted keys and no insignificant whitespace. Floats are written with
their shortest round-tripping repr, so loading an artifact reproduces the
original arrays bit for bit. The SHA-256 of the canonical text is the
content hash recorded in reports.
"""

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Optional, Type, Union

from network_logarch.core.errors import ConfigurationError, InvariantViolation, UnreadableArtifact
from network_logarch.core.types import (
    DistanceMatrix,
    EdgeWeightMatrix,
    ForecastTable,
    LogVolPanel,
    NetworkFit,
    ReturnPanel,
    UnivariateFit,
    ZeroPolicy,
)

SERIALIZABLE_TYPES: Dict[str, Type] = {
    cls.__name__: cls
    for cls in (
        ReturnPanel, ZeroPolicy, LogVolPanel, DistanceMatrix,
        EdgeWeightMatrix, UnivariateFit, NetworkFit, ForecastTable,
    )
}


def to_json(obj: Any) -> str:
    """Canonical JSON text of a domain object"""
    name = type(obj).__name__
    if name not in SERIALIZABLE_TYPES:
        raise ConfigurationError(f"Type {name} has no canonical serialization")
    envelope = {'type': name, 'data': obj.to_dict()}
    return json.dumps(envelope, sort_keys=True, separators=(',', ':'), allow_nan=True)


def from_json(text: str, expected: Optional[Type] = None) -> Any:
    """
    Rebuild a domain object from canonical JSON

    Construction re-runs every invariant check of the type.

    Raises:
        InvariantViolation: If the payload is malformed or of the wrong type
    """
    try:
        envelope = json.loads(text)
        cls = SERIALIZABLE_TYPES[envelope['type']]
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise InvariantViolation(f"Not a canonical artifact: {e}")
    if expected is not None and cls is not expected:
        raise InvariantViolation(f"Expected a {expected.__name__} artifact, found {cls.__name__}")
    return cls.from_dict(envelope['data'])


def content_hash(obj: Any) -> str:
    """SHA-256 hex digest of the canonical JSON text"""
    return hashlib.sha256(to_json(obj).encode('utf-8')).hexdigest()


def save_artifact(obj: Any, path: Union[str, Path]) -> str:
    """Write an artifact and return its content hash"""
    text = to_json(obj)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding='utf-8')
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def load_artifact(path: Union[str, Path], expected: Optional[Type] = None) -> Any:
    """
    Read an artifact written by save_artifact

    Raises:
        UnreadableArtifact: If the file is missing or unreadable
        InvariantViolation: If the text is not a canonical artifact
    """
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise UnreadableArtifact(f"Cannot read artifact {path}: {e}")
    return from_json(text, expected)
