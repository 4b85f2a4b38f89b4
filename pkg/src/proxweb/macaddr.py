"""MAC address canonicalization.

The canonical form, used as the key everywhere in the platform, is
uppercase colon-separated hex: ``AA:BB:CC:DD:EE:FF``. Inputs may use
colons or hyphens and any letter case; they are normalized on ingest.
"""

import re

from .errors import InvalidMac

_GROUP = re.compile(r"^[0-9A-Fa-f]{2}$")


def canonical_mac(raw: str) -> str:
    """Normalize ``raw`` to canonical form, raising InvalidMac otherwise."""
    groups = re.split(r"[:-]", raw.strip())
    if len(groups) != 6 or not all(_GROUP.match(g) for g in groups):
        raise InvalidMac(f"not a MAC address: {raw!r}")
    return ":".join(g.upper() for g in groups)


def is_canonical_mac(value: str) -> bool:
    try:
        return canonical_mac(value) == value
    except InvalidMac:
        return False
