"""Nats/bits conversion.

All internal quantities are in nats; a base-2 presentation is purely a
reporting conversion.
"""

from __future__ import annotations

import math

LN2 = math.log(2.0)


def nats_to_bits(x: float) -> float:
    return x / LN2


def bits_to_nats(x: float) -> float:
    return x * LN2
