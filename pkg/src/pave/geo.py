from __future__ import annotations

import math

EARTH_RADIUS_M = 6_371_008.8
DEG = math.pi / 180.0


def haversine_m(lon1: float, lat1: float, lon2: float, lat2: float) -> float:
    """Great-circle distance in meters between two (lon, lat) points.

    The operation order here is mirrored exactly by the C kernel so both
    backends produce bit-identical distances.
    """
    phi1 = lat1 * DEG
    phi2 = lat2 * DEG
    s1 = math.sin((phi2 - phi1) / 2.0)
    s2 = math.sin(((lon2 - lon1) * DEG) / 2.0)
    a = s1 * s1 + math.cos(phi1) * math.cos(phi2) * (s2 * s2)
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(max(0.0, a))))
