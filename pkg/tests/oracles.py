"""Independent oracles shared by unit and acceptance tests."""

import math

from shapely.geometry import Polygon, box


def strip_oracle(dec):
    """K for g(x, y) = (x + k y, y - 1) from exact strip-image intersections.

    Offsets are scanned over |d| <= 4 k (M' + 2) N; K is the start of the last
    contiguous run of offsets with positive-area overlap, maximised over strips.
    """
    k = dec.lift.spec.k_dehn
    N, Y, D = dec.N, dec.Y, dec.depth
    reach = int(math.ceil(4 * k * Y * N))
    starts = []
    for sign in (+1, -1):
        lo, hi = (Y, D) if sign > 0 else (-D, -Y)
        for n in range(N):
            a, b = n / N, (n + 1) / N
            image = Polygon([(a + k * lo, lo - 1), (b + k * lo, lo - 1),
                             (b + k * hi, hi - 1), (a + k * hi, hi - 1)])
            present = set()
            for d in range(-reach, reach + 1):
                m = n + d if sign > 0 else n - d
                if image.intersection(box(m / N, lo, (m + 1) / N, hi)).area > 1e-12:
                    present.add(d)
            assert present
            top = max(present)
            while top - 1 in present:
                top -= 1
            starts.append(top)
    return max(starts)
