"""Deterministic 64-bit seed derivation (splitmix64 finalizer)."""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

# Phase codes are part of the on-disk seed contract; never renumber.
PHASES = {"fix": 0, "solve": 1, "correlation": 2, "raw": 3, "reference": 4,
          "bootstrap": 5, "generate": 6, "read": 7, "instance": 8}


def mix64(x: int) -> int:
    """splitmix64 avalanche; a bijection on 64-bit integers."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int, phase="read") -> int:
    """Child seed for ``(index, phase)`` under ``master_seed``.

    For a fixed master the map is injective for ``index < 2**60`` because the
    pair is packed into distinct 64-bit words before a bijective mix.
    """
    if isinstance(phase, str):
        if phase not in PHASES:
            raise ValueError(f"unknown phase {phase!r}; expected one of {sorted(PHASES)}")
        code = PHASES[phase]
    else:
        code = int(phase)
    if not 0 <= code < 16:
        raise ValueError(f"phase code {code} out of range")
    if not 0 <= index < (1 << 60):
        raise ValueError(f"index {index} out of range")
    base = mix64((master_seed & MASK64) + GOLDEN)
    return mix64((base + ((index << 4) | code) * GOLDEN) & MASK64)
