"""Named parameter tensors with seeded, counter-based initialization."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ParamSpec:
    shape: tuple
    init: str  # "he" | "glorot" | "zeros"
    fan_in: int
    fan_out: int


def philox_generator(seed, stream):
    """Counter-based RNG stream; (seed, stream) fully determines the draws."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed) + (np.uint64(stream) << np.uint64(32))))


class ParamSet:
    """Ordered name -> ndarray mapping holding one model's parameters."""

    def __init__(self, values=None):
        self.values: dict[str, np.ndarray] = dict(values or {})

    @classmethod
    def initialize(cls, specs, seed, dtype=np.float32):
        """He-uniform / Glorot-uniform / zero init, in declaration order.

        Draws come from a single Philox stream keyed by `seed`, so the
        result is bitwise reproducible for a given spec dict and seed.
        """
        rng = philox_generator(seed, 0)
        values = {}
        for name, spec in specs.items():
            if spec.init == "zeros":
                values[name] = np.zeros(spec.shape, dtype=dtype)
            elif spec.init == "he":
                lim = np.sqrt(6.0 / spec.fan_in)
                values[name] = rng.uniform(-lim, lim, spec.shape).astype(dtype)
            elif spec.init == "glorot":
                lim = np.sqrt(6.0 / (spec.fan_in + spec.fan_out))
                values[name] = rng.uniform(-lim, lim, spec.shape).astype(dtype)
            else:
                raise ValueError(f"unknown init {spec.init!r} for {name!r}")
        return cls(values)

    def __getitem__(self, name):
        return self.values[name]

    def __setitem__(self, name, value):
        self.values[name] = value

    def __contains__(self, name):
        return name in self.values

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def names(self):
        return list(self.values)

    def copy(self):
        return ParamSet({k: v.copy() for k, v in self.values.items()})

    def astype(self, dtype):
        return ParamSet({k: v.astype(dtype) for k, v in self.values.items()})

    def select(self, prefix):
        """Names starting with `prefix` (e.g. the encoder subset of a model)."""
        return [n for n in self.values if n.startswith(prefix)]

    def tobytes(self):
        """Stable byte view of all parameters, for bitwise comparisons."""
        return b"".join(self.values[n].tobytes() for n in sorted(self.values))
