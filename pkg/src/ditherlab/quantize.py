"""Midtread quantizer, dither generation, and measurement-batch simulation.

The acquisition model: an unknown constant corrupted by zero-mean Gaussian
noise is either quantized directly ("quantized" batches) or passed through a
subtractively-dithered quantizer ("dithered" batches, uniform dither on
[-delta/2, delta/2] added before and subtracted after quantization).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import RandomStream

__all__ = [
    "QuantizerSpec",
    "SignalModel",
    "MeasurementBatch",
    "quantize",
    "draw_dithered_batch",
    "draw_quantized_batch",
    "quantization_error",
    "save_batch",
    "load_batch",
]

TIE_HALF_AWAY_FROM_ZERO = "half-away-from-zero"

# substream roles within one trial's stream
SUBSTREAM_NOISE = 0
SUBSTREAM_DITHER = 1
SUBSTREAM_LOCATION = 2


@dataclass(frozen=True)
class QuantizerSpec:
    """Non-overloading uniform midtread quantizer: bin size and tie rule.

    Levels are unbounded (no saturation); ties at bin edges round half away
    from zero, a measure-zero event fixed only so tests are deterministic.
    """

    delta: float
    tie_rule: str = TIE_HALF_AWAY_FROM_ZERO

    def __post_init__(self):
        object.__setattr__(self, "delta", float(self.delta))
        if not self.delta > 0.0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.tie_rule != TIE_HALF_AWAY_FROM_ZERO:
            raise ValueError(f"unsupported tie rule {self.tie_rule!r}")


@dataclass(frozen=True)
class SignalModel:
    """Constant location mu_x observed through N(0, sigma_z^2) noise."""

    mu_x: float
    sigma_z: float

    def __post_init__(self):
        object.__setattr__(self, "mu_x", float(self.mu_x))
        object.__setattr__(self, "sigma_z", float(self.sigma_z))
        if self.sigma_z < 0.0:
            raise ValueError(f"sigma_z must be >= 0, got {self.sigma_z}")


@dataclass(frozen=True)
class MeasurementBatch:
    """K samples plus the ground truth that generated them.

    kind is "dithered" (continuous-valued) or "quantized" (integer multiples
    of delta).  The Gaussian noise realizations are kept in ``z`` so the
    validation tests can check the dither-whitening property directly; they
    are not visible to any estimator.
    """

    kind: str
    samples: np.ndarray
    truth: SignalModel
    spec: QuantizerSpec
    z: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("dithered", "quantized"):
            raise ValueError(f"unknown batch kind {self.kind!r}")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("samples must be a non-empty 1-D array")
        samples = samples.copy()
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        if self.z is not None:
            z = np.asarray(self.z, dtype=np.float64).copy()
            z.setflags(write=False)
            object.__setattr__(self, "z", z)

    @property
    def k(self) -> int:
        return self.samples.size


def quantize(x, spec: QuantizerSpec):
    """Map x to the nearest multiple of delta, ties away from zero.

    Accepts scalars or arrays; scalar in, scalar out.
    """
    d = spec.delta
    scaled = np.asarray(x, dtype=np.float64) / d
    q = np.trunc(scaled + np.copysign(0.5, scaled)) * d
    return float(q) if np.isscalar(x) or q.ndim == 0 else q


def _draws(model: SignalModel, spec: QuantizerSpec, k: int, stream: RandomStream):
    if k < 1:
        raise ValueError(f"batch size must be >= 1, got {k}")
    z = model.sigma_z * stream.substream(SUBSTREAM_NOISE).normals(k)
    d = spec.delta * (stream.substream(SUBSTREAM_DITHER).uniforms(k) - 0.5)
    return z, d


def draw_dithered_batch(model: SignalModel, spec: QuantizerSpec, k: int,
                        stream: RandomStream) -> MeasurementBatch:
    """Simulate Y_i = q(mu_x + Z_i + D_i) - D_i.

    Z comes from substream 0 of the given stream and the dither D from
    substream 1, so a quantized batch drawn from the same stream shares the
    identical noise realizations (paired-comparison protocol).
    """
    z, d = _draws(model, spec, k, stream)
    y = quantize(model.mu_x + z + d, spec) - d
    return MeasurementBatch("dithered", y, model, spec, z=z)


def draw_quantized_batch(model: SignalModel, spec: QuantizerSpec, k: int,
                         stream: RandomStream) -> MeasurementBatch:
    """Simulate U_i = q(mu_x + Z_i), no dither; Z from substream 0."""
    if k < 1:
        raise ValueError(f"batch size must be >= 1, got {k}")
    z = model.sigma_z * stream.substream(SUBSTREAM_NOISE).normals(k)
    u = quantize(model.mu_x + z, spec)
    return MeasurementBatch("quantized", u, model, spec, z=z)


def quantization_error(batch: MeasurementBatch) -> np.ndarray:
    """Total noise V_i = Y_i - mu_x of a dithered batch (diagnostics only)."""
    if batch.kind != "dithered":
        raise ValueError("quantization_error is defined for dithered batches")
    if batch.truth is None:
        raise ValueError("batch carries no ground truth")
    return batch.samples - batch.truth.mu_x


def save_batch(batch: MeasurementBatch, dest) -> None:
    """Write a batch as CSV: a metadata comment header, one sample per line."""
    own = isinstance(dest, (str, bytes))
    fh = open(dest, "w", encoding="utf-8") if own else dest
    try:
        fh.write(f"# kind={batch.kind} delta={batch.spec.delta!r} "
                 f"sigma_z={batch.truth.sigma_z!r} mu_x={batch.truth.mu_x!r}\n")
        for v in batch.samples:
            fh.write(f"{float(v)!r}\n")
    finally:
        if own:
            fh.close()


def load_batch(src) -> MeasurementBatch:
    """Read a batch written by save_batch."""
    own = isinstance(src, (str, bytes))
    fh = open(src, "r", encoding="utf-8") if own else src
    try:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise ValueError("batch file must start with a '# kind=...' header")
        meta = dict(tok.split("=", 1) for tok in header[1:].split())
        samples = [float(line) for line in fh if line.strip()]
    finally:
        if own:
            fh.close()
    model = SignalModel(mu_x=float(meta["mu_x"]), sigma_z=float(meta["sigma_z"]))
    spec = QuantizerSpec(delta=float(meta["delta"]))
    return MeasurementBatch(meta["kind"], np.array(samples), model, spec)
