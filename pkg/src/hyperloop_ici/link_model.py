"""Closed-form OFDM link model under Doppler-induced inter-carrier interference.

The chain is: Doppler bandwidth -> desired power -> ICI power -> SINR ->
Shannon throughput summed over subcarriers.  Everything here is a pure
function of its arguments.

Units are strict SI: seconds, Hz, watts, metres per second.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact


class LinkModelError(ArithmeticError):
    """Base class for results that have no finite numeric value."""


class UnboundedSINR(LinkModelError):
    """Raised when both ICI and noise vanish, so SINR is infinite."""


class NoICIFloor(LinkModelError):
    """Raised when there is no interference, hence no SIR ceiling."""


def _check_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class OfdmConfig:
    """OFDM numerology and power budget.

    ``symbol_rate_interval`` is the input symbol interval T; one OFDM symbol
    lasts ``n_subcarriers * symbol_rate_interval``.  ``tx_power`` is the mean
    per-subcarrier symbol power and ``noise_density`` is the noise power seen at
    each correlator output.
    """

    n_subcarriers: int
    symbol_rate_interval: float
    carrier_freq: float
    tx_power: float = 1.0
    noise_density: float = 0.0

    def __post_init__(self) -> None:
        if isinstance(self.n_subcarriers, bool) or int(self.n_subcarriers) != self.n_subcarriers:
            raise ValueError(f"n_subcarriers must be an integer, got {self.n_subcarriers!r}")
        object.__setattr__(self, "n_subcarriers", int(self.n_subcarriers))
        if self.n_subcarriers < 1:
            raise ValueError("n_subcarriers must be >= 1")
        for name in ("symbol_rate_interval", "carrier_freq", "tx_power"):
            if _check_finite(name, getattr(self, name)) <= 0:
                raise ValueError(f"{name} must be > 0")
        if _check_finite("noise_density", self.noise_density) < 0:
            raise ValueError("noise_density must be >= 0")

    @property
    def symbol_duration(self) -> float:
        """OFDM symbol length N*T in seconds."""
        return self.n_subcarriers * self.symbol_rate_interval

    @property
    def subcarrier_spacing(self) -> float:
        return 1.0 / self.symbol_duration

    @property
    def bandwidth(self) -> float:
        return self.n_subcarriers * self.subcarrier_spacing

    @property
    def snr(self) -> float:
        """P_T / N_0 (infinite when noiseless)."""
        if self.noise_density == 0:
            return math.inf
        return self.tx_power / self.noise_density

    def subcarrier_freqs(self) -> np.ndarray:
        return np.arange(self.n_subcarriers) / self.symbol_duration

    def with_snr(self, snr: float) -> "OfdmConfig":
        """Copy with ``noise_density`` set so that P_T/N_0 equals ``snr``."""
        snr = float(snr)
        if not snr > 0:
            raise ValueError(f"snr must be > 0, got {snr!r}")
        noise = 0.0 if math.isinf(snr) else self.tx_power / snr
        return replace(self, noise_density=noise)


@dataclass(frozen=True)
class MobilityProfile:
    speed: float
    carrier_freq: float

    def __post_init__(self) -> None:
        if _check_finite("speed", self.speed) < 0:
            raise ValueError("speed must be >= 0")
        if _check_finite("carrier_freq", self.carrier_freq) <= 0:
            raise ValueError("carrier_freq must be > 0")

    @classmethod
    def for_config(cls, speed: float, cfg: OfdmConfig) -> "MobilityProfile":
        return cls(speed=speed, carrier_freq=cfg.carrier_freq)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def doppler_bw(self) -> float:
        return self.speed / self.wavelength


@dataclass(frozen=True)
class FadingProfile:
    beta: tuple[float, ...]

    def __post_init__(self) -> None:
        beta = tuple(float(b) for b in self.beta)
        if not beta:
            raise ValueError("beta must not be empty")
        if not all(math.isfinite(b) and b > 0 for b in beta):
            raise ValueError("every beta entry must be finite and > 0")
        object.__setattr__(self, "beta", beta)

    @classmethod
    def flat(cls, n: int, value: float = 1.0) -> "FadingProfile":
        return cls(beta=(value,) * n)

    def __len__(self) -> int:
        return len(self.beta)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.beta, dtype=float)

    @property
    def is_flat(self) -> bool:
        return len(set(self.beta)) == 1


@dataclass(frozen=True)
class SubcarrierMetrics:
    index: int
    desired_power: float
    ici_power: float
    noise_power: float
    sinr: float

    @property
    def sinr_db(self) -> float:
        return 10.0 * math.log10(self.sinr) if self.sinr > 0 else -math.inf


@dataclass(frozen=True)
class ThroughputResult:
    per_subcarrier: tuple[SubcarrierMetrics, ...]
    subcarrier_bw: float
    total_bps: float

    def subcarrier_bps(self) -> np.ndarray:
        sinr = np.array([m.sinr for m in self.per_subcarrier])
        return self.subcarrier_bw * np.log2(1.0 + sinr)


def _validate(cfg: OfdmConfig, fading: FadingProfile, mob: MobilityProfile | None = None) -> None:
    if len(fading) != cfg.n_subcarriers:
        raise ValueError(
            f"fading profile has {len(fading)} entries, config has {cfg.n_subcarriers} subcarriers"
        )
    if mob is not None and mob.carrier_freq != cfg.carrier_freq:
        raise ValueError("mobility profile and config disagree on carrier frequency")


def _check_index(cfg: OfdmConfig, i: int) -> int:
    if isinstance(i, bool) or int(i) != i or not 1 <= int(i) <= cfg.n_subcarriers:
        raise ValueError(f"subcarrier index must be in 1..{cfg.n_subcarriers}, got {i!r}")
    return int(i)


def doppler_frequency(speed: float, carrier_freq: float) -> float:
    """Maximum Doppler shift v*f_c/c in Hz."""
    return MobilityProfile(speed, carrier_freq).doppler_bw


def interferer_sums(beta: Sequence[float] | np.ndarray) -> np.ndarray:
    """Return ``S[i] = sum_{k != i} beta[k] / (k - i)**2`` for every i.

    Exact finite sums, evaluated as a direct (not FFT) convolution so the
    result does not pick up transform round-off.
    """
    beta = np.asarray(beta, dtype=float)
    n = beta.size
    if n == 1:
        return np.zeros(1)
    m = np.arange(-(n - 1), n, dtype=float)
    kernel = np.zeros_like(m)
    nz = m != 0
    kernel[nz] = 1.0 / m[nz] ** 2
    return np.convolve(beta, kernel, mode="full")[n - 1 : 2 * n - 1]


def _ici_scale(cfg: OfdmConfig, mob: MobilityProfile) -> float:
    # (N T v)^2 / (2 lambda^2)
    return (cfg.symbol_duration * mob.speed) ** 2 / (2.0 * mob.wavelength**2)


def desired_power(cfg: OfdmConfig, fading: FadingProfile, i: int) -> float:
    _validate(cfg, fading)
    i = _check_index(cfg, i)
    return fading.beta[i - 1] * cfg.tx_power


def ici_power(cfg: OfdmConfig, mob: MobilityProfile, fading: FadingProfile, i: int) -> float:
    """ICI power on subcarrier ``i`` (1-based) under the linear fading model."""
    _validate(cfg, fading, mob)
    i = _check_index(cfg, i)
    beta = fading.as_array()
    k = np.arange(1, cfg.n_subcarriers + 1)
    mask = k != i
    s = float(np.sum(beta[mask] / (k[mask] - i) ** 2))
    return cfg.tx_power * _ici_scale(cfg, mob) * s


def ici_powers(cfg: OfdmConfig, mob: MobilityProfile, fading: FadingProfile) -> np.ndarray:
    """Vector of ICI powers for subcarriers 1..N."""
    _validate(cfg, fading, mob)
    return cfg.tx_power * _ici_scale(cfg, mob) * interferer_sums(fading.beta)


def sinr(cfg: OfdmConfig, mob: MobilityProfile, fading: FadingProfile, i: int) -> float:
    p = desired_power(cfg, fading, i)
    denom = ici_power(cfg, mob, fading, i) + cfg.noise_density
    if denom <= 0:
        raise UnboundedSINR(f"subcarrier {i}: no ICI and no noise, SINR is infinite")
    return p / denom


def sir_floor(cfg: OfdmConfig, mob: MobilityProfile, fading: FadingProfile, i: int) -> float:
    """SINR ceiling of subcarrier ``i`` as noise vanishes.

    Raises :class:`NoICIFloor` when the vehicle is static or there is only one
    subcarrier.
    """
    _validate(cfg, fading, mob)
    i = _check_index(cfg, i)
    if mob.speed == 0 or cfg.n_subcarriers == 1:
        raise NoICIFloor("no inter-carrier interference: speed is zero or N == 1")
    s = interferer_sums(fading.beta)[i - 1]
    return fading.beta[i - 1] * 2.0 * mob.wavelength**2 / ((cfg.symbol_duration * mob.speed) ** 2 * s)


def sir_floor_throughput(cfg: OfdmConfig, mob: MobilityProfile, fading: FadingProfile) -> float:
    """Throughput ceiling (bps) obtained with every subcarrier at its SIR floor."""
    floors = np.array([sir_floor(cfg, mob, fading, i) for i in range(1, cfg.n_subcarriers + 1)])
    return float(np.sum(cfg.subcarrier_spacing * np.log2(1.0 + floors)))


def throughput(cfg: OfdmConfig, mob: MobilityProfile, fading: FadingProfile) -> ThroughputResult:
    _validate(cfg, fading, mob)
    beta = fading.as_array()
    p = beta * cfg.tx_power
    ici = ici_powers(cfg, mob, fading)
    denom = ici + cfg.noise_density
    if np.any(denom <= 0):
        raise UnboundedSINR("no ICI and no noise, SINR is infinite")
    ratio = p / denom
    bw = cfg.subcarrier_spacing
    metrics = tuple(
        SubcarrierMetrics(
            index=idx + 1,
            desired_power=float(p[idx]),
            ici_power=float(ici[idx]),
            noise_power=cfg.noise_density,
            sinr=float(ratio[idx]),
        )
        for idx in range(cfg.n_subcarriers)
    )
    total = float(np.sum(bw * np.log2(1.0 + ratio)))
    return ThroughputResult(per_subcarrier=metrics, subcarrier_bw=bw, total_bps=total)


def degradation_ratio(cfg: OfdmConfig, fading: FadingProfile, speed: float, snr: float) -> float:
    """Throughput without Doppler divided by throughput at ``speed``."""
    cfg = cfg.with_snr(snr)
    still = throughput(cfg, MobilityProfile.for_config(0.0, cfg), fading).total_bps
    moving = throughput(cfg, MobilityProfile.for_config(speed, cfg), fading).total_bps
    return still / moving
