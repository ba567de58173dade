"""Monte Carlo time-domain OFDM simulation over time-varying Rayleigh fading.

Two channel generators are provided:

* a two-term Taylor channel ``a_k(t) = a_k(t0) + a'_k(t0) (t - t0)`` with
  independent Gaussian gain and derivative, and
* exact Jakes-correlated Gaussian paths, sampled by factoring the
  covariance ``beta_k * J0(2 pi F_d (t_a - t_b))``.

The simulator builds the baseband OFDM waveform on a uniform grid,
multiplies each subcarrier by its own gain trajectory, runs the correlator
bank by midpoint Riemann sum and splits the output into desired signal and
ICI.  It shares no code with :mod:`hyperloop_ici.link_model`, so it can act as
an independent check on the closed form.
"""
from __future__ import annotations

import enum
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import j0

from .link_model import FadingProfile, MobilityProfile, OfdmConfig

DEFAULT_OVERSAMPLE = 16
MAX_PATH_SAMPLES = 4096
# Trials per work unit.  Fixed so results never depend on the worker count.
CHUNK_TRIALS = 250


class Constellation(str, enum.Enum):
    QPSK = "qpsk"
    QAM16 = "qam16"
    GAUSSIAN = "gaussian"


class ChannelMode(str, enum.Enum):
    TAYLOR = "taylor"
    JAKES = "jakes"


class TaylorValidity(str, enum.Enum):
    VALID = "valid"
    MARGINAL = "marginal"
    INVALID = "invalid"


class JitterWarning(RuntimeWarning):
    """Covariance was not numerically PSD and diagonal loading was applied."""


@dataclass(frozen=True)
class SimSeed:
    master_seed: int

    def __post_init__(self) -> None:
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    def trial_rng(self, trial: int) -> np.random.Generator:
        """Generator for one trial, derived only from (master_seed, trial)."""
        ss = np.random.SeedSequence(int(self.master_seed), spawn_key=(int(trial),))
        return np.random.default_rng(ss)


def _as_rng(seed: Union[int, SimSeed, np.random.Generator, None]) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, SimSeed):
        return np.random.default_rng(seed.master_seed)
    return np.random.default_rng(seed)


def _complex_normal(rng: np.random.Generator, shape, variance=1.0) -> np.ndarray:
    z = rng.standard_normal(shape + (2,) if isinstance(shape, tuple) else (shape, 2))
    return np.sqrt(np.asarray(variance) / 2.0) * (z[..., 0] + 1j * z[..., 1])


@dataclass(frozen=True)
class TaylorCoefficients:
    gain_at_t0: np.ndarray
    derivative_at_t0: np.ndarray
    t0: float

    def gains(self, times: np.ndarray) -> np.ndarray:
        """Gain trajectories, shape (N, len(times))."""
        dt = np.asarray(times, dtype=float) - self.t0
        return self.gain_at_t0[:, None] + self.derivative_at_t0[:, None] * dt[None, :]


@dataclass(frozen=True)
class JakesPath:
    times: np.ndarray
    gains: np.ndarray  # (N, len(times))


@dataclass(frozen=True)
class SymbolFrame:
    symbols: np.ndarray
    constellation: Constellation


@dataclass(frozen=True)
class TrialStats:
    desired_power_hat: np.ndarray
    ici_power_hat: np.ndarray
    noise_power_hat: np.ndarray
    desired_stderr: np.ndarray
    ici_stderr: np.ndarray
    noise_stderr: np.ndarray
    trials: int
    mode: ChannelMode

    @property
    def stderr(self) -> dict[str, np.ndarray]:
        return {
            "desired": self.desired_stderr,
            "ici": self.ici_stderr,
            "noise": self.noise_stderr,
        }


def taylor_validity(mob: MobilityProfile) -> TaylorValidity:
    """Classify whether the linear fading model is trustworthy at this Doppler."""
    fd = mob.doppler_bw
    if fd < 10e3:
        return TaylorValidity.VALID
    if fd < 15e3:
        return TaylorValidity.MARGINAL
    return TaylorValidity.INVALID


def sample_grid(cfg: OfdmConfig, oversample: int = DEFAULT_OVERSAMPLE) -> np.ndarray:
    """Midpoint sample times of one OFDM symbol, O*N points over [0, N*T]."""
    m = oversample * cfg.n_subcarriers
    return (np.arange(m) + 0.5) * (cfg.symbol_duration / m)


def random_symbols(
    n: int,
    constellation: Constellation = Constellation.QPSK,
    seed: Union[int, SimSeed, np.random.Generator, None] = None,
) -> SymbolFrame:
    rng = _as_rng(seed)
    constellation = Constellation(constellation)
    if constellation is Constellation.QPSK:
        bits = rng.integers(0, 2, size=(n, 2))
        sym = ((2 * bits[:, 0] - 1) + 1j * (2 * bits[:, 1] - 1)) / np.sqrt(2.0)
    elif constellation is Constellation.QAM16:
        levels = rng.integers(0, 4, size=(n, 2)) * 2 - 3
        sym = (levels[:, 0] + 1j * levels[:, 1]) / np.sqrt(10.0)
    else:
        sym = _complex_normal(rng, n)
    return SymbolFrame(symbols=sym.astype(complex), constellation=constellation)


def sample_taylor_channel(
    fading: FadingProfile,
    mob: MobilityProfile,
    cfg: OfdmConfig,
    seed: Union[int, SimSeed, np.random.Generator, None] = None,
) -> TaylorCoefficients:
    rng = _as_rng(seed)
    beta = fading.as_array()
    gain = _complex_normal(rng, beta.size, beta)
    deriv_var = 2.0 * np.pi**2 * beta * mob.doppler_bw**2
    deriv = _complex_normal(rng, beta.size, deriv_var)
    return TaylorCoefficients(gain_at_t0=gain, derivative_at_t0=deriv, t0=cfg.symbol_duration / 2)


def jakes_factor(doppler_bw: float, times: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of the unit-power Jakes covariance at ``times``.

    When the matrix is not numerically positive definite a diagonal load of
    1e-12 is added (growing tenfold per retry up to 1e-6) and a
    :class:`JitterWarning` names the load used.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-D sequence")
    if times.size > MAX_PATH_SAMPLES:
        raise ValueError(f"at most {MAX_PATH_SAMPLES} samples per path, got {times.size}")
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be sorted")
    cov = j0(2.0 * np.pi * doppler_bw * (times[:, None] - times[None, :]))
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    eye = np.eye(times.size)
    jitter = 1e-12
    while jitter <= 1e-6:
        try:
            factor = np.linalg.cholesky(cov + jitter * eye)
        except np.linalg.LinAlgError:
            jitter *= 10.0
            continue
        warnings.warn(
            f"Jakes covariance not numerically PSD; added {jitter:g} to the diagonal",
            JitterWarning,
            stacklevel=2,
        )
        return factor
    raise np.linalg.LinAlgError("Jakes covariance factorization failed even with 1e-6 jitter")


def _draw_jakes(rng: np.random.Generator, factor: np.ndarray, beta: np.ndarray) -> np.ndarray:
    z = _complex_normal(rng, (beta.size, factor.shape[0]))
    return np.sqrt(beta)[:, None] * (z @ factor.T)


def sample_jakes_path(
    fading: FadingProfile,
    mob: MobilityProfile,
    times: np.ndarray,
    seed: Union[int, SimSeed, np.random.Generator, None] = None,
) -> JakesPath:
    times = np.asarray(times, dtype=float)
    factor = jakes_factor(mob.doppler_bw, times)
    gains = _draw_jakes(_as_rng(seed), factor, fading.as_array())
    return JakesPath(times=times, gains=gains)


def _carriers(cfg: OfdmConfig, times: np.ndarray) -> np.ndarray:
    # exp(j 2 pi f_k t), shape (N, M)
    return np.exp(2j * np.pi * np.outer(cfg.subcarrier_freqs(), times))


def _channel_gains(channel, cfg: OfdmConfig, times: np.ndarray) -> np.ndarray:
    if isinstance(channel, TaylorCoefficients):
        return channel.gains(times)
    if isinstance(channel, JakesPath):
        if channel.gains.shape != (cfg.n_subcarriers, times.size) or not np.allclose(
            channel.times, times, rtol=1e-12, atol=0.0
        ):
            raise ValueError("Jakes path samples are not aligned with the signal sample grid")
        return channel.gains
    raise TypeError(f"unsupported channel type {type(channel).__name__}")


def synthesize_and_correlate(
    frame: SymbolFrame,
    channel: Union[TaylorCoefficients, JakesPath],
    cfg: OfdmConfig,
    oversample: int = DEFAULT_OVERSAMPLE,
    noise_seed: Union[int, np.random.Generator, None] = None,
) -> np.ndarray:
    """Transmit one OFDM symbol through ``channel`` and return correlator outputs.

    The received signal is built sample-by-sample on ``sample_grid``; each
    correlator is a midpoint Riemann sum over the same grid.  With
    ``noise_seed=None`` the run is noiseless; otherwise white Gaussian noise of
    density ``cfg.noise_density`` is added to the waveform, which gives noise
    variance ``noise_density`` per correlator output.
    """
    if oversample < 4:
        raise ValueError("oversample must be >= 4")
    symbols = np.asarray(frame.symbols, dtype=complex)
    if symbols.shape != (cfg.n_subcarriers,):
        raise ValueError("frame length does not match n_subcarriers")
    times = sample_grid(cfg, oversample)
    dt = cfg.symbol_duration / times.size
    carriers = _carriers(cfg, times)
    gains = _channel_gains(channel, cfg, times)

    s = np.sqrt(cfg.tx_power) * symbols
    norm = 1.0 / np.sqrt(cfg.symbol_duration)
    received = norm * np.sum(gains * s[:, None] * carriers, axis=0)
    if noise_seed is not None and cfg.noise_density > 0:
        rng = _as_rng(noise_seed)
        received = received + _complex_normal(rng, times.size, cfg.noise_density / dt)
    return norm * dt * (carriers.conj() @ received)


def _taylor_chunk(cfg, mob, fading, constellation, oversample, seed, start, stop):
    n = cfg.n_subcarriers
    times = sample_grid(cfg, oversample)
    carriers = _carriers(cfg, times)
    t0 = cfg.symbol_duration / 2
    a0 = np.empty((stop - start, n), complex)
    da = np.empty_like(a0)
    d = np.empty_like(a0)
    for row, t in enumerate(range(start, stop)):
        rng = seed.trial_rng(t)
        d[row] = random_symbols(n, constellation, rng).symbols
        ch = sample_taylor_channel(fading, mob, cfg, rng)
        a0[row], da[row] = ch.gain_at_t0, ch.derivative_at_t0
    s = np.sqrt(cfg.tx_power) * d
    norm = 1.0 / cfg.symbol_duration
    # r(t_n) = sum_k (a0_k + da_k (t_n - t0)) s_k e_k(t_n)
    received = (a0 * s) @ carriers + (times - t0)[None, :] * ((da * s) @ carriers)
    d_hat = norm * (cfg.symbol_duration / times.size) * (received @ carriers.conj().T)
    desired = a0 * s
    return desired, d_hat - desired


def _jakes_chunk(cfg, mob, fading, constellation, oversample, seed, start, stop, factor):
    n = cfg.n_subcarriers
    times = sample_grid(cfg, oversample)
    carriers = _carriers(cfg, times)
    beta = fading.as_array()
    m = times.size
    received = np.empty((stop - start, m), complex)
    desired = np.empty((stop - start, n), complex)
    norm = 1.0 / np.sqrt(cfg.symbol_duration)
    for row, t in enumerate(range(start, stop)):
        rng = seed.trial_rng(t)
        s = np.sqrt(cfg.tx_power) * random_symbols(n, constellation, rng).symbols
        path = _draw_jakes(rng, factor, beta)
        # last column is the sample at t0, the rest sit on the grid
        desired[row] = path[:, -1] * s
        received[row] = norm * np.sum(path[:, :m] * s[:, None] * carriers, axis=0)
    d_hat = norm * (cfg.symbol_duration / m) * (received @ carriers.conj().T)
    return desired, d_hat - desired


def run_trials(
    cfg: OfdmConfig,
    mob: MobilityProfile,
    fading: FadingProfile,
    mode: ChannelMode = ChannelMode.TAYLOR,
    trials: int = 10_000,
    seed: Union[int, SimSeed] = 0,
    *,
    constellation: Constellation = Constellation.QPSK,
    oversample: int = DEFAULT_OVERSAMPLE,
    workers: int = 1,
) -> TrialStats:
    """Estimate desired and ICI power per subcarrier from noiseless runs.

    Trial ``t`` draws everything from ``seed.trial_rng(t)`` and trials are
    processed in fixed-size chunks, so the returned statistics are bit-identical
    for any ``workers``.  Noise power is reported as ``cfg.noise_density``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if oversample < 4:
        raise ValueError("oversample must be >= 4")
    if len(fading) != cfg.n_subcarriers:
        raise ValueError("fading profile length does not match n_subcarriers")
    mode = ChannelMode(mode)
    constellation = Constellation(constellation)
    seed = seed if isinstance(seed, SimSeed) else SimSeed(int(seed))

    args = (cfg, mob, fading, constellation, oversample, seed)
    if mode is ChannelMode.TAYLOR:
        work, extra = _taylor_chunk, ()
    else:
        times = np.append(sample_grid(cfg, oversample), cfg.symbol_duration / 2)
        # factor needs sorted times; permute the t0 sample to the end afterwards
        order = np.argsort(times, kind="stable")
        factor = jakes_factor(mob.doppler_bw, times[order])
        inverse = np.empty_like(order)
        inverse[order] = np.arange(order.size)
        work, extra = _jakes_chunk, (factor[inverse],)

    bounds = [(a, min(a + CHUNK_TRIALS, trials)) for a in range(0, trials, CHUNK_TRIALS)]

    def job(b):
        return work(*args, b[0], b[1], *extra)

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, bounds))
    else:
        parts = [job(b) for b in bounds]

    desired = np.concatenate([abs(p[0]) ** 2 for p in parts])
    ici = np.concatenate([abs(p[1]) ** 2 for p in parts])
    n = cfg.n_subcarriers

    def stderr(x):
        if trials < 2:
            return np.full(n, np.nan)
        return x.std(axis=0, ddof=1) / np.sqrt(trials)

    return TrialStats(
        desired_power_hat=desired.mean(axis=0),
        ici_power_hat=ici.mean(axis=0),
        noise_power_hat=np.full(n, cfg.noise_density),
        desired_stderr=stderr(desired),
        ici_stderr=stderr(ici),
        noise_stderr=np.zeros(n),
        trials=trials,
        mode=mode,
    )
