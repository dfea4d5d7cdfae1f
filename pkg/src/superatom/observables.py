"""Post-processing: transmission spectra, conditional photon numbers,
waiting-time and burst statistics, and intensity correlations."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dynamics.lindblad import DensityMatrix, steady_state
from .dynamics.mcwf import ClickRecord, TrajectoryRecord
from .errors import EmptyResultError, SuperAtomError
from .hilbert import annihilation
from .models import PhysicalParams, build_ladder_hamiltonian, jump_operators

MIN_G2_CLICKS = 100


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    detunings: np.ndarray
    mean_photon_ss: np.ndarray
    output_flux: np.ndarray
    g2_zero: np.ndarray

    def __post_init__(self):
        n = len(self.detunings)
        for name in ("mean_photon_ss", "output_flux", "g2_zero"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} length differs from detunings")


def photon_moments(rho: DensityMatrix, basis) -> tuple[float, float]:
    """``(<a^dag a>, <a^dag a^dag a a>)`` in state ``rho``."""
    a = annihilation(basis).matrix
    a2 = a @ a
    n1 = np.real(np.sum((a.conj().T @ a).multiply(rho.matrix.T)))
    n2 = np.real(np.sum((a2.conj().T @ a2).multiply(rho.matrix.T)))
    return float(n1), float(n2)


def g2_zero(rho: DensityMatrix, basis) -> float:
    """``<a^dag a^dag a a> / <a^dag a>^2``; NaN for an empty cavity."""
    n1, n2 = photon_moments(rho, basis)
    return n2 / n1**2 if n1 > 0 else float("nan")


def transmission_spectrum(p: PhysicalParams, detunings: Sequence[float]) -> SpectrumResult:
    """Steady-state photon number, output flux and g2(0) versus probe detuning."""
    detunings = np.asarray(detunings, dtype=float)
    if detunings.size == 0:
        raise ValueError("detuning grid is empty")
    n_ss = np.empty(detunings.size)
    g2 = np.empty(detunings.size)
    for i, d in enumerate(detunings):
        q = p.replace(delta_probe=float(d))
        try:
            rho = steady_state(build_ladder_hamiltonian(q), jump_operators(q))
        except SuperAtomError as exc:
            raise type(exc)(f"at delta = {d:.6g} rad/us: {exc}") from exc
        n1, n2 = photon_moments(rho, q.basis)
        n_ss[i] = max(n1, 0.0)
        g2[i] = n2 / n1**2 if n1 > 0 else np.nan
    return SpectrumResult(detunings, n_ss, p.kappa * n_ss, g2)


def spectrum_peaks(values: np.ndarray, rel_height: float = 0.1) -> np.ndarray:
    """Indices of interior local maxima above ``rel_height`` times the global maximum."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return np.empty(0, dtype=int)
    inner = (v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]) & (v[1:-1] >= rel_height * v.max())
    return np.nonzero(inner)[0] + 1


def peak_fwhm(x: np.ndarray, values: np.ndarray, peak: int) -> float:
    """Full width at half maximum around ``peak``, by linear interpolation."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(values, dtype=float)
    half = 0.5 * v[peak]
    lo = peak
    while lo > 0 and v[lo] > half:
        lo -= 1
    hi = peak
    while hi < v.size - 1 and v[hi] > half:
        hi += 1
    if v[lo] > half or v[hi] > half:
        raise ValueError("half maximum not reached inside the grid")
    left = np.interp(half, [v[lo], v[lo + 1]], [x[lo], x[lo + 1]])
    right = np.interp(half, [v[hi], v[hi - 1]], [x[hi], x[hi - 1]])
    return float(right - left)


def conditional_mean_photon_after_click(records: Sequence[TrajectoryRecord],
                                        delays: Sequence[float],
                                        channel: str = "cavity") -> np.ndarray:
    """Average of ``<n>(t_click + tau)`` over all clicks, for each delay ``tau``.

    Zero delay uses the exact post-jump value; positive delays interpolate
    linearly between the post-jump value and the sampled trace.  Clicks whose
    ``t_click + tau`` lies beyond the record are left out for that delay.
    """
    delays = np.asarray(delays, dtype=float)
    sums = np.zeros(delays.size)
    counts = np.zeros(delays.size, dtype=int)
    for rec in records:
        c = rec.clicks
        t_end = rec.sample_times[-1]
        for t, ch, n0 in zip(c.times, c.channels, c.post_jump_photon):
            if ch != channel:
                continue
            k = np.searchsorted(rec.sample_times, t, side="right")
            xs = np.concatenate(([t], rec.sample_times[k:]))
            ys = np.concatenate(([n0], rec.mean_photon[k:]))
            ok = t + delays <= t_end
            sums[ok] += np.interp(t + delays[ok], xs, ys)
            counts[ok] += 1
    if counts.max(initial=0) == 0:
        raise EmptyResultError("no clicks on channel " + channel)
    with np.errstate(invalid="ignore"):
        return np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)


def _click_times(clicks, channel: str | None) -> list[np.ndarray]:
    """Normalize a ClickRecord / list of ClickRecords / raw times to per-trajectory arrays."""
    if isinstance(clicks, ClickRecord):
        clicks = [clicks]
    out = []
    items = list(clicks)
    if items and not isinstance(items[0], (ClickRecord, np.ndarray, list, tuple)):
        items = [np.asarray(items, dtype=float)]
    for c in items:
        if isinstance(c, ClickRecord):
            out.append(c.times if channel is None else c.channel_times(channel))
        else:
            out.append(np.sort(np.asarray(c, dtype=float)))
    return out


def waiting_times(clicks, channel: str | None = "cavity") -> np.ndarray:
    """Consecutive inter-click intervals, pooled over trajectories."""
    parts = [np.diff(t) for t in _click_times(clicks, channel) if t.size >= 2]
    return np.concatenate(parts) if parts else np.empty(0)


def waiting_time_histogram(clicks, bins: Sequence[float],
                           channel: str | None = "cavity") -> tuple[np.ndarray, np.ndarray]:
    """Counts of inter-click intervals in the fixed bin ``edges``."""
    tau = waiting_times(clicks, channel)
    if tau.size == 0:
        raise EmptyResultError("need at least two clicks in one trajectory")
    edges = np.asarray(bins, dtype=float)
    counts, _ = np.histogram(tau, bins=edges)
    return counts, edges


@dataclass(frozen=True)
class BurstHistogram:
    window: float
    counts: dict[int, int]

    @property
    def n_bursts(self) -> int:
        return sum(self.counts.values())

    @property
    def n_clicks(self) -> int:
        return sum(m * c for m, c in self.counts.items())

    @property
    def mean_multiplicity(self) -> float:
        return self.n_clicks / self.n_bursts if self.n_bursts else float("nan")

    def fraction_at_least(self, m: int) -> float:
        if not self.n_bursts:
            return 0.0
        return sum(c for k, c in self.counts.items() if k >= m) / self.n_bursts


def burst_sizes(times: np.ndarray, window: float) -> list[int]:
    sizes = []
    run = 0
    prev = None
    for t in times:
        if prev is not None and t - prev <= window:
            run += 1
        else:
            if run:
                sizes.append(run)
            run = 1
        prev = t
    if run:
        sizes.append(run)
    return sizes


def burst_statistics(clicks, window: float, channel: str | None = "cavity") -> BurstHistogram:
    """Greedy clustering: a click joins the current burst if its gap to the previous
    click is at most ``window``.  Bursts never span trajectories."""
    if not window > 0:
        raise ValueError("burst window must be positive")
    hist: Counter[int] = Counter()
    for t in _click_times(clicks, channel):
        hist.update(burst_sizes(t, window))
    return BurstHistogram(window, dict(sorted(hist.items())))


def first_burst_sizes(clicks: Iterable[ClickRecord], window: float,
                      channel: str = "cavity") -> np.ndarray:
    """Multiplicity of the burst opened by each trajectory's first click (0 if none)."""
    out = []
    for c in clicks:
        sizes = burst_sizes(c.channel_times(channel), window)
        out.append(sizes[0] if sizes else 0)
    return np.array(out, dtype=int)


@dataclass(frozen=True)
class G2Estimate:
    value: float
    stderr: float
    n_clicks: int
    coincidences: int
    expected: float
    sufficient: bool


def _coincidences(times: np.ndarray, window: float) -> int:
    if times.size < 2:
        return 0
    hi = np.searchsorted(times, times + window, side="right")
    return int(np.sum(hi - np.arange(times.size) - 1))


def g2_zero_from_clicks(clicks: Sequence[ClickRecord], window: float, t_start: float = 0.0,
                        n_boot: int = 400, seed: int = 0,
                        channel: str = "cavity") -> G2Estimate:
    """Coincidence estimate of g2(0) from pooled trajectories.

    Counts click pairs in one trajectory separated by at most ``window`` after
    ``t_start``, normalized by the Poisson expectation ``lambda^2 (T w - w^2/2)``
    with the rate ``lambda`` estimated from the same clicks.  The standard
    error is the trajectory bootstrap, floored by the Poisson error of the
    coincidence count.
    """
    if not window > 0:
        raise ValueError("coincidence window must be positive")
    recs = list(clicks)
    if not recs:
        raise EmptyResultError("no trajectories")
    T = recs[0].t_final - t_start
    if T <= window:
        raise ValueError("observation span shorter than the coincidence window")
    n = np.empty(len(recs))
    c = np.empty(len(recs))
    for i, rec in enumerate(recs):
        t = rec.channel_times(channel)
        t = t[t >= t_start]
        n[i] = t.size
        c[i] = _coincidences(t, window)
    span = T * window - 0.5 * window**2

    def estimate(n_, c_):
        m = n_.size
        rate2 = (n_.sum() ** 2 - n_.sum()) / (m * T) ** 2
        expected = m * rate2 * span
        return (c_.sum() / expected if expected > 0 else np.nan), expected

    value, expected = estimate(n, c)
    total = int(n.sum())
    if total < 2 or not expected > 0:
        raise EmptyResultError("too few clicks for a coincidence estimate")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n.size, size=(n_boot, n.size))
    boot = np.array([estimate(n[row], c[row])[0] for row in idx])
    boot = boot[np.isfinite(boot)]
    se_boot = float(boot.std(ddof=1)) if boot.size > 1 else np.inf
    se_floor = np.sqrt(max(c.sum(), 1.0)) / expected
    return G2Estimate(float(value), max(se_boot, float(se_floor)), total, int(c.sum()),
                      float(expected), total >= MIN_G2_CLICKS)
