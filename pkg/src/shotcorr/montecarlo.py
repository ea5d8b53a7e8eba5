"""Monte Carlo simulation of repeated single-shot phase measurements.

The detuning trajectory is a superposition of harmonic modes with
independent Gaussian quadrature amplitudes, one mode per logarithmic
frequency cell, so beta(t) is a stationary Gaussian process whose
spectrum matches the requested model on the grid.  The phase a shot
accumulates over its evolution window is integrated *exactly* per mode
(the window turns a mode of frequency omega into an amplitude factor
2 sin(omega tau / 2) / omega), so there is no time-step error anywhere.

A below-grid "DC" mode carries the variance of all frequencies under the
grid floor as a per-record constant offset; it cancels in difference
quantities exactly as very slow noise should.

Each record draws fresh mode amplitudes (fresh realization), and shots
within a record share the trajectory, which reproduces both the
single-shot contrast and the shot-shot correlations of the continuous
process.  Randomness is split into three independent streams per record
(trajectory, readout projection, readout flips) so that, e.g., enabling
flips does not perturb the trajectories.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .correlator import QubitParams, correct_fidelity
from .spectra import SpectrumModel

__all__ = [
    "GridSpec",
    "ModeSet",
    "Protocol",
    "ShotRecord",
    "CorrelationCurve",
    "synthesize_modes",
    "accumulated_phases",
    "accumulated_phases_independent",
    "run_record",
    "run_protocol",
    "estimate_autocorrelation",
    "correlation_curve",
    "records_to_csv",
    "records_from_csv",
]

# cycles per GEMV block in the phase accumulation
_BLOCK = 256


@dataclass(frozen=True)
class GridSpec:
    """Frequency grid for the harmonic synthesis.

    n_modes logarithmic cells between omega_min and omega_max; leave the
    bounds as None to derive them from the spectrum and record length:
    the floor sits two decades under both the spectral knee and the
    inverse record duration (so the slowest resolved mode still dephases
    across the record), the ceiling at the spectrum's negligibility
    bound.
    """

    n_modes: int = 4096
    omega_min: float | None = None
    omega_max: float | None = None

    def __post_init__(self):
        if self.n_modes < 256:
            raise ValueError("n_modes must be at least 256")
        if self.omega_min is not None and not self.omega_min > 0:
            raise ValueError("omega_min must be positive")
        if (
            self.omega_min is not None
            and self.omega_max is not None
            and not self.omega_max > self.omega_min
        ):
            raise ValueError("omega_max must exceed omega_min")

    def resolve(self, spectrum: SpectrumModel, duration: float):
        lo = self.omega_min
        if lo is None:
            lo = min(spectrum.knee * 1e-2, 1e-2 / duration)
        hi = self.omega_max
        if hi is None:
            hi = min(spectrum.hard_max, spectrum.suggested_omega_max(1e-12))
        if not hi > lo:
            raise ValueError("resolved grid is empty; check omega bounds")
        return lo, hi


@dataclass(frozen=True, eq=False)
class ModeSet:
    """One realization of the harmonic synthesis.

    beta(t) = dc + sum_k amp_k * (u_k cos(omega_k t) + v_k sin(omega_k t))
    with u, v standard normal.  ``amp`` holds the per-mode rms; the DC
    term is a zero-frequency mode in the same arrays.
    """

    omega: np.ndarray
    amp: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def beta(self, t):
        """Trajectory values; reference implementation, O(modes) per point."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        phase = self.omega[:, None] * t[None, :]
        out = (self.amp * self.u) @ np.cos(phase) + (self.amp * self.v) @ np.sin(phase)
        return out if out.size > 1 else float(out[0])

    def window_phase(self, t_start, tau):
        """Exact integral of beta over [t_start, t_start + tau] per mode sum."""
        t_start = np.atleast_1d(np.asarray(t_start, dtype=float))
        w = self.omega[:, None]
        gain = np.where(w > 0, 2.0 * np.sin(w * tau / 2.0) / np.where(w > 0, w, 1.0), tau)
        center = t_start[None, :] + tau / 2.0
        out = (self.amp * self.u) @ (gain * np.cos(w * center)) + (self.amp * self.v) @ (
            gain * np.sin(w * center)
        )
        return out if out.size > 1 else float(out[0])


@dataclass(frozen=True)
class Protocol:
    """Timing of one record: n_cycles shots, one every cycle_period seconds.

    Each cycle holds the evolution window (tau), the readout, and any
    dead time; cycle_period is also the shot separation delta_t at lag 1.
    """

    tau: float
    cycle_period: float
    n_cycles: int
    qubit: QubitParams = field(default_factory=QubitParams)

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not self.cycle_period >= self.tau + self.qubit.dead_time:
            raise ValueError(
                "cycle_period must cover tau plus dead_time "
                f"({self.cycle_period} < {self.tau} + {self.qubit.dead_time})"
            )
        if self.n_cycles < 2:
            raise ValueError("n_cycles must be at least 2")

    @property
    def duration(self) -> float:
        return self.n_cycles * self.cycle_period


@dataclass(frozen=True, eq=False)
class ShotRecord:
    """Outcomes (+1/-1) of one simulated record."""

    outcomes: np.ndarray
    tau: float
    cycle_period: float

    def __post_init__(self):
        out = np.asarray(self.outcomes)
        if out.ndim != 1:
            raise ValueError("outcomes must be 1-d")
        object.__setattr__(self, "outcomes", out.astype(np.int8))

    def __len__(self):
        return len(self.outcomes)

    def t_center(self):
        return np.arange(len(self.outcomes)) * self.cycle_period + self.tau / 2.0

    def to_csv(self, path):
        t = self.t_center()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["cycle_index", "t_center_s", "outcome"])
            for i, (tc, o) in enumerate(zip(t, self.outcomes)):
                writer.writerow([i, f"{tc:.12g}", int(o)])


def records_to_csv(records: list[ShotRecord], path) -> None:
    """Write a batch of records to one CSV; cycle_index restarts per record."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["cycle_index", "t_center_s", "outcome"])
        for rec in records:
            for i, (tc, o) in enumerate(zip(rec.t_center(), rec.outcomes)):
                writer.writerow([i, f"{tc:.12g}", int(o)])


def records_from_csv(path, tau: float, cycle_period: float) -> list[ShotRecord]:
    """Read a batch CSV back; record boundaries are cycle_index resets."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty records file") from None
        if [h.strip() for h in header] != ["cycle_index", "t_center_s", "outcome"]:
            raise ValueError(
                f"{path}: expected header 'cycle_index,t_center_s,outcome', "
                f"got {','.join(header)!r}"
            )
        records, chunk, prev = [], [], None
        for i, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                idx = int(row[0])
                outcome = int(row[2])
            except (ValueError, IndexError):
                raise ValueError(f"{path}: malformed row {i}: {row!r}") from None
            if outcome not in (-1, 1):
                raise ValueError(f"{path}: row {i}: outcome must be +1 or -1")
            if prev is not None and idx <= prev:
                records.append(ShotRecord(np.array(chunk), tau, cycle_period))
                chunk = []
            chunk.append(outcome)
            prev = idx
        if chunk:
            records.append(ShotRecord(np.array(chunk), tau, cycle_period))
    if not records:
        raise ValueError(f"{path}: no outcome rows")
    return records


def synthesize_modes(
    spectrum: SpectrumModel, grid: GridSpec, duration: float, rng
) -> ModeSet:
    """Draw one trajectory realization on the resolved grid.

    Cell rms come from the two-sided convention
    <beta^2> = (1/pi) integral S d omega: amp_k^2 = S(omega_k) dw_k / pi
    at the cell's log midpoint.  Frequencies below the grid floor enter
    as a DC mode with the floor's share of the variance.
    """
    lo, hi = grid.resolve(spectrum, duration)
    if (hi / lo) ** (1.0 / grid.n_modes) > 1.5:
        raise ValueError(
            "frequency grid too coarse: adjacent-mode ratio "
            f"{(hi / lo) ** (1.0 / grid.n_modes):.3g} > 1.5; raise n_modes"
        )
    edges = np.geomspace(lo, hi, grid.n_modes + 1)
    omega = np.sqrt(edges[:-1] * edges[1:])
    widths = np.diff(edges)
    amp = np.sqrt(spectrum.evaluate(omega) * widths / math.pi)
    # below-grid variance: S is flat under the floor by construction
    dc_amp = math.sqrt(spectrum.evaluate(lo) * lo / math.pi)
    omega = np.concatenate(([0.0], omega))
    amp = np.concatenate(([dc_amp], amp))
    u = rng.standard_normal(len(omega))
    v = rng.standard_normal(len(omega))
    return ModeSet(omega, amp, u, v)


def accumulated_phases(modes: ModeSet, protocol: Protocol) -> np.ndarray:
    """Phase integral of every cycle's evolution window, exactly per mode.

    Blocked evaluation: the in-block time offsets repeat, so their
    cosines are precomputed once and each block needs two matrix-vector
    products plus one scalar-argument trig call per mode.
    """
    tau = protocol.tau
    dt = protocol.cycle_period
    n = protocol.n_cycles
    w = modes.omega
    gain = np.where(w > 0, 2.0 * np.sin(w * tau / 2.0) / np.where(w > 0, w, 1.0), tau)
    bu = modes.amp * gain * modes.u
    bv = modes.amp * gain * modes.v

    offs = np.arange(_BLOCK) * dt
    m_cos = np.cos(w[:, None] * offs[None, :])
    m_sin = np.sin(w[:, None] * offs[None, :])

    phases = np.empty(n)
    for s in range(0, n, _BLOCK):
        e = min(s + _BLOCK, n)
        t0 = s * dt + tau / 2.0
        cb = np.cos(w * t0)
        sb = np.sin(w * t0)
        # cos(w (t0+off)) = cb*cos(w off) - sb*sin(w off), likewise sin
        width = e - s
        phases[s:e] = (bu * cb + bv * sb) @ m_cos[:, :width] + (bv * cb - bu * sb) @ m_sin[
            :, :width
        ]
    return phases


def accumulated_phases_independent(modes: ModeSet, protocol: Protocol, rng) -> np.ndarray:
    """Diagnostics variant: every cycle sees a fresh trajectory.

    A fresh Gaussian trajectory per cycle makes the window phase an exact
    zero-mean normal with variance sum((amp_k gain_k)^2) and removes all
    cycle-to-cycle correlation, so one scaled draw per cycle reproduces
    the per-cycle-independent process without rebuilding trajectories.
    """
    tau = protocol.tau
    w = modes.omega
    gain = np.where(w > 0, 2.0 * np.sin(w * tau / 2.0) / np.where(w > 0, w, 1.0), tau)
    sigma = float(np.sqrt(np.sum((modes.amp * gain) ** 2)))
    return sigma * rng.standard_normal(protocol.n_cycles)


def run_record(
    spectrum: SpectrumModel,
    protocol: Protocol,
    grid: GridSpec,
    seed: int,
    record_index: int = 0,
    independent_cycles: bool = False,
) -> ShotRecord:
    """Simulate one record; deterministic in (seed, record_index).

    Three independent substreams per record keep the trajectory, the
    readout projection and the readout flips decoupled.  With
    ``independent_cycles`` every cycle draws its own trajectory, a
    diagnostics mode that deliberately destroys the delay dependence.
    """
    ss = np.random.SeedSequence(seed, spawn_key=(record_index,))
    traj_ss, readout_ss, flip_ss = ss.spawn(3)
    rng_traj = np.random.Generator(np.random.PCG64(traj_ss))
    modes = synthesize_modes(spectrum, grid, protocol.duration, rng_traj)
    if independent_cycles:
        phases = accumulated_phases_independent(modes, protocol, rng_traj)
    else:
        phases = accumulated_phases(modes, protocol)

    qubit = protocol.qubit
    p_plus = 0.5 * (1.0 + np.cos(qubit.omega_q * protocol.tau + phases))
    rng_read = np.random.Generator(np.random.PCG64(readout_ss))
    outcomes = np.where(rng_read.random(len(phases)) < p_plus, 1, -1).astype(np.int8)
    if qubit.readout_flip_prob > 0:
        rng_flip = np.random.Generator(np.random.PCG64(flip_ss))
        flips = rng_flip.random(len(phases)) < qubit.readout_flip_prob
        outcomes = np.where(flips, -outcomes, outcomes).astype(np.int8)
    return ShotRecord(outcomes, protocol.tau, protocol.cycle_period)


def run_protocol(
    spectrum: SpectrumModel,
    protocol: Protocol,
    n_records: int,
    seed: int,
    grid: GridSpec | None = None,
    threads: int | None = None,
    independent_cycles: bool = False,
) -> list[ShotRecord]:
    """Simulate ``n_records`` independent records, in submission order."""
    if n_records < 1:
        raise ValueError("n_records must be positive")
    grid = grid if grid is not None else GridSpec()
    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(
                    run_record, spectrum, protocol, grid, seed, i, independent_cycles
                )
                for i in range(n_records)
            ]
            return [f.result() for f in futures]
    return [
        run_record(spectrum, protocol, grid, seed, i, independent_cycles)
        for i in range(n_records)
    ]


def _blocking_stderr(x: np.ndarray) -> float:
    """Flyvbjerg-Petersen blocking estimate for a correlated series."""
    x = np.asarray(x, dtype=float)
    best = 0.0
    while len(x) >= 16:
        n = len(x)
        se = math.sqrt(np.var(x, ddof=1) / n)
        best = max(best, se)
        if n % 2:
            x = x[:-1]
        x = 0.5 * (x[0::2] + x[1::2])
    return best


def estimate_autocorrelation(
    records: list[ShotRecord], lags, correct_epsilon: float | None = None
):
    """Mean outcome product at each cycle lag, with honest uncertainties.

    Returns (correlation, stderr, n_pairs) arrays over the lags.  With
    eight or more records the spread of per-record means sets the error
    bar (records are independent by construction); fewer records fall
    back to blocking on the product series.  ``correct_epsilon`` divides
    out a known readout flip probability.
    """
    lags = np.asarray(lags, dtype=int)
    if lags.ndim != 1 or len(lags) == 0:
        raise ValueError("lags must be a nonempty 1-d sequence")
    if np.any(lags < 1):
        raise ValueError("lags must be >= 1")
    if not records:
        raise ValueError("no records given")
    shortest = min(len(r) for r in records)
    if np.any(lags >= shortest):
        raise ValueError("lag exceeds record length")

    corr = np.empty(len(lags))
    stderr = np.empty(len(lags))
    n_pairs = np.empty(len(lags), dtype=int)
    for j, m in enumerate(lags):
        means = []
        pairs = 0
        prods = []
        for rec in records:
            p = rec.outcomes[:-m].astype(float) * rec.outcomes[m:].astype(float)
            means.append(p.mean())
            pairs += len(p)
            prods.append(p)
        means = np.asarray(means)
        corr[j] = means.mean()
        n_pairs[j] = pairs
        if len(records) >= 8:
            stderr[j] = means.std(ddof=1) / math.sqrt(len(means))
        else:
            per_rec = [_blocking_stderr(p) for p in prods]
            stderr[j] = math.sqrt(sum(se**2 for se in per_rec)) / len(records)
    if correct_epsilon:
        corr = np.array([correct_fidelity(c, correct_epsilon) for c in corr])
        stderr = stderr / (1.0 - 2.0 * correct_epsilon) ** 2
    return corr, stderr, n_pairs


@dataclass(frozen=True, eq=False)
class CorrelationCurve:
    """Estimated correlator versus shot separation, with uncertainties."""

    delta_t: np.ndarray
    tau: np.ndarray
    correlation: np.ndarray
    stderr: np.ndarray
    n_pairs: np.ndarray

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["delta_t_s", "tau_s", "correlation", "stderr", "n_pairs"])
            for row in zip(self.delta_t, self.tau, self.correlation, self.stderr, self.n_pairs):
                writer.writerow(
                    [f"{row[0]:.12g}", f"{row[1]:.12g}", f"{row[2]:.12g}", f"{row[3]:.12g}", int(row[4])]
                )

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValueError(f"{path}: empty curve file") from None
            expected = ["delta_t_s", "tau_s", "correlation", "stderr", "n_pairs"]
            # extra trailing columns (e.g. uncorrected estimates) are ignored
            if [h.strip() for h in header][: len(expected)] != expected:
                raise ValueError(
                    f"{path}: expected header {','.join(expected)!r}, got {','.join(header)!r}"
                )
            cols = [[], [], [], [], []]
            for i, row in enumerate(reader, start=2):
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                try:
                    for c, val in zip(cols, row):
                        c.append(float(val))
                except ValueError:
                    raise ValueError(f"{path}: malformed row {i}: {row!r}") from None
        return cls(
            np.asarray(cols[0]),
            np.asarray(cols[1]),
            np.asarray(cols[2]),
            np.asarray(cols[3]),
            np.asarray(cols[4], dtype=int),
        )


def correlation_curve(
    records: list[ShotRecord], lags, correct_epsilon: float | None = None
) -> CorrelationCurve:
    """Package the lag estimates of a batch of same-protocol records."""
    tau = records[0].tau
    dt = records[0].cycle_period
    for rec in records:
        if rec.tau != tau or rec.cycle_period != dt:
            raise ValueError("records mix different protocols")
    lags = np.asarray(lags, dtype=int)
    corr, stderr, n_pairs = estimate_autocorrelation(records, lags, correct_epsilon)
    return CorrelationCurve(lags * dt, np.full(len(lags), tau), corr, stderr, n_pairs)
