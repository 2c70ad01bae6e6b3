"""ULA array responses, sparse multipath channels, pilot measurements, and
angular-prior-to-frequency-interval mapping.

Normalized spatial frequencies live in [-1/2, 1/2] (half-wavelength spacing);
an angle prior of center c and width w maps to the image of (d/lambda)*sin
over the arc [c - w/2, c + w/2].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

# bounded rejection sampling: attempts per path / center redraws per scenario
_MAX_PATH_ATTEMPTS = 10_000
_MAX_CENTER_ATTEMPTS = 200


class SignalModelError(ValueError):
    """Invalid model parameters or an infeasible generation request."""


def wrap_distance(f1: float, f2: float) -> float:
    """Wrap-around distance between two normalized frequencies on the unit circle."""
    d = abs(f1 - f2) % 1.0
    return min(d, 1.0 - d)


@dataclass(frozen=True)
class FrequencyInterval:
    """Open band (f_lo, f_hi) of normalized spatial frequencies within [-1/2, 1/2]."""

    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not (-0.5 <= self.f_lo < self.f_hi <= 0.5):
            raise SignalModelError(
                f"interval must satisfy -1/2 <= f_lo < f_hi <= 1/2, got "
                f"({self.f_lo}, {self.f_hi})"
            )

    @property
    def width(self) -> float:
        return self.f_hi - self.f_lo

    @property
    def center(self) -> float:
        return 0.5 * (self.f_lo + self.f_hi)

    def contains(self, f: float, margin: float = 0.0) -> bool:
        """True when f is strictly inside the band, at least `margin` from both edges."""
        return self.f_lo + margin < f < self.f_hi - margin

    def reflected(self) -> "FrequencyInterval":
        """The mirror band (-f_hi, -f_lo); the band of conjugated atoms."""
        return FrequencyInterval(-self.f_hi, -self.f_lo)


FULL_BAND = FrequencyInterval(-0.5, 0.5)


@dataclass(frozen=True, eq=False)
class ArrayResponse:
    """ULA steering vector: values[k] = exp(i 2 pi k f), k = 0..n_antennas-1."""

    n_antennas: int
    freq: float
    values: np.ndarray


def array_response(n: int, f: float) -> ArrayResponse:
    """Steering vector of an n-element half-wavelength ULA at normalized frequency f."""
    if n < 1:
        raise SignalModelError(f"need at least one antenna, got n={n}")
    if not -0.5 <= f <= 0.5:
        raise SignalModelError(f"normalized frequency must lie in [-1/2, 1/2], got {f}")
    values = np.exp(2j * np.pi * f * np.arange(n))
    return ArrayResponse(n_antennas=n, freq=float(f), values=values)


def steering_matrix(n: int, freqs) -> np.ndarray:
    """n x len(freqs) matrix of steering vectors (vectorized array_response)."""
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    return np.exp(2j * np.pi * np.outer(np.arange(n), freqs))


@dataclass(frozen=True, eq=False)
class PathSet:
    """L multipath components: complex gains plus tx/rx normalized frequencies.

    Frequencies must be pairwise separated (wrap-around) by more than the
    declared minimum in each dimension.
    """

    gains: np.ndarray
    tx_freqs: np.ndarray
    rx_freqs: np.ndarray
    min_sep_tx: float = 0.0
    min_sep_rx: float = 0.0

    def __post_init__(self):
        gains = np.atleast_1d(np.asarray(self.gains, dtype=complex))
        tx = np.atleast_1d(np.asarray(self.tx_freqs, dtype=float))
        rx = np.atleast_1d(np.asarray(self.rx_freqs, dtype=float))
        if not (len(gains) == len(tx) == len(rx)):
            raise SignalModelError("gains/tx_freqs/rx_freqs length mismatch")
        if np.any(np.abs(tx) > 0.5) or np.any(np.abs(rx) > 0.5):
            raise SignalModelError("path frequencies must lie in [-1/2, 1/2]")
        # min_sep = 0 disables the check (1D channels carry placeholder rx freqs)
        for name, freqs, sep in (("tx", tx, self.min_sep_tx), ("rx", rx, self.min_sep_rx)):
            if sep <= 0:
                continue
            for i in range(len(freqs)):
                for j in range(i + 1, len(freqs)):
                    if wrap_distance(freqs[i], freqs[j]) <= sep:
                        raise SignalModelError(
                            f"{name} frequencies {freqs[i]} and {freqs[j]} violate "
                            f"min separation {sep}"
                        )
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "tx_freqs", tx)
        object.__setattr__(self, "rx_freqs", rx)

    def __len__(self) -> int:
        return len(self.gains)

    @property
    def paths(self):
        """List of (gain, tx_freq, rx_freq) triples."""
        return list(zip(self.gains, self.tx_freqs, self.rx_freqs))


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """Received pilot block Y = H F X + N with its sensing matrices and noise level."""

    Y: np.ndarray
    F: np.ndarray
    X: np.ndarray
    noise_var: float
    rng_seed: int = 0

    def __post_init__(self):
        Y = np.asarray(self.Y, dtype=complex)
        F = np.asarray(self.F, dtype=complex)
        X = np.asarray(self.X, dtype=complex)
        if Y.ndim != 2 or F.ndim != 2 or X.ndim != 2:
            raise SignalModelError("Y, F, X must be matrices")
        s = Y.shape[1]
        if F.shape[1] != s or X.shape != (s, s):
            raise SignalModelError(
                f"slot-count mismatch: Y has {s} columns, F {F.shape[1]}, X {X.shape}"
            )
        if np.any(X[~np.eye(s, dtype=bool)] != 0):
            raise SignalModelError("pilot matrix X must be diagonal")
        if self.noise_var < 0:
            raise SignalModelError("noise variance must be nonnegative")
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "X", X)

    @property
    def n_rx(self) -> int:
        return self.Y.shape[0]

    @property
    def n_tx(self) -> int:
        return self.F.shape[0]

    @property
    def n_slots(self) -> int:
        return self.Y.shape[1]


@dataclass(frozen=True)
class PathSpec:
    """Per-path generation constraints: gain variance plus optional frequency bands."""

    gain_var: float
    tx_interval: FrequencyInterval | None = None
    rx_interval: FrequencyInterval | None = None


def channel_matrix(paths: PathSet, n_t: int, n_r: int) -> np.ndarray:
    """Assemble H = sum_l gain_l a(n_r, rx_l) a(n_t, tx_l)^H, shape (n_r, n_t)."""
    H = np.zeros((n_r, n_t), dtype=complex)
    for gain, tx, rx in paths.paths:
        H += gain * np.outer(array_response(n_r, rx).values,
                             array_response(n_t, tx).values.conj())
    return H


def _draw_separated(rng, interval: FrequencyInterval, existing: list[float],
                    min_sep: float) -> float:
    for _ in range(_MAX_PATH_ATTEMPTS):
        f = rng.uniform(interval.f_lo, interval.f_hi)
        if all(wrap_distance(f, g) > min_sep for g in existing):
            return f
    raise SignalModelError(
        f"could not place a path with min separation {min_sep} inside "
        f"({interval.f_lo}, {interval.f_hi}) after {_MAX_PATH_ATTEMPTS} attempts"
    )


def generate_channel(n_t: int, n_r: int, path_spec, min_sep_tx: float = 0.0,
                     min_sep_rx: float = 0.0, rng_seed: int = 0):
    """Draw a random sparse channel.

    path_spec is a sequence of PathSpec (or (gain_var, tx_interval, rx_interval)
    tuples). Frequencies are drawn uniformly inside each path's band (full band
    when None), rejection-sampled for wrap-around separation; gains are circular
    complex Gaussian with the given variances. Returns (PathSet, H).
    """
    rng = np.random.default_rng(rng_seed)
    specs = [p if isinstance(p, PathSpec) else PathSpec(*p) for p in path_spec]
    tx_freqs: list[float] = []
    rx_freqs: list[float] = []
    for spec in specs:
        tx_freqs.append(_draw_separated(rng, spec.tx_interval or FULL_BAND,
                                        tx_freqs, min_sep_tx))
        if n_r > 1:
            rx_freqs.append(_draw_separated(rng, spec.rx_interval or FULL_BAND,
                                            rx_freqs, min_sep_rx))
        else:
            rx_freqs.append(0.0)
    variances = np.array([s.gain_var for s in specs])
    gains = np.sqrt(variances / 2) * (rng.standard_normal(len(specs))
                                      + 1j * rng.standard_normal(len(specs)))
    paths = PathSet(gains, np.array(tx_freqs), np.array(rx_freqs),
                    min_sep_tx=min_sep_tx, min_sep_rx=min_sep_rx if n_r > 1 else 0.0)
    return paths, channel_matrix(paths, n_t, n_r)


def simulate_measurements(H: np.ndarray, F: np.ndarray, X: np.ndarray,
                          noise_var: float, rng_seed: int = 0) -> MeasurementSet:
    """Y = H F X + N with i.i.d. circular complex Gaussian noise of variance noise_var."""
    H = np.asarray(H, dtype=complex)
    F = np.asarray(F, dtype=complex)
    X = np.asarray(X, dtype=complex)
    if H.shape[1] != F.shape[0] or F.shape[1] != X.shape[0]:
        raise SignalModelError(
            f"dimension mismatch: H {H.shape}, F {F.shape}, X {X.shape}"
        )
    rng = np.random.default_rng(rng_seed)
    n_r, s = H.shape[0], X.shape[1]
    noise = np.sqrt(noise_var / 2) * (rng.standard_normal((n_r, s))
                                      + 1j * rng.standard_normal((n_r, s)))
    return MeasurementSet(Y=H @ F @ X + noise, F=F, X=X,
                          noise_var=float(noise_var), rng_seed=rng_seed)


def dft_sensing_matrix(n_t: int, n_slots: int, rng_seed: int = 0) -> np.ndarray:
    """n_slots distinct columns of the n_t-point unitary DFT, sampled without replacement."""
    if n_slots > n_t:
        raise SignalModelError(f"cannot pick {n_slots} distinct DFT columns out of {n_t}")
    rng = np.random.default_rng(rng_seed)
    cols = rng.choice(n_t, size=n_slots, replace=False)
    k = np.arange(n_t)
    return np.exp(-2j * np.pi * np.outer(k, cols) / n_t) / np.sqrt(n_t)


def gaussian_sensing_matrix(n_t: int, n_slots: int, rng_seed: int = 0) -> np.ndarray:
    """i.i.d. complex Gaussian beams, columns normalized to unit norm."""
    rng = np.random.default_rng(rng_seed)
    F = (rng.standard_normal((n_t, n_slots)) + 1j * rng.standard_normal((n_t, n_slots)))
    return F / np.linalg.norm(F, axis=0, keepdims=True)


def _arc_contains(lo: float, hi: float, x: float) -> bool:
    # is x + 2 pi k in [lo, hi] for some integer k
    k = math.ceil((lo - x) / TWO_PI)
    return lo <= x + TWO_PI * k <= hi


def angle_prior_to_interval(center_angle: float, width: float,
                            d_over_lambda: float = 0.5) -> FrequencyInterval:
    """Map an angular prior arc to the band of normalized spatial frequencies.

    Returns [min, max] of d_over_lambda * sin(angle) over the arc
    [center - width/2, center + width/2], clamped to [-1/2, 1/2]. The sine
    extrema at +-pi/2 are handled when they fall inside the arc.
    """
    if width <= 0:
        raise SignalModelError(f"prior width must be positive, got {width}")
    if width > TWO_PI:
        raise SignalModelError(f"prior width must be at most 2*pi, got {width}")
    lo_a = center_angle - width / 2
    hi_a = center_angle + width / 2
    values = [math.sin(lo_a), math.sin(hi_a)]
    if _arc_contains(lo_a, hi_a, math.pi / 2):
        values.append(1.0)
    if _arc_contains(lo_a, hi_a, -math.pi / 2):
        values.append(-1.0)
    f_lo = max(-0.5, min(0.5, d_over_lambda * min(values)))
    f_hi = max(-0.5, min(0.5, d_over_lambda * max(values)))
    if f_lo >= f_hi:
        raise SignalModelError(
            f"prior arc maps to a degenerate frequency band ({f_lo}, {f_hi})"
        )
    return FrequencyInterval(f_lo, f_hi)


@dataclass(frozen=True, eq=False)
class PriorScenario:
    """One benchmark draw: prior center angles, the band the truth was drawn in,
    and the channel itself.

    Wider priors sharing the same center map to supersets of draw-width band,
    so every configured prior width is valid for this channel.
    """

    tx_center_angle: float
    rx_center_angle: float | None
    draw_width: float
    tx_draw_interval: FrequencyInterval
    rx_draw_interval: FrequencyInterval | None
    paths: PathSet
    H: np.ndarray = field(repr=False)

    def tx_interval(self, width: float) -> FrequencyInterval:
        return angle_prior_to_interval(self.tx_center_angle, width)

    def rx_interval(self, width: float) -> FrequencyInterval | None:
        if self.rx_center_angle is None:
            return None
        return angle_prior_to_interval(self.rx_center_angle, width)


def _draw_axis(rng, width: float, n_paths: int, min_sep: float, center_mode: str):
    """Pick a prior center whose mapped band can hold n_paths separated paths,
    then draw the path frequencies inside it.

    The center's frequency image is drawn uniformly on (-1/2, 1/2) (the
    benchmark's path-frequency distribution) and converted to an angle, so
    endfire-heavy geometries and their narrow sine-mapped bands occur with
    the correct probability. Infeasible draws (band too narrow for the
    separation constraint) are rejected and redrawn.
    """
    for _ in range(_MAX_CENTER_ATTEMPTS):
        f0 = rng.uniform(-0.5, 0.5)
        center = math.asin(2.0 * f0)
        interval = angle_prior_to_interval(center, width)
        if interval.width <= 3.0 * n_paths * min_sep + 1e-9:
            continue
        freqs: list[float] = []
        if center_mode == "strongest":
            if not interval.contains(f0, margin=min_sep):
                continue
            freqs.append(f0)
        try:
            while len(freqs) < n_paths:
                freqs.append(_draw_separated(rng, interval, freqs, min_sep))
        except SignalModelError:
            continue
        return center, interval, freqs
    raise SignalModelError(
        f"no feasible prior center found for width {width} rad, "
        f"{n_paths} paths, min separation {min_sep}"
    )


def generate_prior_scenario(n_t: int, n_r: int, gain_vars, draw_width: float,
                            min_sep_tx: float = 0.0, min_sep_rx: float = 0.0,
                            rng_seed: int = 0,
                            center_mode: str = "strongest") -> PriorScenario:
    """Draw prior centers and a channel whose frequencies lie inside the mapped bands.

    The strongest path (largest gain variance) sits at the prior center's image
    when center_mode="strongest"; "uniform" draws all paths uniformly in-band.
    draw_width is the angular prior width (radians) used to bound the truth;
    evaluating the estimator at any width >= draw_width keeps the prior valid.
    """
    if center_mode not in ("strongest", "uniform"):
        raise SignalModelError(f"unknown center_mode {center_mode!r}")
    rng = np.random.default_rng(rng_seed)
    gain_vars = np.atleast_1d(np.asarray(gain_vars, dtype=float))
    n_paths = len(gain_vars)

    tx_center, tx_interval, tx_freqs = _draw_axis(rng, draw_width, n_paths,
                                                  min_sep_tx, center_mode)
    if n_r > 1:
        rx_center, rx_interval, rx_freqs = _draw_axis(rng, draw_width, n_paths,
                                                      min_sep_rx, center_mode)
    else:
        rx_center, rx_interval, rx_freqs = None, None, [0.0] * n_paths

    # in "strongest" mode the first drawn frequency belongs to the max-variance path
    order = np.argsort(-gain_vars) if center_mode == "strongest" else np.arange(n_paths)
    tx_arr = np.empty(n_paths)
    rx_arr = np.empty(n_paths)
    tx_arr[order] = tx_freqs
    rx_arr[order] = rx_freqs

    gains = np.sqrt(gain_vars / 2) * (rng.standard_normal(n_paths)
                                      + 1j * rng.standard_normal(n_paths))
    paths = PathSet(gains, tx_arr, rx_arr, min_sep_tx=min_sep_tx,
                    min_sep_rx=min_sep_rx if n_r > 1 else 0.0)
    return PriorScenario(
        tx_center_angle=tx_center, rx_center_angle=rx_center,
        draw_width=draw_width, tx_draw_interval=tx_interval,
        rx_draw_interval=rx_interval, paths=paths,
        H=channel_matrix(paths, n_t, n_r),
    )
