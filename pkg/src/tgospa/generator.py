"""Seeded synthetic scenario generation.

Produces ground-truth/estimate trajectory pairs with births, deaths,
localization noise, missed detections, false tracks, and identity switches.
The construction is deliberately simple and fully documented here:

* States are 2-D positions in [0, n_max]^2.  Initial positions are drawn on
  the integer grid {0..n_max}^2, so n_max bounds the position domain.  The
  cut-off distance of the metric is typically far smaller than the track
  separation, so assignment ambiguity comes from track crossings, detection
  gaps, and identity switches rather than from global clutter.
* Each track moves with a constant nominal velocity whose speed is scaled by
  r (r = 1 crosses about one domain length over T steps), plus per-step
  Gaussian process noise of standard deviation sigma.  Positions are clipped
  to the domain.
* Each track is alive on one contiguous interval: birth in the first
  quarter of the time grid, death in the last quarter.
* The first m_t ground-truth tracks are observed: an estimate point exists
  independently with probability q per alive step and equals the truth plus
  N(0, sigma^2 I) noise.  The remaining m_f truths have no estimate
  counterpart; n_f additional estimates are false tracks with their own
  motion.
* n_ts candidate switch events each pick a time step and two estimates and,
  with probability c_s, exchange the two estimates' suffixes from that step
  on.

Randomness comes from PCG64 streams split per trajectory (and one stream for
switch events) via seed sequences, so adding trajectories never perturbs the
ones already generated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import Scenario, Trajectory


@dataclass(frozen=True)
class GenParams:
    """Generator knobs; counts of tracked/missed/false tracks, detection and
    switch probabilities, grid bound, and noise level."""

    m_t: int = 14
    m_f: int = 2
    n_f: int = 1
    T: int = 20
    r: float = 1.0
    q: float = 0.9
    c_s: float = 0.25
    n_ts: int = 20
    n_max: int = 100_000
    sigma: float = 0.01
    seed: int = 0

    def __post_init__(self):
        for name in ("m_t", "m_f", "n_f", "n_ts"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if not 0 < self.q <= 1:
            raise ValueError(f"q must be in (0, 1], got {self.q}")
        if not 0 <= self.c_s <= 1:
            raise ValueError(f"c_s must be in [0, 1], got {self.c_s}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


def _stream(seed: int, kind: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(kind, index))))


_KIND_TRUTH = 0
_KIND_FALSE = 1
_KIND_SWITCH = 2
_KIND_OBSERVE = 3


def _simulate_track(rng: np.random.Generator, params: GenParams) -> dict[int, np.ndarray]:
    T = params.T
    span = max(1, T // 4)
    birth = int(rng.integers(1, span + 1))
    death = int(rng.integers(T - span + 1, T + 1))
    pos = rng.integers(0, params.n_max + 1, size=2).astype(float)
    angle = rng.uniform(0.0, 2.0 * math.pi)
    speed = params.r * rng.uniform(0.5, 1.5) * params.n_max / T
    velocity = speed * np.array([math.cos(angle), math.sin(angle)])
    points = {}
    for t in range(birth, death + 1):
        noise = rng.normal(0.0, params.sigma, size=2)
        points[t] = np.clip(pos, 0.0, float(params.n_max))
        pos = pos + velocity + noise
    return points


def generate_scenario(params: GenParams) -> Scenario:
    """Deterministic scenario for the given parameters (including seed)."""
    truths = []
    for i in range(params.m_t + params.m_f):
        rng = _stream(params.seed, _KIND_TRUTH, i)
        truths.append(Trajectory(id=f"gt{i:03d}", points=_simulate_track(rng, params)))

    estimates = []
    for i in range(params.m_t):
        rng = _stream(params.seed, _KIND_OBSERVE, i)
        points = {}
        for t, state in sorted(truths[i].points.items()):
            detected = rng.uniform() < params.q
            noise = rng.normal(0.0, params.sigma, size=2)
            if detected:
                points[t] = np.clip(state + noise, 0.0, float(params.n_max))
        estimates.append(Trajectory(id=f"est{i:03d}", points=points))
    for i in range(params.n_f):
        rng = _stream(params.seed, _KIND_FALSE, i)
        estimates.append(
            Trajectory(id=f"est{params.m_t + i:03d}", points=_simulate_track(rng, params))
        )

    n = len(estimates)
    if params.T >= 2 and n >= 2:
        rng = _stream(params.seed, _KIND_SWITCH, 0)
        for _ in range(params.n_ts):
            t_event = int(rng.integers(2, params.T + 1))
            a, b = (int(x) for x in rng.integers(0, n, size=2))
            fires = rng.uniform() < params.c_s
            if not fires or a == b:
                continue
            pa, pb = estimates[a].points, estimates[b].points
            for t in range(t_event, params.T + 1):
                va, vb = pa.pop(t, None), pb.pop(t, None)
                if vb is not None:
                    pa[t] = vb
                if va is not None:
                    pb[t] = va

    return Scenario(T=params.T, state_dim=2, ground_truth=truths, estimates=estimates)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def sweep_params(base: GenParams, axis: str, values: list[int]) -> list[GenParams]:
    """Parameter sets for a size sweep along one axis.

    axis="targets" fixes T = 100 and couples the other counts to the total
    number of ground-truth tracks m: m_f = round(0.1 m), m_t = m - m_f,
    n_f = m_f, n_ts = m, n_max = 100 m.  axis="time_steps" fixes m = 100
    (with the same coupling) and sweeps T.
    """
    out = []
    for value in values:
        if value < 1:
            raise ValueError(f"sweep values must be positive, got {value}")
        if axis == "targets":
            m, T = int(value), 100
        elif axis == "time_steps":
            m, T = 100, int(value)
        else:
            raise ValueError(f"axis must be 'targets' or 'time_steps', got {axis!r}")
        m_f = _round_half_up(0.1 * m)
        out.append(
            replace(
                base,
                m_t=m - m_f,
                m_f=m_f,
                n_f=m_f,
                T=T,
                n_ts=m,
                n_max=100 * m,
            )
        )
    return out


def derive_seed(*parts: int) -> int:
    """Stable scenario seed from a tuple of integers (base seed, size, rep)."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint64)[0])
