"""Trajectory-set data model, validation, and scenario file I/O.

A scenario holds two sets of trajectories (ground truth and estimates) on a
common time grid 1..T.  A trajectory is alive at a time step when it has a
state there; gaps (missing steps) mean the trajectory does not exist at that
step.  Indices into all cost matrices follow the order of the trajectory
lists, so the file order is semantically meaningful.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


class ScenarioFormatError(ValueError):
    """Raised when a scenario file cannot be parsed."""


class ScenarioValidationError(ValueError):
    """Raised when a parsed scenario violates model invariants."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid scenario:\n" + "\n".join(self.violations))


@dataclass(eq=False)
class Trajectory:
    """One labelled track: a map from time step (1-based) to a state vector.

    Steps absent from ``points`` (or mapped to None) mean the track is not
    alive at that step.
    """

    id: str
    points: dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        for t, state in self.points.items():
            if state is None:
                continue
            cleaned[int(t)] = np.asarray(state, dtype=float)
        self.points = cleaned

    def state_at(self, t: int) -> np.ndarray | None:
        return self.points.get(t)

    def alive_steps(self) -> list[int]:
        return sorted(self.points)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        if self.id != other.id or set(self.points) != set(other.points):
            return False
        return all(np.array_equal(self.points[t], other.points[t]) for t in self.points)


@dataclass(eq=False)
class Scenario:
    """Ground-truth and estimated trajectory sets over T time steps."""

    T: int
    state_dim: int
    ground_truth: list[Trajectory] = field(default_factory=list)
    estimates: list[Trajectory] = field(default_factory=list)

    @property
    def num_truths(self) -> int:
        return len(self.ground_truth)

    @property
    def num_estimates(self) -> int:
        return len(self.estimates)

    def swapped(self) -> "Scenario":
        """The same scenario with the roles of the two sets exchanged."""
        return Scenario(self.T, self.state_dim, list(self.estimates), list(self.ground_truth))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.T == other.T
            and self.state_dim == other.state_dim
            and self.ground_truth == other.ground_truth
            and self.estimates == other.estimates
        )


@dataclass(frozen=True)
class Config:
    """Metric and solver parameters.

    p, c, gamma define the metric; eta scales the regularization strength
    relative to the largest cost; tol is the relative step size below which
    the iterative solver stops; max_iter bounds the number of sweeps.
    """

    p: float = 1.0
    c: float = 0.25
    gamma: float = 1.0
    eta: float = 1e-4
    tol: float = 1e-3
    max_iter: int = 10000
    seed: int = 0

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        for name in ("c", "gamma", "eta", "tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")

    @classmethod
    def high_accuracy(cls, **overrides) -> "Config":
        """Preset with a much smaller regularization and stopping threshold."""
        kw = dict(eta=1e-5, tol=1.5e-6)
        kw.update(overrides)
        return cls(**kw)


def validate_scenario(scenario: Scenario) -> list[str]:
    """Check all model invariants; returns one message per violation.

    An empty list means the scenario is valid.  Violations are data, not
    exceptions: callers that require validity raise ScenarioValidationError
    themselves.
    """
    violations = []
    if scenario.T < 1:
        violations.append(f"T must be a positive integer, got {scenario.T}")
    if scenario.state_dim < 1:
        violations.append(f"state_dim must be a positive integer, got {scenario.state_dim}")

    for kind, trajectories in (
        ("ground_truth", scenario.ground_truth),
        ("estimates", scenario.estimates),
    ):
        for traj in trajectories:
            for t in sorted(traj.points):
                state = traj.points[t]
                where = f"{kind} trajectory {traj.id!r}, step {t}"
                if not 1 <= t <= scenario.T:
                    violations.append(f"{where}: step outside 1..{scenario.T}")
                if state.ndim != 1 or state.shape[0] != scenario.state_dim:
                    violations.append(
                        f"{where}: state has shape {state.shape}, "
                        f"expected ({scenario.state_dim},)"
                    )
                elif not np.all(np.isfinite(state)):
                    violations.append(f"{where}: state has non-finite entries")
    return violations


def _trajectory_to_json(traj: Trajectory) -> dict:
    return {
        "id": traj.id,
        "points": [[t, [float(x) for x in traj.points[t]]] for t in sorted(traj.points)],
    }


def _trajectory_from_json(obj: dict, index: int, kind: str) -> Trajectory:
    where = f"{kind}[{index}]"
    if not isinstance(obj, dict):
        raise ScenarioFormatError(f"{where}: expected an object")
    for fld in ("id", "points"):
        if fld not in obj:
            raise ScenarioFormatError(f"{where}: missing field {fld!r}")
    points = {}
    for k, entry in enumerate(obj["points"]):
        if not (isinstance(entry, list) and len(entry) == 2):
            raise ScenarioFormatError(f"{where}.points[{k}]: expected a [t, coordinates] pair")
        t, coords = entry
        if not isinstance(t, int):
            raise ScenarioFormatError(f"{where}.points[{k}]: time step must be an integer")
        if t in points:
            raise ScenarioFormatError(f"{where}.points[{k}]: duplicate time step {t}")
        points[t] = np.asarray(coords, dtype=float)
    return Trajectory(id=str(obj["id"]), points=points)


def save_scenario(scenario: Scenario, path) -> None:
    """Write a scenario as JSON; floats keep full round-trip precision."""
    doc = {
        "T": scenario.T,
        "state_dim": scenario.state_dim,
        "ground_truth": [_trajectory_to_json(tr) for tr in scenario.ground_truth],
        "estimates": [_trajectory_to_json(tr) for tr in scenario.estimates],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario file written by save_scenario."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioFormatError(
                f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
    if not isinstance(doc, dict):
        raise ScenarioFormatError(f"{path}: top-level value must be an object")
    for fld in ("T", "state_dim", "ground_truth", "estimates"):
        if fld not in doc:
            raise ScenarioFormatError(f"{path}: missing field {fld!r}")
    if not isinstance(doc["T"], int) or not isinstance(doc["state_dim"], int):
        raise ScenarioFormatError(f"{path}: fields 'T' and 'state_dim' must be integers")

    scenario = Scenario(
        T=doc["T"],
        state_dim=doc["state_dim"],
        ground_truth=[
            _trajectory_from_json(o, i, "ground_truth") for i, o in enumerate(doc["ground_truth"])
        ],
        estimates=[_trajectory_from_json(o, i, "estimates") for i, o in enumerate(doc["estimates"])],
    )
    violations = validate_scenario(scenario)
    if violations:
        raise ScenarioValidationError(violations)
    return scenario


def alive_counts(trajectories: list[Trajectory], T: int) -> np.ndarray:
    """Number of alive tracks at each step t = 1..T (index 0 is t=1)."""
    counts = np.zeros(T, dtype=int)
    for traj in trajectories:
        for t in traj.points:
            if 1 <= t <= T:
                counts[t - 1] += 1
    return counts
