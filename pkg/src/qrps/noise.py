"""Physical noise models and pulse-level simulation of the diffusion step.

The noise model covers four experimentally motivated channels: a relative
detuning of the RF drive (tilting every rotation axis and causing a static
Z drift on idle qubits), exponential dephasing per diffusion step, a
per-qubit detection confusion matrix, and a preparation jitter on the
flagged weight.

A pulse schedule lays out the diffusion step on a timeline: sequential RF
pulses for the single-qubit rotations (Z rotations expanded into their
three-pulse realizations) and a ZZ-coupling window protected by trains of
pi pulses applied simultaneously on both qubits.  Simulation applies each
pulse as its integrated unitary at the pulse center; the ZZ coupling stays
active throughout the window (simultaneous ideal pi pairs commute with it),
while the detuning drift acts over all time not covered by a qubit's own
pulses.  At gate fidelity pulses are treated as zero-width; at pulse
fidelity their angle/rabi durations displace the drift accordingly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuits import StationaryDistribution, rz_pulse_identity, u_zz
from .deliberation import optimal_k
from .qsim import QuantumState, apply, probabilities, sample_outcomes, zero_state

TWO_PI = 2.0 * math.pi

# Calibration of the trapped-ion setup the model reproduces: Rabi frequency
# 20.92 kHz, conditional-evolution time 4.24 ms, J coupling 59 Hz, ten sets
# of 14 decoupling pulses per window.
DEFAULT_RABI = TWO_PI * 20.92e3
DEFAULT_TAU = 4.24e-3
DEFAULT_COUPLING = TWO_PI * 59.0
DEFAULT_DD_SETS = 10

ZZ_TARGET_ANGLE = math.pi / 2
ZZ_CONSISTENCY_RTOL = 1e-3


@dataclass(frozen=True)
class NoiseModel:
    """Detuning, dephasing, detection, and preparation-jitter parameters."""

    detuning_ratio: float = 0.0
    dephasing_exponent: float = 0.0
    detect_bright_as_dark: float = 0.0
    detect_dark_as_bright: float = 0.0
    prep_epsilon_jitter: float = 0.0

    def __post_init__(self):
        if abs(self.detuning_ratio) >= 1.0:
            raise ValueError("detuning ratio must satisfy |delta| < 1")
        if self.dephasing_exponent < 0.0:
            raise ValueError("dephasing exponent must be nonnegative")
        for name in ("detect_bright_as_dark", "detect_dark_as_bright"):
            p = getattr(self, name)
            if not 0.0 <= p < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.prep_epsilon_jitter < 0.0:
            raise ValueError("preparation jitter must be nonnegative")

    @property
    def is_zero(self) -> bool:
        return self == NOISELESS


NOISELESS = NoiseModel()


@dataclass(frozen=True)
class PulseSettings:
    """Drive and coupling calibration used when compiling schedules."""

    rabi: float = DEFAULT_RABI
    tau: float = DEFAULT_TAU
    coupling: float = DEFAULT_COUPLING
    dd_sets: int = DEFAULT_DD_SETS

    def __post_init__(self):
        if self.rabi <= 0.0 or self.tau <= 0.0 or self.coupling <= 0.0:
            raise ValueError("rabi, tau and coupling must be positive")
        if self.dd_sets < 0:
            raise ValueError("dd_sets must be nonnegative")


DEFAULT_SETTINGS = PulseSettings()


def detuned_rotation(theta: float, phi: float, delta: float) -> np.ndarray:
    """Rotation with the drive axis tilted by a relative detuning.

    Returns exp[i(theta/2)((X cos(phi) - Y sin(phi)) + delta Z)]; the pulse
    duration stays fixed by the nominal theta, so the effective rotation
    angle grows by sqrt(1 + delta^2).
    """
    g = math.sqrt(1.0 + delta * delta)
    half = 0.5 * theta * g
    e = np.exp(1j * phi)
    axis = np.array([[delta, e], [e.conjugate(), -delta]]) / g
    return math.cos(half) * np.eye(2) + 1j * math.sin(half) * axis


def dephasing_channel(state: QuantumState, gamma_tau: float, qubit: int) -> QuantumState:
    """Phase damping on one qubit: its Z-basis coherences shrink by e^{-gamma_tau}."""
    if not state.is_density:
        raise ValueError("dephasing requires the density representation")
    if gamma_tau < 0.0:
        raise ValueError("gamma_tau must be nonnegative")
    if not 1 <= qubit <= state.n_qubits:
        raise ValueError(f"qubit {qubit} out of range")
    n = state.n_qubits
    shift = n - qubit
    bits = (np.arange(state.dim) >> shift) & 1
    factor = np.where(bits[:, None] == bits[None, :], 1.0, math.exp(-gamma_tau))
    return QuantumState(n, state.data * factor)


def collective_dephasing(state: QuantumState, gamma_tau: float) -> QuantumState:
    """Correlated variant: every coherence of the register shrinks by e^{-gamma_tau}.

    Models both qubits seeing the same fluctuating field, with gamma_tau the
    measured contrast decay of the register over one diffusion step.
    """
    if not state.is_density:
        raise ValueError("dephasing requires the density representation")
    if gamma_tau < 0.0:
        raise ValueError("gamma_tau must be nonnegative")
    lam = math.exp(-gamma_tau)
    rho = state.data * lam + np.diag(np.diag(state.data)) * (1.0 - lam)
    return QuantumState(state.n_qubits, rho)


def confusion_matrix(d_bright: float, d_dark: float) -> np.ndarray:
    """Single-qubit readout map; columns are true dark/bright, rows read dark/bright."""
    return np.array([[1.0 - d_dark, d_bright], [d_dark, 1.0 - d_bright]])


def detection_confusion(dist: np.ndarray, d_bright: float, d_dark: float) -> np.ndarray:
    """Apply the per-qubit confusion matrix independently to each qubit."""
    dist = np.asarray(dist, dtype=float)
    n = int(round(math.log2(dist.size)))
    m = confusion_matrix(d_bright, d_dark)
    full = m
    for _ in range(n - 1):
        full = np.kron(full, m)
    return full @ dist


def ur14_phases() -> tuple[float, ...]:
    """The 14 error-cancelling pulse phases; the list is its own reverse."""
    s = math.pi / 7.0
    return (0.0, 6 * s, 4 * s, 8 * s, 4 * s, 6 * s, 0.0, 0.0, 6 * s, 4 * s, 8 * s, 4 * s, 6 * s, 0.0)


@dataclass(frozen=True)
class RFPulse:
    """One timed RF pulse; the stored angle is nonnegative."""

    qubit: int
    angle: float
    phase: float
    start: float
    duration: float

    @property
    def center(self) -> float:
        return self.start + 0.5 * self.duration

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass(frozen=True)
class ZZSegment:
    """Interval of active ZZ coupling with angular strength ``coupling``."""

    start: float
    duration: float
    coupling: float

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass(frozen=True)
class PulseSchedule:
    """Timed pulse and coupling events realizing one circuit fragment."""

    pulses: tuple[RFPulse, ...]
    segments: tuple[ZZSegment, ...]
    total_zz_angle: float
    rabi: float
    t_end: float

    def __post_init__(self):
        acc = sum(s.coupling * s.duration for s in self.segments)
        if abs(acc - self.total_zz_angle) > 1e-9:
            raise ValueError("segment couplings do not integrate to the stated ZZ angle")
        for q in (1, 2):
            spans = sorted((p.start, p.end) for p in self.pulses if p.qubit == q)
            for (a0, a1), (b0, _) in zip(spans, spans[1:]):
                if b0 < a1 - 1e-15:
                    raise ValueError(f"overlapping pulses on qubit {q}")

    def window_pulse_count(self, qubit: int) -> int:
        """Pulses on ``qubit`` that fall inside a coupling segment."""
        return sum(
            1
            for p in self.pulses
            if p.qubit == qubit
            and any(s.start - 1e-15 <= p.center <= s.end + 1e-15 for s in self.segments)
        )


def _normalized(angle: float, phase: float) -> tuple[float, float]:
    # A negative rotation angle is realized as a positive pulse with the
    # opposite drive phase; the detuning tilt must not flip with it.
    if angle < 0.0:
        angle, phase = -angle, phase + math.pi
    return angle, phase % TWO_PI


class _ScheduleBuilder:
    def __init__(self, rabi: float):
        self.rabi = rabi
        self.t = 0.0
        self.pulses: list[RFPulse] = []
        self.segments: list[ZZSegment] = []
        self.total_zz = 0.0

    def pulse(self, qubit: int, angle: float, phase: float):
        angle, phase = _normalized(angle, phase)
        if angle < 1e-15:
            return
        duration = angle / self.rabi
        self.pulses.append(RFPulse(qubit, angle, phase, self.t, duration))
        self.t += duration

    def pair(self, angle1: float, phase1: float, angle2: float, phase2: float):
        # Equal-duration pulses on the two qubits start together on both
        # drive tones; the cursor advances by the longer of the pair.
        t0 = self.t
        for qubit, (angle, phase) in ((1, (angle1, phase1)), (2, (angle2, phase2))):
            angle, phase = _normalized(angle, phase)
            if angle < 1e-15:
                continue
            duration = angle / self.rabi
            self.pulses.append(RFPulse(qubit, angle, phase, t0, duration))
            self.t = max(self.t, t0 + duration)

    def rz_pair(self, sign1: int, sign2: int):
        # Rightmost factor of each three-pulse identity fires first; the
        # blocks have matching pulse durations and run concurrently.
        for (a1, p1), (a2, p2) in zip(
            reversed(rz_pulse_identity(sign1)), reversed(rz_pulse_identity(sign2))
        ):
            self.pair(a1, p1, a2, p2)

    def zz_window(self, tau: float, coupling: float, dd_sets: int, cycle: tuple[float, ...]):
        if abs(coupling * tau / ZZ_TARGET_ANGLE - 1.0) > ZZ_CONSISTENCY_RTOL:
            raise ValueError(
                f"coupling*tau = {coupling * tau:.6f} inconsistent with target {ZZ_TARGET_ANGLE:.6f}"
            )
        start = self.t
        # Calibrated so the segment integrates to the target angle exactly.
        self.segments.append(ZZSegment(start, tau, ZZ_TARGET_ANGLE / tau))
        self.total_zz += ZZ_TARGET_ANGLE
        count = dd_sets * len(cycle)
        if count:
            spacing = tau / count
            duration = math.pi / self.rabi
            if duration > spacing:
                raise ValueError("pi pulses do not fit the decoupling spacing")
            for i in range(count):
                center = start + (i + 0.5) * spacing
                phase = cycle[i % len(cycle)]
                for qubit in (1, 2):
                    self.pulses.append(RFPulse(qubit, math.pi, phase, center - 0.5 * duration, duration))
        self.t += tau

    def build(self) -> PulseSchedule:
        return PulseSchedule(tuple(self.pulses), tuple(self.segments), self.total_zz, self.rabi, self.t)


def compile_diffusion_schedule(
    angles,
    rabi: float = DEFAULT_RABI,
    tau: float = DEFAULT_TAU,
    coupling: float = DEFAULT_COUPLING,
    dd_sets: int = DEFAULT_DD_SETS,
    dd_cycle: tuple[float, ...] | None = None,
    rz_placement: str = "after_window",
) -> PulseSchedule:
    """Expand one diffusion step into timed RF pulses and a ZZ window.

    The single-qubit factors fire in circuit order (rightmost first) and the
    Z rotations are replaced by their three-pulse identities.  Blocks with
    matching pulse durations on the two qubits (the Z-rotation identities,
    like the decoupling pulses) play concurrently on both drive tones; the
    unequal-duration amplitude pulses run sequentially.  The ZZ window
    carries ``dd_sets`` repetitions of the 14-pulse phase cycle on both
    qubits at equidistant interior times with half-spacing end margins.

    The Z-rotation blocks commute with the coupling window, so the step can
    equivalently be laid out with them after the window (default) or before
    it (``rz_placement="before_window"``); repeated steps alternate the two
    arrangements, supercycle-style, which echoes out the leading coherent
    error the blocks pick up under a detuned drive.
    """
    if rz_placement not in ("after_window", "before_window"):
        raise ValueError(f"unknown rz placement {rz_placement!r}")
    b = _ScheduleBuilder(rabi)
    hp = math.pi / 2
    b.pulse(1, angles.theta1, hp)
    b.pulse(2, -angles.theta2, hp)
    if rz_placement == "before_window":
        b.rz_pair(+1, -1)
        b.zz_window(tau, coupling, dd_sets, dd_cycle or ur14_phases())
    else:
        b.zz_window(tau, coupling, dd_sets, dd_cycle or ur14_phases())
        b.rz_pair(+1, -1)
    b.pulse(1, angles.theta1, hp)
    b.pulse(2, angles.theta2, hp)
    return b.build()


def compile_preparation_schedule(angles, rabi: float = DEFAULT_RABI) -> PulseSchedule:
    """Two-pulse schedule preparing the stationary state from |00>."""
    b = _ScheduleBuilder(rabi)
    b.pulse(2, angles.theta2, math.pi / 2)
    b.pulse(1, angles.theta1, math.pi / 2)
    return b.build()


def zz_window_schedule(
    settings: PulseSettings = DEFAULT_SETTINGS, scheme: str = "ur14"
) -> PulseSchedule:
    """The protected (or bare) coupling window alone, for fidelity studies."""
    cycles = {"ur14": ur14_phases(), "cpmg": (0.0,) * 14, "none": ur14_phases()}
    if scheme not in cycles:
        raise ValueError(f"unknown scheme {scheme!r}")
    b = _ScheduleBuilder(settings.rabi)
    dd_sets = 0 if scheme == "none" else settings.dd_sets
    b.zz_window(settings.tau, settings.coupling, dd_sets, cycles[scheme])
    return b.build()


def _embed2(u: np.ndarray, qubit: int) -> np.ndarray:
    return np.kron(u, np.eye(2)) if qubit == 1 else np.kron(np.eye(2), u)


def _overlap(a: float, b: float, lo: float, hi: float) -> float:
    return max(0.0, min(b, hi) - max(a, lo))


def _background_unitary(
    schedule: PulseSchedule, delta: float, a: float, b: float, pulse_widths: bool
) -> np.ndarray | None:
    """Diagonal free evolution over (a, b): ZZ coupling plus detuning drift.

    The drift on a qubit pauses while one of its own pulses plays (that part
    of the drift lives inside the pulse's tilted axis); the ZZ coupling never
    pauses.  With zero-width pulses the drift covers the whole interval.
    """
    if b - a <= 0.0:
        return None
    zz = sum(0.5 * s.coupling * _overlap(a, b, s.start, s.end) for s in schedule.segments)
    drift = [b - a, b - a]
    if pulse_widths:
        for p in schedule.pulses:
            drift[p.qubit - 1] -= _overlap(a, b, p.start, p.end)
    d1 = 0.5 * delta * schedule.rabi * drift[0]
    d2 = 0.5 * delta * schedule.rabi * drift[1]
    if zz == 0.0 and d1 == 0.0 and d2 == 0.0:
        return None
    # Basis order |00>,|01>,|10>,|11>; Z eigenvalue +1 for bit 0.
    return np.diag(
        [
            np.exp(1j * (zz + d1 + d2)),
            np.exp(1j * (-zz + d1 - d2)),
            np.exp(1j * (-zz - d1 + d2)),
            np.exp(1j * (zz - d1 - d2)),
        ]
    )


def schedule_unitary(
    schedule: PulseSchedule, noise: NoiseModel, fidelity: str = "pulse"
) -> np.ndarray:
    """Compose the schedule into a single two-qubit unitary.

    Pulses act as integrated detuned rotations at their center times;
    between kicks the diagonal background (ZZ coupling and detuning drift)
    accumulates.  ``fidelity`` selects zero-width ("gate") or finite-width
    ("pulse") drift bookkeeping.
    """
    if fidelity not in ("pulse", "gate"):
        raise ValueError(f"unknown fidelity level {fidelity!r}")
    widths = fidelity == "pulse"
    delta = noise.detuning_ratio
    kicks: dict[float, list[RFPulse]] = {}
    for p in schedule.pulses:
        kicks.setdefault(p.center, []).append(p)
    u = np.eye(4, dtype=complex)
    t_prev = 0.0
    for t in sorted(kicks):
        bg = _background_unitary(schedule, delta, t_prev, t, widths)
        if bg is not None:
            u = bg @ u
        for p in kicks[t]:
            u = _embed2(detuned_rotation(p.angle, p.phase, delta), p.qubit) @ u
        t_prev = t
    bg = _background_unitary(schedule, delta, t_prev, schedule.t_end, widths)
    if bg is not None:
        u = bg @ u
    return u


def simulate_schedule(
    schedule: PulseSchedule,
    noise: NoiseModel,
    state: QuantumState,
    fidelity: str = "pulse",
) -> QuantumState:
    """Evolve a state through one scheduled diffusion step under the noise model.

    Dephasing acts once per step, after the timed evolution, as the
    correlated register-level channel (both qubits see the same fluctuating
    field; the exponent is the measured contrast decay per step).  A nonzero
    dephasing exponent therefore requires a density operator.
    """
    if noise.dephasing_exponent > 0.0 and not state.is_density:
        raise ValueError("dephasing requires the density representation")
    state = apply(state, schedule_unitary(schedule, noise, fidelity))
    if noise.dephasing_exponent > 0.0:
        state = collective_dephasing(state, noise.dephasing_exponent)
    return state


def window_infidelity(
    delta: float,
    settings: PulseSettings = DEFAULT_SETTINGS,
    scheme: str = "ur14",
    fidelity: str = "pulse",
) -> float:
    """Infidelity of the (possibly protected) ZZ window against the ideal gate."""
    schedule = zz_window_schedule(settings, scheme)
    u = schedule_unitary(schedule, NoiseModel(detuning_ratio=delta), fidelity)
    target = u_zz(ZZ_TARGET_ANGLE)
    return 1.0 - abs(np.trace(target.conj().T @ u)) / 4.0


def noisy_distribution(
    epsilon: float,
    ratio: float = 1.0,
    noise: NoiseModel = NOISELESS,
    fidelity: str = "pulse",
    k: int | None = None,
    settings: PulseSettings = DEFAULT_SETTINGS,
    prepared_epsilon: float | None = None,
) -> np.ndarray:
    """Exact read-out distribution of the noisy algorithm.

    ``k`` defaults to the optimal count for the nominal epsilon;
    ``prepared_epsilon`` lets the caller inject a preparation offset while
    keeping that k choice.  Successive diffusion steps alternate the two
    commuting layouts of the Z-rotation blocks (supercycle symmetrization;
    see ``compile_diffusion_schedule``).
    """
    if k is None:
        k = optimal_k(epsilon)
    eps_prep = epsilon if prepared_epsilon is None else prepared_epsilon
    dist = StationaryDistribution.from_epsilon_ratio(eps_prep, ratio)
    angles = dist.angles()
    state = zero_state(2, mode="density")
    prep = compile_preparation_schedule(angles, settings.rabi)
    state = apply(state, schedule_unitary(prep, noise, fidelity))
    steps = [
        compile_diffusion_schedule(
            angles, settings.rabi, settings.tau, settings.coupling, settings.dd_sets,
            rz_placement=placement,
        )
        for placement in ("after_window", "before_window")
    ]
    for j in range(k):
        state = simulate_schedule(steps[j % 2], noise, state, fidelity)
    p = probabilities(state)
    return detection_confusion(p, noise.detect_bright_as_dark, noise.detect_dark_as_bright)


@dataclass(frozen=True)
class RunResult:
    """One experiment configuration: shot counts and derived quantities."""

    k: int
    epsilon: float
    a00: float
    a01: float
    shots: int
    counts: tuple[int, int, int, int]
    b00: float
    b01: float
    eps_tilde: float
    err_b00: float
    err_b01: float
    err_eps_tilde: float
    cost: float
    err_cost: float


def _binomial_err(p: float, shots: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / shots)


def result_from_counts(
    k: int, epsilon: float, a00: float, a01: float, counts: np.ndarray, shots: int
) -> RunResult:
    b = np.asarray(counts, dtype=float) / shots
    eps_tilde = b[0] + b[1]
    if eps_tilde <= 0.0:
        raise RuntimeError("no flagged outcomes observed; cost undefined")
    err_eps = _binomial_err(eps_tilde, shots)
    cost = (2 * k + 1) / eps_tilde
    return RunResult(
        k=k,
        epsilon=epsilon,
        a00=a00,
        a01=a01,
        shots=shots,
        counts=tuple(int(c) for c in counts),
        b00=float(b[0]),
        b01=float(b[1]),
        eps_tilde=float(eps_tilde),
        err_b00=_binomial_err(b[0], shots),
        err_b01=_binomial_err(b[1], shots),
        err_eps_tilde=err_eps,
        cost=float(cost),
        err_cost=float((2 * k + 1) * err_eps / eps_tilde**2),
    )


def run_noisy(
    epsilon: float,
    ratio: float = 1.0,
    noise: NoiseModel = NOISELESS,
    fidelity: str = "pulse",
    k_override: int | None = None,
    shots: int = 1600,
    rng: np.random.Generator | None = None,
    settings: PulseSettings = DEFAULT_SETTINGS,
) -> RunResult:
    """Simulate one configuration of the noisy algorithm and sample shots.

    The diffusion count comes from the nominal epsilon (or ``k_override``);
    a preparation jitter, when enabled, shifts only the prepared state.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if rng is None:
        rng = np.random.default_rng()
    k = k_override if k_override is not None else optimal_k(epsilon)
    prepared = None
    if noise.prep_epsilon_jitter > 0.0:
        w = noise.prep_epsilon_jitter
        prepared = min(max(epsilon + rng.uniform(-w, w), 1e-12), 1.0)
    p = noisy_distribution(
        epsilon, ratio, noise, fidelity, k=k, settings=settings, prepared_epsilon=prepared
    )
    counts = sample_outcomes(p, shots, rng)
    a01 = epsilon / (1.0 + ratio)
    return result_from_counts(k, epsilon, epsilon - a01, a01, counts, shots)
