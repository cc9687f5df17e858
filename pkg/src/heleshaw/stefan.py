"""Linearized enthalpy time stepping for the quasi-static free boundary.

State variables on the M x M grid: the enthalpy z (z > 0 wet, u = max(z, 0)
the pressure), the relaxation weight mu = 1/(delta + [z > 0]), and a
monotone per-node activation mask.  One step solves

    lam*mu*u_new - tau*lap(u_new) = lam*mu*max(z, 0)  (+ tau*source)

with the multigrid kernel (a fixed number of V-cycles, warm-started from
the previous pressure), then updates z node-wise:

* activated nodes get the full update
  z += mu*(u_new - max(z, 0)) - (tau/lam)*d/dt(1/g_eps)(x, t_mid)*[z < 0];
* a dry node is activated the first time u_new exceeds a small multiple of
  the regularization delta, and its z is reset to -1/(lam*g_eps(x, t_now))
  at that moment (frozen before; direct numerical integration of the dry
  branch drifts over many oscillation periods, and the reset makes the
  pre-activation values irrelevant);
* all other nodes are left untouched.

The strip mode drives the front by a fixed boundary flux q1 < 0 and stops
at breakthrough, when the wet set first reaches the gate column nearest
L1; the torus mode is source-driven (fluid injected by a fixed
nonnegative source) with no distinguished boundary.
"""

from __future__ import annotations

import math
import struct
import time
from dataclasses import dataclass, field as dc_field, replace as dc_replace

import numpy as np

from .coeffs import CoefficientField, GridSampler
from .isolines import iso_polylines
from .multigrid import MultigridSolver

LAMBDA_DEFAULT = 1e-7
TAU_DIVISOR_DEFAULT = 8.0
LAYER_WIDTH_DEFAULT = 1.0
LAYER_RATIO_DEFAULT = 0.01
ACTIVATION_FACTOR_DEFAULT = 1e-3
TAU_SAFETY = 2.0


def make_delta(lam: float, h: float, tau: float,
               w: float = LAYER_WIDTH_DEFAULT,
               gamma: float = LAYER_RATIO_DEFAULT) -> float:
    """Regularization delta = (w/log(gamma))^2 * lam*h^2/tau.

    Sized so that all but a fraction gamma of the per-step energy deposit
    lands within w grid cells of the free boundary.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    if w <= 0:
        raise ValueError(f"w must be positive, got {w}")
    return (w / math.log(gamma)) ** 2 * lam * h * h / tau


@dataclass(frozen=True)
class RunParams:
    """Resolved solver parameters for one run (immutable)."""

    M: int
    lam: float
    tau: float
    delta: float
    q1: float
    L0: float = 0.1
    L1: float = 0.9
    w: float = LAYER_WIDTH_DEFAULT
    gamma_layer: float = LAYER_RATIO_DEFAULT
    cycles_per_step: int = 2
    activation_factor: float = ACTIVATION_FACTOR_DEFAULT
    max_steps: int = 10_000_000

    @property
    def h(self) -> float:
        return 1.0 / self.M

    @property
    def gate_index(self) -> int:
        return round(self.L1 * self.M)

    @classmethod
    def make(cls, M: int, gmax: float, q1: float, lam: float = LAMBDA_DEFAULT,
             tau: float | None = None, tau_divisor: float = TAU_DIVISOR_DEFAULT,
             gmin: float | None = None, **overrides) -> "RunParams":
        """Strip-mode factory.

        tau defaults to h/tau_divisor, lowered if necessary to satisfy the
        advance rule tau <= h/(2*Vmax) with Vmax = TAU_SAFETY*gmax*|q1|; an
        explicitly requested tau violating the rule is rejected.
        """
        if M < 4 or (M & (M - 1)) != 0:
            raise ValueError(f"M must be a power of two >= 4, got {M}")
        if q1 >= 0:
            raise ValueError(f"boundary flux q1 must be negative, got {q1}")
        if lam <= 0:
            raise ValueError(f"lam must be positive, got {lam}")
        h = 1.0 / M
        vmax = TAU_SAFETY * gmax * abs(q1)
        tau_limit = h / (2.0 * vmax)
        if tau is None:
            tau = min(h / tau_divisor, tau_limit)
        elif tau > tau_limit:
            raise ValueError(
                f"tau={tau:g} violates the advance rule tau <= h/(2*Vmax) = {tau_limit:g}"
            )
        L0 = overrides.get("L0", cls.L0)
        L1 = overrides.get("L1", cls.L1)
        if not 0.0 < L0 < L1 < 1.0:
            raise ValueError(f"need 0 < L0 < L1 < 1, got L0={L0}, L1={L1}")
        if "max_steps" not in overrides and gmin is not None and gmin > 0:
            span = 4.0 * (L1 - L0) / (gmin * abs(q1))
            overrides["max_steps"] = int(math.ceil(span / tau)) + 1000
        delta = make_delta(lam, h, tau,
                           overrides.get("w", LAYER_WIDTH_DEFAULT),
                           overrides.get("gamma_layer", LAYER_RATIO_DEFAULT))
        return cls(M=M, lam=lam, tau=tau, delta=delta, q1=q1, **overrides)

    @classmethod
    def for_torus(cls, M: int, lam: float = LAMBDA_DEFAULT,
                  tau: float | None = None,
                  tau_divisor: float = TAU_DIVISOR_DEFAULT,
                  cycles_per_step: int = 1, **overrides) -> "RunParams":
        """Source-driven torus factory (no boundary flux, no gate)."""
        if M < 4 or (M & (M - 1)) != 0:
            raise ValueError(f"M must be a power of two >= 4, got {M}")
        h = 1.0 / M
        if tau is None:
            tau = h / tau_divisor
        delta = make_delta(lam, h, tau,
                           overrides.get("w", LAYER_WIDTH_DEFAULT),
                           overrides.get("gamma_layer", LAYER_RATIO_DEFAULT))
        return cls(M=M, lam=lam, tau=tau, delta=delta, q1=0.0,
                   cycles_per_step=cycles_per_step, **overrides)


@dataclass
class EnthalpyState:
    """Fields at time index k (t = k*tau)."""

    k: int
    t: float
    z: np.ndarray
    u: np.ndarray
    mu: np.ndarray
    activated: np.ndarray
    breakthrough: float | None = None

    def wet(self) -> np.ndarray:
        return self.z > 0.0


@dataclass
class StepDiagnostics:
    deposit_rate: float        # (lam/tau) * h^2 * sum(mu*(u_new - beta(z)))
    enthalpy_rate: float       # (lam/tau) * h^2 * sum(z_new - z)
    injection_rate: float      # (h^2) * sum(source), torus mode only
    monotonicity_violations: int
    residual: float            # max-norm residual of the pressure solve
    contraction: float         # per-cycle residual reduction (inf at the floor)
    activations: int


@dataclass
class RunDiagnostics:
    steps: int = 0
    wall_seconds: float = 0.0
    monotonicity_violations: int = 0
    max_residual: float = 0.0
    min_contraction: float = math.inf
    activations: int = 0
    deposit_rates: list = dc_field(default_factory=list)
    enthalpy_rates: list = dc_field(default_factory=list)

    def absorb(self, d: StepDiagnostics):
        self.steps += 1
        self.monotonicity_violations += d.monotonicity_violations
        self.max_residual = max(self.max_residual, d.residual)
        self.min_contraction = min(self.min_contraction, d.contraction)
        self.activations += d.activations
        self.deposit_rates.append(d.deposit_rate)
        self.enthalpy_rates.append(d.enthalpy_rate)


def _mu_of(z: np.ndarray, delta: float) -> np.ndarray:
    return 1.0 / (delta + (z > 0.0))


def init_strip(params: RunParams, g: CoefficientField,
               sampler: GridSampler | None = None) -> EnthalpyState:
    """Initial state: exact linear pressure profile |q1|*(L0 - x1) on the
    wet strip x1 < L0, dry enthalpy -1/(lam*g(x, 0)) elsewhere."""
    if sampler is None:
        sampler = GridSampler(g, params.M)
    x1 = (np.arange(params.M) * params.h)[:, None]
    wet_profile = abs(params.q1) * (params.L0 - x1) * np.ones((1, params.M))
    z = np.where(x1 < params.L0, wet_profile, -1.0 / (params.lam * sampler.values(0.0)))
    return EnthalpyState(
        k=0,
        t=0.0,
        z=z,
        u=np.maximum(z, 0.0),
        mu=_mu_of(z, params.delta),
        activated=z > 0.0,
    )


def _advance(state: EnthalpyState, params: RunParams, sampler: GridSampler,
             topology: str, source: np.ndarray | None) -> tuple[EnthalpyState, StepDiagnostics]:
    h = params.h
    scale = params.lam * h * h / params.tau
    a = scale * state.mu
    beta_old = np.maximum(state.z, 0.0)
    f = a * beta_old
    if source is not None:
        f = f + h * h * source
    solver = MultigridSolver(a, topology)
    b = solver.assemble_rhs(f, params.q1 if topology == "strip" else 0.0)
    u_new = state.u.copy()
    res_in = float(np.max(np.abs(solver.residual(u_new, b))))
    for _ in range(params.cycles_per_step):
        u_new = solver.v_cycle(u_new, b)
    res = float(np.max(np.abs(solver.residual(u_new, b))))
    # per-cycle reduction factor; meaningless once at the rounding floor
    floor = 1e-14 * max(1.0, float(np.max(np.abs(b))))
    if res <= floor or res_in <= floor:
        contraction = math.inf
    else:
        contraction = (res_in / res) ** (1.0 / params.cycles_per_step)

    t_new = (state.k + 1) * params.tau
    t_mid = (state.k + 0.5) * params.tau

    relaxation_increment = state.mu * (u_new - beta_old)
    dry_source = -(params.tau / params.lam) * sampler.dt_inv(t_mid)
    z_new = state.z.copy()
    act = state.activated
    full = relaxation_increment + np.where(state.z < 0.0, dry_source, 0.0)
    z_new[act] = state.z[act] + full[act]

    newly = (~act) & (u_new > params.activation_factor * params.delta)
    n_new = int(np.count_nonzero(newly))
    if n_new:
        g_now = sampler.values(t_new)
        z_new[newly] = -1.0 / (params.lam * g_now[newly])

    violations = int(np.count_nonzero((state.z > 0.0) & ~(z_new > 0.0)))
    diag = StepDiagnostics(
        deposit_rate=(params.lam / params.tau) * h * h * float(np.sum(relaxation_increment)),
        enthalpy_rate=(params.lam / params.tau) * h * h * float(np.sum(z_new - state.z)),
        injection_rate=h * h * float(np.sum(source)) if source is not None else 0.0,
        monotonicity_violations=violations,
        residual=res,
        contraction=contraction,
        activations=n_new,
    )
    new_state = EnthalpyState(
        k=state.k + 1,
        t=t_new,
        z=z_new,
        u=u_new,
        mu=_mu_of(z_new, params.delta),
        activated=act | newly,
        breakthrough=state.breakthrough,
    )
    return new_state, diag


def step(state: EnthalpyState, params: RunParams, g: CoefficientField,
         sampler: GridSampler | None = None):
    """One strip-mode step; returns (new_state, step_diagnostics)."""
    if sampler is None:
        sampler = GridSampler(g, params.M)
    return _advance(state, params, sampler, "strip", None)


class BreakthroughTimeout(RuntimeError):
    """The wet set did not reach the gate within max_steps."""

    def __init__(self, message: str, state: EnthalpyState, diagnostics: "RunDiagnostics"):
        super().__init__(message)
        self.state = state
        self.diagnostics = diagnostics


@dataclass
class BreakthroughResult:
    T_eps: float
    r_est: float
    state: EnthalpyState
    diagnostics: RunDiagnostics


def run_breakthrough(params: RunParams, g: CoefficientField,
                     direction=None) -> BreakthroughResult:
    """Advance until the wet set reaches the gate column nearest L1.

    If a lattice direction is supplied, g is rotated to its frame and
    rescaled by its epsilon first (|q1| must equal |q|); otherwise g is
    used as given.  Returns T_eps = k*tau at first gate wetting and
    r_est = (L1 - L0)/T_eps.
    """
    if direction is not None:
        if abs(abs(params.q1) - direction.qmag) > 1e-12 * max(1.0, direction.qmag):
            raise ValueError(
                f"|q1|={abs(params.q1):g} does not match the direction's |q|={direction.qmag:g}"
            )
        g = g.rotated(direction.zeta).rescaled(direction.epsilon)
    sampler = GridSampler(g, params.M)
    state = init_strip(params, g, sampler)
    diags = RunDiagnostics()
    gate = params.gate_index
    t0 = time.perf_counter()
    while state.k < params.max_steps:
        state, d = _advance(state, params, sampler, "strip", None)
        diags.absorb(d)
        if np.any(state.z[gate] > 0.0):
            state.breakthrough = state.t
            diags.wall_seconds = time.perf_counter() - t0
            return BreakthroughResult(
                T_eps=state.t,
                r_est=(params.L1 - params.L0) / state.t,
                state=state,
                diagnostics=diags,
            )
    diags.wall_seconds = time.perf_counter() - t0
    raise BreakthroughTimeout(
        f"no breakthrough after {params.max_steps} steps (t={state.t:g})", state, diags
    )


# -- source-driven torus mode -------------------------------------------------

@dataclass(frozen=True)
class SourceSpec:
    """Cone-shaped injection source amplitude*max(radius - |x - center|, 0)."""

    amplitude: float = 1500.0
    radius: float = 0.1
    center: tuple[float, float] = (0.5, 0.5)

    def sample(self, M: int) -> np.ndarray:
        h = 1.0 / M
        x1 = (np.arange(M) * h)[:, None]
        x2 = (np.arange(M) * h)[None, :]
        dist = np.hypot(x1 - self.center[0], x2 - self.center[1])
        return self.amplitude * np.maximum(self.radius - dist, 0.0)


def init_disk(params: RunParams, g: CoefficientField, radius: float = 0.1,
              center: tuple[float, float] = (0.5, 0.5), z_init: float = 1e-3,
              sampler: GridSampler | None = None) -> EnthalpyState:
    """Initial torus state: small positive z inside the disk, dry outside.

    Any positive marker works for z_init: the pressure is re-solved every
    step and z adjusts within a few steps.
    """
    if sampler is None:
        sampler = GridSampler(g, params.M)
    h = params.h
    x1 = (np.arange(params.M) * h)[:, None]
    x2 = (np.arange(params.M) * h)[None, :]
    inside = np.hypot(x1 - center[0], x2 - center[1]) < radius
    z = np.where(inside, z_init, -1.0 / (params.lam * sampler.values(0.0)))
    return EnthalpyState(
        k=0, t=0.0, z=z, u=np.maximum(z, 0.0),
        mu=_mu_of(z, params.delta), activated=z > 0.0,
    )


def step_source(state: EnthalpyState, params: RunParams, g: CoefficientField,
                source: np.ndarray, sampler: GridSampler | None = None):
    """One torus-mode step with the injection source; source >= 0."""
    if np.any(source < 0):
        raise ValueError("source must be nonnegative")
    if sampler is None:
        sampler = GridSampler(g, params.M)
    return _advance(state, params, sampler, "torus", source)


@dataclass
class FacetResult:
    snapshots: list  # (t, z copy, boundary polylines)
    diagnostics: RunDiagnostics
    balance_errors: list  # per step |deposit - injection|/injection


def run_facet(params: RunParams, g: CoefficientField, source_spec: SourceSpec,
              t_max: float, snapshot_every: float,
              init_radius: float = 0.1, z_init: float = 1e-3,
              warmup_cycles: int = 16) -> FacetResult:
    """Source-driven run on the torus with periodic boundary snapshots.

    The first step runs extra V-cycles: the initial pressure guess is the
    raw disk marker, far from the quasi-static profile, and a converged
    first solve removes the cold-start imbalance.
    """
    sampler = GridSampler(g, params.M)
    source = source_spec.sample(params.M)
    state = init_disk(params, g, radius=init_radius, z_init=z_init, sampler=sampler)
    diags = RunDiagnostics()
    snapshots = [(0.0, state.z.copy(), extract_boundary(state.z, "torus"))]
    balance = []
    next_snap = snapshot_every
    t0 = time.perf_counter()
    n_steps = int(round(t_max / params.tau))
    first = dc_replace(params, cycles_per_step=max(warmup_cycles, params.cycles_per_step))
    for k in range(n_steps):
        state, d = _advance(state, first if k == 0 else params, sampler, "torus", source)
        diags.absorb(d)
        deposit = d.deposit_rate * params.tau / params.lam  # h^2*sum(mu*(u-beta(z)))
        injected = d.injection_rate * params.tau / params.lam
        balance.append(abs(deposit - injected) / injected if injected else 0.0)
        if state.t + 1e-12 >= next_snap:
            snapshots.append((state.t, state.z.copy(), extract_boundary(state.z, "torus")))
            next_snap += snapshot_every
    diags.wall_seconds = time.perf_counter() - t0
    return FacetResult(snapshots=snapshots, diagnostics=diags, balance_errors=balance)


# -- free boundary extraction -------------------------------------------------

def extract_boundary(z: np.ndarray, topology: str = "strip",
                     level: float = 0.0) -> list[np.ndarray]:
    """Marching-squares polylines of the z = level set, in (x1, x2) coords.

    Wet is z > level strictly.  x2 always wraps; x1 wraps on the torus.
    A chain crossing the periodic seam is unwrapped continuously, so a
    front line spanning the strip is one polyline from x2=a to x2=a+1.
    """
    M = z.shape[0]
    coords = np.arange(M) / M
    return iso_polylines(
        z,
        level=level,
        row_coords=coords,
        col_coords=coords,
        wrap_rows=(topology == "torus"),
        wrap_cols=True,
    )


# -- checkpointing -------------------------------------------------------------

CHECKPOINT_MAGIC = b"FAVZ1"
_HEADER = struct.Struct("<5sBIQd")  # magic, topology, M, k, t


def save_state(path, state: EnthalpyState, topology: str = "strip") -> None:
    """Fixed-width little-endian checkpoint of (k, z) plus resume fields."""
    topo_code = {"strip": 0, "torus": 1}[topology]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(CHECKPOINT_MAGIC, topo_code, state.z.shape[0],
                              state.k, state.t))
        fh.write(state.z.astype("<f8").tobytes())
        fh.write(state.u.astype("<f8").tobytes())
        fh.write(state.activated.astype("u1").tobytes())


def load_state(path, delta: float) -> tuple[EnthalpyState, str]:
    """Read a checkpoint; mu is rebuilt from z and the given delta."""
    with open(path, "rb") as fh:
        magic, topo_code, M, k, t = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"not a checkpoint file (magic {magic!r})")
        n = M * M
        z = np.frombuffer(fh.read(8 * n), dtype="<f8").reshape(M, M).copy()
        u = np.frombuffer(fh.read(8 * n), dtype="<f8").reshape(M, M).copy()
        activated = np.frombuffer(fh.read(n), dtype="u1").reshape(M, M).astype(bool)
    topology = {0: "strip", 1: "torus"}[topo_code]
    state = EnthalpyState(k=k, t=t, z=z, u=u, mu=_mu_of(z, delta), activated=activated)
    return state, topology
