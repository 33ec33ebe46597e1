"""Linear recurrent network simulator and delay-vector assembly.

The recurrence is h[k+1] = W h[k] + y[k] + b.  Stacking n+1 consecutive
states against the n inputs between them gives the linear relation the
delay matrix encodes, in its signed form (identity blocks, -W on the
super-diagonal):

    M_signed @ psi = phi + ones(n) (x) b

with psi = (h[k], h[k-1], ..., h[k-n]) newest first and
phi = (y[k-1], ..., y[k-n]).  verify_delay_relation checks that residual
on simulated traces; reconstruct_min_norm inverts it.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import matcore
from .delaymat import DelaySpec, build_delay_matrix
from .exceptions import (
    DimensionMismatchError,
    IndexOutOfRangeError,
    InvalidParamsError,
    NonFiniteError,
    SchemaMismatchError,
)
from .matio import atomic_write_text

TRACE_COLUMNS = ["step", "channel", "re_y", "im_y", "re_h", "im_h"]


def _as_vector(v, m: int, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=np.complex128).reshape(-1)
    if a.shape != (m,):
        raise DimensionMismatchError(f"{name} must have length {m}, got {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise NonFiniteError(f"{name} contains NaN or Inf")
    return a


@dataclass(frozen=True)
class RecurrenceConfig:
    """Weight, bias and initial state of one recurrence."""

    weight: np.ndarray = field(repr=False)
    bias: np.ndarray = field(repr=False)
    h0: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = matcore.as_complex_matrix(self.weight)
        if w.shape[0] != w.shape[1]:
            raise DimensionMismatchError(f"weight must be square, got {w.shape}")
        m = w.shape[0]
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", _as_vector(self.bias, m, "bias"))
        object.__setattr__(self, "h0", _as_vector(self.h0, m, "h0"))

    @property
    def m(self) -> int:
        return self.weight.shape[0]

    @classmethod
    def zero_state(cls, weight, bias=None) -> "RecurrenceConfig":
        w = matcore.as_complex_matrix(weight)
        m = w.shape[0]
        b = np.zeros(m) if bias is None else bias
        return cls(weight=w, bias=b, h0=np.zeros(m))


@dataclass(frozen=True)
class Trace:
    """One simulated trajectory: T inputs and the T+1 states they produced."""

    inputs: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)

    def __post_init__(self):
        y = np.asarray(self.inputs, dtype=np.complex128)
        h = np.asarray(self.states, dtype=np.complex128)
        if y.ndim != 2 or h.ndim != 2:
            raise DimensionMismatchError("inputs and states must be 2-D (time, m)")
        if h.shape[0] != y.shape[0] + 1 or h.shape[1] != y.shape[1]:
            raise DimensionMismatchError(
                f"states shape {h.shape} incompatible with inputs shape {y.shape}"
            )
        object.__setattr__(self, "inputs", y)
        object.__setattr__(self, "states", h)

    @property
    def steps(self) -> int:
        return self.inputs.shape[0]

    @property
    def m(self) -> int:
        return self.inputs.shape[1]


def run_recurrence(cfg: RecurrenceConfig, inputs) -> Trace:
    """Run h[k+1] = W h[k] + y[k] + b over the given inputs.

    The update is evaluated in exactly that order, one step at a time;
    the returned trace holds all T+1 states including h0.
    """
    y = np.asarray(inputs, dtype=np.complex128)
    if y.ndim != 2 or y.shape[1] != cfg.m:
        raise DimensionMismatchError(
            f"inputs must have shape (T, {cfg.m}), got {y.shape}"
        )
    if not np.all(np.isfinite(y.real)) or not np.all(np.isfinite(y.imag)):
        raise NonFiniteError("inputs contain NaN or Inf")
    t_steps = y.shape[0]
    h = np.zeros((t_steps + 1, cfg.m), dtype=np.complex128)
    h[0] = cfg.h0
    w, b = cfg.weight, cfg.bias
    for k in range(t_steps):
        h[k + 1] = w @ h[k] + y[k] + b
    return Trace(inputs=y, states=h)


@dataclass(frozen=True)
class DelayVectors:
    """Stacked lag vectors at one anchor step.

    psi: states newest first, (n+1) blocks of size m.
    phi: inputs newest first, n blocks of size m.
    """

    n: int
    m: int
    phi: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)


def assemble_delay_vectors(trace: Trace, k: int, n: int) -> DelayVectors:
    """Stack states h[k..k-n] and inputs y[k-1..k-n] at anchor step k.

    Requires n <= k <= T so every referenced index exists.
    """
    if n < 1:
        raise InvalidParamsError("n must be positive")
    if not (n <= k <= trace.steps):
        raise IndexOutOfRangeError(
            f"anchor k={k} needs n={n} steps of history within 0..{trace.steps}"
        )
    psi = trace.states[k - n:k + 1][::-1].reshape(-1)
    phi = trace.inputs[k - n:k][::-1].reshape(-1)
    return DelayVectors(n=n, m=trace.m, phi=phi, psi=psi.copy())


def bias_stack(bias, n: int) -> np.ndarray:
    """ones(n) (x) b: the bias contribution to the stacked relation."""
    b = np.asarray(bias, dtype=np.complex128).reshape(-1)
    return np.tile(b, n)


def verify_delay_relation(spec: DelaySpec, bias, dv: DelayVectors) -> float:
    """Max-norm residual of M_signed @ psi - (phi + ones (x) bias).

    Zero (to roundoff) on any trace produced by run_recurrence with the
    same weight and bias.
    """
    if (dv.n, dv.m) != (spec.n, spec.m):
        raise DimensionMismatchError(
            f"delay vectors built for (n={dv.n}, m={dv.m}), spec has (n={spec.n}, m={spec.m})"
        )
    m_signed = build_delay_matrix(spec, negate_w=True)
    rhs = dv.phi + bias_stack(_as_vector(bias, spec.m, "bias"), spec.n)
    return float(np.max(np.abs(m_signed @ dv.psi - rhs)))


def reconstruct_min_norm(spec: DelaySpec, phi, bias, trailing=None) -> np.ndarray:
    """Recover a stacked state vector psi from inputs phi and the bias.

    With ``trailing`` omitted, returns the minimum-norm solution of
    M_signed @ psi = phi + ones (x) bias through the pseudo-inverse.
    Passing ``trailing`` (an m-vector) instead pins the oldest state
    block h[k-n] to that value and solves the remaining square unit
    block-triangular system exactly, which matches the convention of
    continuing the input pattern one lag further when the weight is
    nilpotent of order one.
    """
    phi = np.asarray(phi, dtype=np.complex128).reshape(-1)
    if phi.shape != (spec.m * spec.n,):
        raise DimensionMismatchError(
            f"phi must have length {spec.m * spec.n}, got {phi.shape[0]}"
        )
    rhs = phi + bias_stack(_as_vector(bias, spec.m, "bias"), spec.n)
    n, m = spec.n, spec.m
    if trailing is None:
        m_signed = build_delay_matrix(spec, negate_w=True)
        return matcore.pseudo_inverse(m_signed) @ rhs
    tail = _as_vector(trailing, m, "trailing")
    w = spec.weight
    blocks = rhs.reshape(n, m).copy()
    out = np.zeros((n + 1, m), dtype=np.complex128)
    out[n] = tail
    # Back-substitute the unit upper block-bidiagonal head: each block row
    # reads psi[j] - W psi[j+1] = rhs[j].
    for j in range(n - 1, -1, -1):
        out[j] = blocks[j] + w @ out[j + 1]
    return out.reshape(-1)


def trailing_from_trace(trace: Trace, k: int, n: int, bias) -> np.ndarray:
    """The pinned-tail value y[k-n-1] + b, continuing the input pattern."""
    if k - n - 1 < 0:
        raise IndexOutOfRangeError(
            f"pinned tail at anchor k={k}, n={n} needs input index {k - n - 1}"
        )
    return trace.inputs[k - n - 1] + _as_vector(bias, trace.m, "bias")


class SignalKind(enum.Enum):
    SINE = "sine"
    LINEAR_SYSTEM = "linear"
    WHITE_NOISE = "noise"


def generate_signal(kind: SignalKind, m: int, steps: int, seed: int,
                    params: dict | None = None) -> np.ndarray:
    """Deterministic test inputs of shape (steps, m).

    sine: channel c carries amp*cos(2*pi*freq*(c+1)*t + phase); freq=0
    collapses to a constant signal.  linear: the trajectory of a seeded
    random linear map rescaled to the requested spectral radius, so
    trajectories stay bounded for radius <= 1.  noise: seeded standard
    normal scaled by ``scale``.
    """
    if m < 1 or steps < 1:
        raise InvalidParamsError("m and steps must be positive")
    p = dict(params or {})
    kind = SignalKind(kind)
    if kind is SignalKind.SINE:
        freq = float(p.pop("freq", 0.05))
        amp = float(p.pop("amp", 1.0))
        phase = float(p.pop("phase", 0.0))
        _reject_extras(p)
        t = np.arange(steps)[:, None]
        c = np.arange(1, m + 1)[None, :]
        return (amp * np.cos(2.0 * np.pi * freq * c * t + phase)).astype(np.complex128)
    rng = np.random.default_rng(seed)
    if kind is SignalKind.LINEAR_SYSTEM:
        radius = float(p.pop("radius", 0.9))
        _reject_extras(p)
        if radius < 0:
            raise InvalidParamsError("radius must be >= 0")
        a = rng.standard_normal((m, m))
        rho = float(np.max(np.abs(np.linalg.eigvals(a))))
        a = a * (radius / rho) if rho > 0 else np.zeros((m, m))
        x = rng.standard_normal(m)
        x = x / max(float(np.linalg.norm(x)), 1e-300)
        out = np.zeros((steps, m), dtype=np.complex128)
        for t_idx in range(steps):
            out[t_idx] = x
            x = a @ x
        return out
    scale = float(p.pop("scale", 1.0))
    _reject_extras(p)
    return (scale * rng.standard_normal((steps, m))).astype(np.complex128)


def _reject_extras(p: dict):
    if p:
        raise InvalidParamsError(f"unknown signal params: {sorted(p)}")


def format_trace_csv(trace: Trace) -> str:
    """Render a trace in the step/channel long format.

    The final step has a state but no input; its re_y/im_y fields are
    left empty.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    t_steps, m = trace.steps, trace.m
    for step in range(t_steps + 1):
        for ch in range(m):
            if step < t_steps:
                y = trace.inputs[step, ch]
                y_re, y_im = repr(float(y.real)), repr(float(y.imag))
            else:
                y_re = y_im = ""
            h = trace.states[step, ch]
            writer.writerow([step, ch, y_re, y_im,
                             repr(float(h.real)), repr(float(h.imag))])
    return buf.getvalue()


def write_trace_csv(path: str, trace: Trace) -> None:
    atomic_write_text(path, format_trace_csv(trace))


def parse_trace_csv(text: str) -> Trace:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaMismatchError("empty trace file") from None
    if header != TRACE_COLUMNS:
        raise SchemaMismatchError(
            f"trace header {header!r} does not match {TRACE_COLUMNS!r}"
        )
    rows = [r for r in reader if r]
    if not rows:
        raise SchemaMismatchError("trace file has no data rows")
    try:
        m = max(int(r[1]) for r in rows) + 1
        n_steps = max(int(r[0]) for r in rows)
    except (ValueError, IndexError) as exc:
        raise SchemaMismatchError("malformed trace row") from exc
    if len(rows) != (n_steps + 1) * m:
        raise SchemaMismatchError(
            f"expected {(n_steps + 1) * m} rows for T={n_steps}, m={m}, found {len(rows)}"
        )
    inputs = np.zeros((n_steps, m), dtype=np.complex128)
    states = np.zeros((n_steps + 1, m), dtype=np.complex128)
    for r in rows:
        step, ch = int(r[0]), int(r[1])
        if r[2] != "":
            if step >= n_steps:
                raise SchemaMismatchError(f"input present at final step {step}")
            inputs[step, ch] = complex(float(r[2]), float(r[3]))
        elif step < n_steps:
            raise SchemaMismatchError(f"missing input at step {step}")
        states[step, ch] = complex(float(r[4]), float(r[5]))
    return Trace(inputs=inputs, states=states)


def read_trace_csv(path: str) -> Trace:
    with open(path, "r", newline="") as fh:
        return parse_trace_csv(fh.read())


def reconstruction_gap(spec: DelaySpec, trace: Trace, k: int, bias) -> dict:
    """Compare reconstructions against the true stacked state at anchor k.

    Returns max-norm gaps for the minimum-norm route, the projection of
    the true psi onto the row space (these agree when the delay matrix
    has full row rank and psi_true is compared through the relation),
    and the pinned-tail route when enough history exists.
    """
    dv = assemble_delay_vectors(trace, k, spec.n)
    psi_min = reconstruct_min_norm(spec, dv.phi, bias)
    m_signed = build_delay_matrix(spec, negate_w=True)
    # Both vectors satisfy the same underdetermined relation, so their
    # difference lies in the null space; the projected gap measures only
    # the row-space component.
    pinv = matcore.pseudo_inverse(m_signed)
    proj = pinv @ m_signed
    gap_projected = float(np.max(np.abs(proj @ (psi_min - dv.psi))))
    out = {
        "residual_min_norm": float(
            np.max(np.abs(m_signed @ psi_min - (dv.phi + bias_stack(bias, spec.n))))
        ),
        "gap_projected": gap_projected,
        "gap_min_norm": float(np.max(np.abs(psi_min - dv.psi))),
    }
    if k - spec.n - 1 >= 0:
        tail = trailing_from_trace(trace, k, spec.n, bias)
        psi_pin = reconstruct_min_norm(spec, dv.phi, bias, trailing=tail)
        out["gap_pinned"] = float(np.max(np.abs(psi_pin - dv.psi)))
    return out


def bias_shift_identity(spec: DelaySpec, phi, bias) -> float:
    """Check that adding the bias stack and solving equals shifting the solution.

    For the minimum-norm route, psi(phi, b) = psi(phi + 1 (x) b, 0)
    exactly, because the bias enters only through the right-hand side.
    Returns the max-norm difference.
    """
    phi = np.asarray(phi, dtype=np.complex128).reshape(-1)
    shifted = phi + bias_stack(_as_vector(bias, spec.m, "bias"), spec.n)
    a = reconstruct_min_norm(spec, phi, bias)
    b = reconstruct_min_norm(spec, shifted, np.zeros(spec.m))
    return float(np.max(np.abs(a - b)))
