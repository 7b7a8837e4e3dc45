"""Maximisation of spectral objectives of channel outputs over pure inputs.

Three objectives share one ascent loop:

* ``pnorm``  -- Schatten p-norm of the output, ``p`` finite or infinite;
* ``top``    -- largest output eigenvalue (also the p = inf norm);
* ``bottom`` -- minus the smallest output eigenvalue.

Each is a convex function of the input density operator, so its gradient
operator ``G`` (for the p-norm ``M(sigma^(p-1))`` with ``M`` the adjoint
channel) satisfies ``f(rho') >= f(rho)`` whenever ``rho'`` has larger overlap
with ``G`` than ``rho``. The tangent direction is scaled by ``<psi|G|psi>``
so that a unit step lands on ``G psi / |G psi|``; with backtracking this makes
every accepted step an ascent step.

All optimiser values are lower bounds on the true maximum. The grid routines
at d = 2, 3 give the matching upper bounds through explicit Lipschitz
constants.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .linalg import (
    DimensionError,
    UnsupportedExponentError,
    check_pure,
    clamp_spectrum,
    random_pure_state,
    schatten_from_eigenvalues,
)
from .channels import minimal_kraus
from .rng import SeededRng

DEGENERACY_GAP = 1e-10
_MAX_STEP = 2.0**10
_MIN_STEP = 1e-14


@dataclass(frozen=True)
class OptimizerConfig:
    num_starts: int = 20
    max_iters: int = 5000
    step_init: float = 0.1
    objective_tol: float = 1e-12
    grad_tol: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if self.num_starts < 1 or self.max_iters < 1:
            raise ValueError("num_starts and max_iters must be positive")
        if min(self.step_init, self.objective_tol, self.grad_tol) <= 0:
            raise ValueError("step_init and tolerances must be positive")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})


@dataclass
class OptResult:
    best_value: float
    best_state: np.ndarray
    per_start_values: np.ndarray
    iterations_used: np.ndarray
    converged_flags: np.ndarray
    objective: str = "pnorm"
    p: float = float("nan")

    @property
    def converged(self) -> bool:
        return bool(np.any(self.converged_flags))

    def summary(self) -> dict:
        return {
            "best_value": self.best_value,
            "num_starts": int(len(self.per_start_values)),
            "num_converged": int(np.sum(self.converged_flags)),
            "max_iterations": int(np.max(self.iterations_used)),
        }


def fix_gauge(psi) -> np.ndarray:
    """Rotate the global phase so the first nonzero amplitude is real and positive."""
    psi = np.asarray(psi, dtype=complex)
    nz = np.flatnonzero(np.abs(psi) > 1e-12)
    if nz.size == 0:
        return psi
    a = psi[nz[0]]
    out = psi * (abs(a) / a)
    out[nz[0]] = abs(a)
    return out


def _check_objective_p(p):
    p = float(p)
    if not p > 1:
        raise UnsupportedExponentError(f"need p > 1, got {p}")
    return p


def _output(channel, psi):
    a = channel.output_factors(psi)
    sigma = a.T @ a.conj()
    sigma = (sigma + sigma.conj().T) / 2
    return a, sigma


def output_pnorm_objective(channel, p, psi) -> float:
    """``||N(|psi><psi|)||_p``."""
    p = _check_objective_p(p)
    _, sigma = _output(channel, check_pure(psi, tol=1e-10))
    return schatten_from_eigenvalues(np.linalg.eigvalsh(sigma), p)


def gradient_output_pnorm(channel, p, psi) -> np.ndarray:
    """Wirtinger gradient ``p M(sigma^(p-1)) psi`` of ``tr sigma^p``.

    Along a direction ``eta`` the derivative of ``tr sigma^p`` is
    ``2 Re <eta, g>``. Project with :func:`project_tangent` for the sphere.
    """
    p = _check_objective_p(p)
    if math.isinf(p):
        raise UnsupportedExponentError("p = inf has no smooth gradient; the optimiser uses eigenvector ascent")
    psi = np.asarray(psi, dtype=complex)
    a, sigma = _output(channel, psi)
    w, v = np.linalg.eigh(sigma)
    x = (v * clamp_spectrum(w) ** (p - 1)) @ v.conj().T
    return p * channel.adjoint_times(x, psi, factors=a)


def project_tangent(psi, g) -> np.ndarray:
    return g - np.vdot(psi, g) * psi


def directional_derivative(channel, p, psi, eta) -> float:
    """Analytic derivative of the output p-norm along ``eta`` (chain rule on the gradient)."""
    p = _check_objective_p(p)
    psi = np.asarray(psi, dtype=complex)
    _, sigma = _output(channel, psi)
    purity = float(np.sum(clamp_spectrum(np.linalg.eigvalsh(sigma)) ** p))
    g = gradient_output_pnorm(channel, p, psi)
    return (1.0 / p) * purity ** (1.0 / p - 1.0) * 2.0 * float(np.real(np.vdot(eta, g)))


class _Objective:
    """Value and scaled ascent direction of one spectral objective at ``psi``."""

    def __init__(self, channel, kind, p=None):
        self.channel = minimal_kraus(channel)
        self.kind = kind
        self.p = p
        if kind == "pnorm" and math.isinf(p):
            self.kind = "top"

    def value(self, psi):
        _, sigma = _output(self.channel, psi)
        return self._value_from(np.linalg.eigvalsh(sigma))

    def _value_from(self, w):
        if self.kind == "pnorm":
            return schatten_from_eigenvalues(w, self.p)
        if self.kind == "top":
            return float(w[-1])
        return float(-w[0])

    def _block_vector(self, psi, a, vecs, idx):
        """Among a degenerate eigenvector block pick the one with the steepest tangent gradient."""
        best, best_norm = vecs[:, idx[0]], -1.0
        for j in idx:
            v = vecs[:, j]
            g = self.channel.adjoint_times(np.outer(v, v.conj()), psi, factors=a)
            nrm = np.linalg.norm(project_tangent(psi, g))
            if nrm > best_norm:
                best, best_norm = v, nrm
        return best

    def evaluate(self, psi):
        a, sigma = _output(self.channel, psi)
        w, vecs = np.linalg.eigh(sigma)
        f = self._value_from(w)
        if self.kind == "pnorm":
            x = (vecs * clamp_spectrum(w) ** (self.p - 1)) @ vecs.conj().T
            g = self.channel.adjoint_times(x, psi, factors=a)
        elif self.kind == "top":
            idx = np.flatnonzero(w >= w[-1] - DEGENERACY_GAP)[::-1]
            v = vecs[:, -1] if idx.size == 1 else self._block_vector(psi, a, vecs, idx)
            g = self.channel.adjoint_times(np.outer(v, v.conj()), psi, factors=a)
        else:
            idx = np.flatnonzero(w <= w[0] + DEGENERACY_GAP)
            u = vecs[:, 0] if idx.size == 1 else self._block_vector(psi, a, vecs, idx)
            # shift by the identity: same maximiser on the sphere, PSD gradient operator
            g = psi - self.channel.adjoint_times(np.outer(u, u.conj()), psi, factors=a)
        scale = float(np.real(np.vdot(psi, g)))
        if scale <= 0:
            return f, np.zeros_like(psi), 0.0
        direction = project_tangent(psi, g) / scale
        return f, direction, float(np.linalg.norm(direction))


def _ascend(obj, psi, config):
    """One start of backtracking projected ascent. Returns (value, state, iters, converged)."""
    f, direction, gnorm = obj.evaluate(psi)
    step = config.step_init
    for it in range(config.max_iters):
        if gnorm <= config.grad_tol:
            return f, psi, it, True
        while True:
            cand = psi + step * direction
            cand /= np.linalg.norm(cand)
            fc = obj.value(cand)
            if fc > f:
                break
            step /= 2
            if step < _MIN_STEP:
                # no ascent left at working precision
                return f, psi, it, True
        gain = fc - f
        psi = cand
        f, direction, gnorm = obj.evaluate(psi)
        if gain <= config.objective_tol * max(1.0, abs(f)):
            return f, psi, it + 1, True
        step = min(2 * step, _MAX_STEP)
    return f, psi, config.max_iters, False


def _multistart(channel, obj, config, extra_starts=None):
    d = channel.dim_in
    starts = [random_pure_state(d, SeededRng(config.seed, i)) for i in range(config.num_starts)]
    for s in extra_starts or ():
        s = np.asarray(s, dtype=complex)
        starts.append(s / np.linalg.norm(s))
    values, iters, flags, states = [], [], [], []
    for s in starts:
        if d == 1:
            f, psi, it, ok = obj.value(s), s, 0, True
        else:
            f, psi, it, ok = _ascend(obj, s, config)
        values.append(f)
        iters.append(it)
        flags.append(ok)
        states.append(psi)
    best = int(np.argmax(values))
    return OptResult(
        best_value=float(values[best]),
        best_state=fix_gauge(states[best]),
        per_start_values=np.array(values),
        iterations_used=np.array(iters),
        converged_flags=np.array(flags),
        objective=obj.kind,
        p=float(obj.p) if obj.p is not None else float("nan"),
    )


def maximize_output_pnorm(channel, p, config=None, extra_starts=None) -> OptResult:
    """Multistart estimate of the maximum output p-norm.

    ``best_value`` is attained by ``best_state``, so it is a certified lower
    bound on the true maximum, not a proof of optimality. ``extra_starts``
    are appended after the random starts (warm starts).
    """
    p = _check_objective_p(p)
    config = config or OptimizerConfig()
    if channel.dim_in < 1:
        raise DimensionError("channel has no input dimension")
    return _multistart(channel, _Objective(channel, "pnorm", p), config, extra_starts)


@dataclass
class EpsilonCertificate:
    eps_hat: float
    witness: np.ndarray
    top: OptResult
    bottom: OptResult
    side: str = field(default="top")

    def summary(self) -> dict:
        return {
            "eps_hat": self.eps_hat,
            "side": self.side,
            "lambda_max": self.top.best_value,
            "lambda_min": -self.bottom.best_value,
        }


def certify_epsilon(channel, config=None, extra_starts=None) -> EpsilonCertificate:
    """Lower bound on the randomising parameter ``eps`` of a square channel.

    ``eps_hat = d * max_psi ||N(psi) - I/d||_inf`` over optimised pure states,
    obtained by maximising the top eigenvalue and minus the bottom eigenvalue
    separately. Both maxima are attained by the returned witness, so the
    channel is *not* eps-randomising for any eps below ``eps_hat``.
    """
    config = config or OptimizerConfig()
    if channel.dim_in != channel.dim_out:
        raise DimensionError("certify_epsilon needs a square channel")
    d = channel.dim_in
    top = _multistart(channel, _Objective(channel, "top"), config, extra_starts)
    bottom = _multistart(channel, _Objective(channel, "bottom"), config, extra_starts)
    up = d * (top.best_value - 1.0 / d)
    down = d * (1.0 / d + bottom.best_value)
    if up >= down:
        return EpsilonCertificate(max(up, 0.0), top.best_state, top, bottom, "top")
    return EpsilonCertificate(max(down, 0.0), bottom.best_state, top, bottom, "bottom")


# --- exhaustive grids at d = 2, 3 -------------------------------------------

MAX_GRID_POINTS = 10**7
_CHUNK = 1 << 16


def bloch_grid(resolution):
    """States ``(cos(t/2), e^{i f} sin(t/2))`` on an ``r x r`` grid, t in [0, pi], f in [0, 2 pi)."""
    r = int(resolution)
    theta = np.linspace(0.0, np.pi, r)
    phi = np.linspace(0.0, 2 * np.pi, r, endpoint=False)
    t, f = np.meshgrid(theta, phi, indexing="ij")
    t, f = t.ravel(), f.ravel()
    return np.stack([np.cos(t / 2), np.exp(1j * f) * np.sin(t / 2)], axis=1).astype(complex)


def bloch_covering_radius(resolution) -> float:
    """Euclidean distance from any phase-fixed qubit state to the nearest grid state.

    d psi / d theta has norm 1/2 and d psi / d phi has norm sin(theta/2) <= 1,
    with half-spacings pi/(2(r-1)) and pi/r.
    """
    r = int(resolution)
    return 0.5 * np.pi / (2 * (r - 1)) + np.pi / r


def hopf_grid(resolution):
    """Qutrit states ``(cos a, e^{i f1} sin a cos b, e^{i f2} sin a sin b)``, ``r**4`` points."""
    r = int(resolution)
    ang = np.linspace(0.0, np.pi / 2, r)
    ph = np.linspace(0.0, 2 * np.pi, r, endpoint=False)
    a, b, f1, f2 = (x.ravel() for x in np.meshgrid(ang, ang, ph, ph, indexing="ij"))
    return np.stack(
        [np.cos(a) + 0j, np.exp(1j * f1) * np.sin(a) * np.cos(b), np.exp(1j * f2) * np.sin(a) * np.sin(b)],
        axis=1,
    )


def hopf_covering_radius(resolution) -> float:
    """Each Hopf coordinate moves the state at unit speed or less; add the half-spacings."""
    r = int(resolution)
    return 2 * np.pi / (4 * (r - 1)) + 2 * np.pi / r


def _grid_spectra(channel, states):
    """Ascending output spectra for a batch of input states, chunked."""
    channel = minimal_kraus(channel)
    k, dout, din = channel.kraus.shape
    flat = channel.kraus.reshape(k * dout, din)
    out = []
    for lo in range(0, len(states), _CHUNK):
        a = (flat @ states[lo : lo + _CHUNK].T).reshape(k, dout, -1)
        sigma = np.einsum("kiN,kjN->Nij", a, a.conj())
        out.append(np.linalg.eigvalsh(sigma))
    return np.concatenate(out)


def _pnorm_rows(w, p):
    w = np.clip(w, 0.0, None)
    top = w[:, -1]
    if math.isinf(p):
        return top
    return top * np.sum((w / top[:, None]) ** p, axis=1) ** (1.0 / p)


def brute_force_pnorm_d2(channel, p, resolution=400) -> float:
    """Grid maximum of the output p-norm over the Bloch sphere of a qubit input.

    The objective is Lipschitz in the state vector with constant at most
    ``2 p`` (conservative), so the true maximum lies within
    ``2 p * bloch_covering_radius(resolution)`` above the returned value.
    """
    p = _check_objective_p(p)
    if channel.dim_in != 2:
        raise DimensionError("brute_force_pnorm_d2 needs a qubit input")
    if resolution < 100:
        raise ValueError("resolution must be at least 100")
    return float(_pnorm_rows(_grid_spectra(channel, bloch_grid(resolution)), p).max())


def epsnet_certify_upper(channel, resolution):
    """Two-sided bracket on ``eps`` for d = 2 (Bloch grid) or d = 3 (Hopf grid).

    Returns ``(eps_lower, eps_upper)``. The deviation ``||N(psi) - I/d||_inf`` is
    2-Lipschitz in ``psi`` (trace-norm contraction), hence
    ``eps_upper = eps_lower + 2 d delta`` with ``delta`` the covering radius.
    """
    d = channel.dim_in
    if d not in (2, 3) or channel.dim_out != d:
        raise DimensionError("epsnet_certify_upper supports square channels with d in {2, 3}")
    npts = resolution**2 if d == 2 else resolution**4
    if npts > MAX_GRID_POINTS:
        raise ValueError(f"grid of {npts} points exceeds {MAX_GRID_POINTS}")
    if d == 2:
        states, delta = bloch_grid(resolution), bloch_covering_radius(resolution)
    else:
        states, delta = hopf_grid(resolution), hopf_covering_radius(resolution)
    w = _grid_spectra(channel, states)
    dev = np.maximum(w[:, -1] - 1.0 / d, 1.0 / d - w[:, 0])
    lower = float(max(d * dev.max(), 0.0))
    return lower, lower + 2 * d * delta
