"""Quantitative checks around maximum output p-norms of random unitary channels.

The headline statement is asymptotic: for an eps-randomising family the
single-copy bound ``((1+eps)/d)^(2-2/p)`` eventually drops below ``1/n``,
which lower-bounds the tensor-product norm on the maximally entangled input.
At desk scale we can only evaluate each link of that chain, plus the
Werner-Holevo channel where the violation is already visible at d = 3.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import mpmath
import numpy as np

from .channels import (
    MAX_PRODUCT_OUTPUT_DIM,
    RandomUnitaryChannel,
    conjugate,
    random_unitary_channel,
    tensor,
    tensor_output_pure,
)
from .linalg import (
    ResourceError,
    UnsupportedExponentError,
    clamp_spectrum,
    kron,
    max_entangled_state,
    random_pure_state,
    schatten_from_eigenvalues,
)
from .optimize import OptimizerConfig, certify_epsilon, fix_gauge, maximize_output_pnorm
from .rng import SeededRng

MAX_SCALING_DIM = 64
HAAR_CONSTANT = 134


class DomainWarning(UserWarning):
    pass


def _clean(value):
    """Plain-python view of a result for serialisation."""
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


class _Record:
    def to_dict(self) -> dict:
        return _clean(asdict(self))


def _check_p(p):
    p = float(p)
    if not p > 1:
        raise UnsupportedExponentError(f"need p > 1, got {p}")
    return p


def closed_form_nu_p(channel, p) -> Optional[float]:
    """Exact maximum output p-norm for the named channels that have one.

    Identity and any single-unitary channel give pure outputs (1); the Weyl
    channel maps everything to ``I/d``; Werner-Holevo outputs always have
    spectrum ``{1/(d-1)} x (d-1), 0``. Returns None otherwise.
    """
    p = _check_p(p)
    if isinstance(channel, RandomUnitaryChannel) and channel.n == 1:
        return 1.0
    desc = channel.descriptor
    if desc is None:
        return None
    inv = 0.0 if math.isinf(p) else 1.0 / p
    if desc.kind == "identity":
        return 1.0
    if desc.kind == "weyl":
        return float(desc.dim ** (inv - 1.0))
    if desc.kind == "werner_holevo":
        return float((desc.dim - 1) ** (inv - 1.0))
    return None


# --- Lemma 1 ------------------------------------------------------------------


@dataclass
class Lemma1Result(_Record):
    d: int
    n: int
    p: float
    overlap: float
    overlap_identity: float
    lambda_max: float
    pnorm: float
    bound: float
    overlap_ok: bool
    identity_ok: bool
    chain_ok: bool

    @property
    def holds(self) -> bool:
        return self.overlap_ok and self.identity_ok and self.chain_ok


def overlap_identity(ruc: RandomUnitaryChannel) -> float:
    """``(1/(n^2 d^2)) sum_ij |tr(V_j^dagger V_i)|^2``, computed from traces only."""
    v = ruc.unitaries
    traces = np.einsum("iab,jab->ij", v, v.conj())
    return float(np.sum(np.abs(traces) ** 2) / (ruc.n**2 * ruc.dim**2))


def lemma1_lower_bound(ruc: RandomUnitaryChannel, p) -> Lemma1Result:
    """Evaluate ``omega = (N (x) conj N)(Phi_d)`` and the chain ``||omega||_p >= lambda_max >= <Phi|omega|Phi> >= 1/n``."""
    p = _check_p(p)
    d, n = ruc.dim, ruc.n
    if d * d > MAX_PRODUCT_OUTPUT_DIM:
        raise ResourceError(f"d^2 = {d * d} exceeds {MAX_PRODUCT_OUTPUT_DIM}")
    phi = max_entangled_state(d)
    omega = tensor_output_pure(ruc, conjugate(ruc), phi)
    overlap = float(np.real(np.vdot(phi, omega @ phi)))
    ident = overlap_identity(ruc)
    w = clamp_spectrum(np.linalg.eigvalsh(omega)[::-1])
    lam = float(w[0])
    pnorm = schatten_from_eigenvalues(w, p)
    bound = 1.0 / n
    return Lemma1Result(
        d=d,
        n=n,
        p=p,
        overlap=overlap,
        overlap_identity=ident,
        lambda_max=lam,
        pnorm=pnorm,
        bound=bound,
        overlap_ok=overlap >= bound - 1e-10,
        identity_ok=abs(overlap - ident) <= 1e-9,
        chain_ok=pnorm >= lam - 1e-12 and lam >= overlap - 1e-12,
    )


# --- Lemma 2 and the Haar scale -----------------------------------------------


def lemma2_bound(eps, d, p) -> float:
    """``((1 + eps)/d)^(1 - 1/p)``: largest p-norm of a spectrum capped at ``(1+eps)/d``."""
    p = _check_p(p)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    expo = 1.0 if math.isinf(p) else 1.0 - 1.0 / p
    return float(((1.0 + eps) / d) ** expo)


def _n_haar_exact(d, eps) -> int:
    with mpmath.workdps(60):
        val = mpmath.mpf(HAAR_CONSTANT) / mpmath.mpf(eps) ** 2 * d * mpmath.log(d)
        return int(mpmath.ceil(val))


def n_haar(d, eps) -> int:
    """Number of Haar unitaries ``ceil(134/eps^2 * d * ln d)`` for an eps-randomising channel.

    Warns with :class:`DomainWarning` outside ``d > 10/eps``, where the
    existence statement does not apply (the value is still returned).
    """
    eps = float(eps)
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if int(d) != d or d < 1:
        raise ValueError(f"d must be a positive integer, got {d!r}")
    if d <= 10 / eps:
        warnings.warn(f"d = {d} is not above 10/eps = {10 / eps:.4g}", DomainWarning, stacklevel=2)
    return _n_haar_exact(int(d), eps)


@dataclass
class Lemma2Report(_Record):
    d: int
    n: int
    p: float
    nu_hat: float
    eps_hat: float
    bound: float
    margin: float
    holds: bool
    note: str = (
        "necessary-consistency check: eps_hat and nu_hat are both optimiser lower bounds, "
        "so this does not prove the bound"
    )


def lemma2_consistency(channel, p, config=None) -> Lemma2Report:
    """Check ``nu_hat <= ((1 + eps_hat)/d)^(1 - 1/p)``.

    The p-norm witness is fed to the eps search as a warm start, so its
    largest output eigenvalue is covered by ``eps_hat``.
    """
    p = _check_p(p)
    config = config or OptimizerConfig()
    nu = maximize_output_pnorm(channel, p, config)
    cert = certify_epsilon(channel, config, extra_starts=[nu.best_state])
    d = channel.dim_in
    bound = lemma2_bound(cert.eps_hat, d, p)
    n = channel.n if isinstance(channel, RandomUnitaryChannel) else channel.num_kraus
    return Lemma2Report(
        d=d,
        n=n,
        p=p,
        nu_hat=nu.best_value,
        eps_hat=cert.eps_hat,
        bound=bound,
        margin=bound - nu.best_value,
        holds=nu.best_value <= bound + 1e-8,
    )


# --- violation reports ---------------------------------------------------------


@dataclass
class ViolationReport(_Record):
    p: float
    nu1_hat: float
    nu2_hat: float
    product: float
    tensor_lower: float
    gap: float
    method: str
    tensor_exact: bool
    nu1_upper: Optional[float]
    nu2_upper: Optional[float]
    certified: bool
    soundness: str
    channel1: Optional[dict] = None
    channel2: Optional[dict] = None
    seed: int = 0


def _descriptor_dict(ch):
    return None if ch.descriptor is None else ch.descriptor.to_dict(include_kraus=False)


def violation_report(c1, c2, p, witness="max_entangled", config=None) -> ViolationReport:
    """Compare a lower bound on ``nu_p(c1 (x) c2)`` with ``nu_hat(c1) * nu_hat(c2)``.

    ``witness="max_entangled"`` evaluates the tensor channel exactly on the
    maximally entangled input; ``"optimize"`` runs the optimiser on the
    materialised tensor channel, warm-started from the product of the
    single-copy witnesses. A positive gap is reported as certified only with
    an exact (or converged) tensor value and closed-form single-copy norms.
    """
    p = _check_p(p)
    config = config or OptimizerConfig()
    witness = witness.replace("-", "_")
    dout = c1.dim_out * c2.dim_out
    if dout > MAX_PRODUCT_OUTPUT_DIM or c1.dim_in * c2.dim_in > MAX_PRODUCT_OUTPUT_DIM:
        raise ResourceError(f"tensor dimension {dout} exceeds {MAX_PRODUCT_OUTPUT_DIM}")
    r1 = maximize_output_pnorm(c1, p, config)
    r2 = maximize_output_pnorm(c2, p, config)
    if witness == "max_entangled":
        if c1.dim_in != c2.dim_in:
            raise ValueError("the maximally entangled witness needs equal input dimensions")
        omega = tensor_output_pure(c1, c2, max_entangled_state(c1.dim_in))
        tensor_lower = schatten_from_eigenvalues(np.linalg.eigvalsh(omega), p)
        exact = True
    elif witness == "optimize":
        joint = tensor(c1, c2)
        start = kron(r1.best_state, r2.best_state)
        res = maximize_output_pnorm(joint, p, config, extra_starts=[start])
        state = fix_gauge(res.best_state)
        tensor_lower = schatten_from_eigenvalues(np.linalg.eigvalsh(joint.apply_pure(state)), p)
        exact = bool(res.converged_flags[int(np.argmax(res.per_start_values))])
    else:
        raise ValueError(f"unknown witness {witness!r}")
    product = r1.best_value * r2.best_value
    u1, u2 = closed_form_nu_p(c1, p), closed_form_nu_p(c2, p)
    gap = tensor_lower - product
    certified = exact and u1 is not None and u2 is not None and tensor_lower > u1 * u2
    if certified:
        soundness = "certified: exact tensor witness, closed-form single-copy norms"
    elif gap <= 0:
        soundness = "no violation observed"
    elif not exact:
        soundness = "heuristic: tensor optimiser did not converge"
    else:
        soundness = "heuristic: single-copy norms are optimiser lower bounds"
    return ViolationReport(
        p=p,
        nu1_hat=r1.best_value,
        nu2_hat=r2.best_value,
        product=product,
        tensor_lower=tensor_lower,
        gap=gap,
        method=witness,
        tensor_exact=exact,
        nu1_upper=u1,
        nu2_upper=u2,
        certified=certified,
        soundness=soundness,
        channel1=_descriptor_dict(c1),
        channel2=_descriptor_dict(c2),
        seed=config.seed,
    )


# --- crossover arithmetic -------------------------------------------------------


@dataclass
class CrossoverResult(_Record):
    p: float
    eps: float
    crossed: bool
    d_star: Optional[int]
    n_at_d_star: Optional[int]
    lhs: Optional[float]
    rhs: Optional[float]
    ratio: Optional[float]
    reason: str


def _crossover_sides(d, p, eps):
    """``((1+eps)/d)^(2-2/p)`` and ``1/n_haar(d, eps)`` at 60 digits."""
    with mpmath.workdps(60):
        expo = mpmath.mpf(2) if math.isinf(p) else 2 - 2 / mpmath.mpf(p)
        lhs = ((1 + mpmath.mpf(eps)) / d) ** expo
        n = _n_haar_exact(d, eps)
        return lhs, mpmath.mpf(1) / n, n


def crossover_predicate(d, p, eps) -> bool:
    """True when the single-copy product bound is strictly below ``1/n``."""
    lhs, rhs, _ = _crossover_sides(int(d), float(p), float(eps))
    return bool(lhs < rhs)


def crossover_certified(p, eps, max_doublings=256) -> CrossoverResult:
    """Smallest ``d >= 2`` where the bound chain certifies a violation.

    For p > 2 the predicate is false at small d and true for all large d
    (``d^(1-2/p) / ln d`` is eventually increasing), so doubling brackets the
    threshold and bisection finds it.
    """
    p, eps = float(p), float(eps)
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if p <= 2:
        return CrossoverResult(
            p, eps, False, None, None, None, None, None,
            "no crossover: exponent 2 - 2/p <= 1 and n >= d, so (1+eps)/d^(2-2/p) never drops below 1/n",
        )
    lo, hi = 1, 2
    for _ in range(max_doublings):
        if crossover_predicate(hi, p, eps):
            break
        lo, hi = hi, hi * 2
    else:
        return CrossoverResult(p, eps, False, None, None, None, None, None, "no crossover found in search range")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if crossover_predicate(mid, p, eps):
            hi = mid
        else:
            lo = mid
    lhs, rhs, n = _crossover_sides(hi, p, eps)
    return CrossoverResult(
        p, eps, True, int(hi), int(n), float(lhs), float(rhs), float(lhs / rhs),
        "single-copy bound product below 1/n",
    )


# --- entropies, rank, scaling ----------------------------------------------------------


@dataclass
class RenyiBound(_Record):
    p: float
    value: float
    nu_hat: float
    is_upper_bound: bool = True
    note: str = "nu_hat is a lower bound on nu_p, so this upper-bounds the minimum output entropy"


def min_output_renyi(channel, p, config=None) -> RenyiBound:
    """``(p/(1-p)) log2 nu_hat``, in bits; ``-log2 nu_hat`` at p = inf."""
    p = _check_p(p)
    nu = maximize_output_pnorm(channel, p, config or OptimizerConfig()).best_value
    factor = -1.0 if math.isinf(p) else p / (1.0 - p)
    return RenyiBound(p=p, value=float(factor * math.log2(nu)), nu_hat=nu)


@dataclass
class RankReport(_Record):
    d: int
    n: int
    eps_hat: float
    max_output_rank: int
    min_output_eigenvalue: float
    rank_bound_holds: bool
    claim_triggered: bool
    claim_holds: bool


def rank_necessity_check(ruc: RandomUnitaryChannel, config=None, samples=None) -> RankReport:
    """Pure inputs give outputs of rank at most n, so n < d forces eps >= 1.

    Output ranks and the smallest output eigenvalue are measured on the
    optimiser witnesses plus ``samples`` random inputs (default: num_starts).
    """
    config = config or OptimizerConfig()
    cert = certify_epsilon(ruc, config)
    d, n = ruc.dim, ruc.n
    k = config.num_starts if samples is None else samples
    inputs = [cert.witness, cert.top.best_state, cert.bottom.best_state]
    inputs += [random_pure_state(d, SeededRng(config.seed, 10**6 + i)) for i in range(k)]
    ranks, mins = [], []
    for psi in inputs:
        w = np.linalg.eigvalsh(ruc.apply_pure(psi))
        ranks.append(int(np.sum(w > 1e-10)))
        mins.append(float(w[0]))
    triggered = n < d
    min_eig = min(mins)
    holds = (min_eig <= 1e-10 and cert.eps_hat >= 1 - 1e-9) if triggered else True
    return RankReport(
        d=d,
        n=n,
        eps_hat=cert.eps_hat,
        max_output_rank=max(ranks),
        min_output_eigenvalue=min_eig,
        rank_bound_holds=max(ranks) <= n,
        claim_triggered=triggered,
        claim_holds=holds,
    )


@dataclass
class ScalingRecord(_Record):
    d: int
    n: int
    seed: int
    multiplier: float
    eps_hat: float
    wall_time: float = field(default=0.0, compare=False)


def scaling_n(d, multiplier) -> int:
    return max(1, int(math.ceil(multiplier * d * math.log(d))))


def scaling_experiment(dims, multipliers, p, seeds, config=None):
    """Sample a Haar channel per ``(d, multiplier, seed)`` cell and record ``eps_hat``.

    ``n = ceil(multiplier * d * ln d)``. ``p`` is carried for bookkeeping only;
    the eps certificate does not depend on it. Records come back sorted by
    cell coordinates.
    """
    config = config or OptimizerConfig()
    for d in dims:
        if d > MAX_SCALING_DIM:
            raise ResourceError(f"d = {d} exceeds the scaling guard {MAX_SCALING_DIM}")
        if d < 2:
            raise ValueError("scaling experiment needs d >= 2")
    records = []
    for d in dims:
        for m in multipliers:
            n = scaling_n(d, m)
            for s in seeds:
                t0 = time.perf_counter()
                ch = random_unitary_channel(d, n, s)
                eps = certify_epsilon(ch, replace(config, seed=int(s))).eps_hat
                records.append(ScalingRecord(int(d), n, int(s), float(m), eps, time.perf_counter() - t0))
    records.sort(key=lambda r: (r.d, r.multiplier, r.seed))
    return records
