"""Quantum channels in Kraus form.

Two concrete types: :class:`KrausChannel` for a general CPTP map and
:class:`RandomUnitaryChannel` for the uniform mixture ``rho -> (1/n) sum V rho V^dagger``.
Both keep their Kraus operators as one stacked ``(k, d_out, d_in)`` array so
that applying the channel to a pure state is two matrix products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import DimensionError, ResourceError, check_density, haar_unitary, kron
from .rng import SeededRng

TP_TOL = 1e-9
MAX_TENSOR_DIM = 256

KINDS = ("random_unitary_haar", "weyl", "werner_holevo", "identity", "explicit_kraus")
_ALIASES = {
    "haar": "random_unitary_haar",
    "random_unitary_haar": "random_unitary_haar",
    "weyl": "weyl",
    "wh": "werner_holevo",
    "werner_holevo": "werner_holevo",
    "id": "identity",
    "identity": "identity",
    "explicit_kraus": "explicit_kraus",
}


class InvalidChannelError(ValueError):
    pass


class _Channel:
    """Shared machinery; subclasses set ``_kraus`` and ``descriptor``."""

    _kraus: np.ndarray
    descriptor: Optional["ChannelDescriptor"]

    @property
    def kraus(self) -> np.ndarray:
        return self._kraus

    @property
    def kraus_ops(self) -> list:
        return list(self._kraus)

    @property
    def dim_in(self) -> int:
        return self._kraus.shape[2]

    @property
    def dim_out(self) -> int:
        return self._kraus.shape[1]

    @property
    def num_kraus(self) -> int:
        return self._kraus.shape[0]

    def _flat(self):
        k, dout, din = self._kraus.shape
        return self._kraus.reshape(k * dout, din)

    def _flat_adjoint(self):
        cached = self.__dict__.get("_flat_h")
        if cached is None:
            cached = np.ascontiguousarray(self._flat().conj().T)
            self.__dict__["_flat_h"] = cached
        return cached

    def output_factors(self, psi) -> np.ndarray:
        """Rows ``K_k psi``; the output state is ``A.T @ A.conj()``."""
        psi = np.asarray(psi, dtype=complex)
        if psi.shape != (self.dim_in,):
            raise DimensionError(f"input has shape {psi.shape}, channel expects ({self.dim_in},)")
        return (self._flat() @ psi).reshape(self.num_kraus, self.dim_out)

    def apply_pure(self, psi) -> np.ndarray:
        a = self.output_factors(psi)
        out = a.T @ a.conj()
        return (out + out.conj().T) / 2

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim_in, self.dim_in):
            raise DimensionError(f"input has shape {rho.shape}, channel expects {(self.dim_in,) * 2}")
        k = self._kraus
        out = np.einsum("kij,jl,kml->im", k, rho, k.conj(), optimize=True)
        return (out + out.conj().T) / 2

    def adjoint_apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dim_out, self.dim_out):
            raise DimensionError(f"observable has shape {x.shape}, channel outputs {(self.dim_out,) * 2}")
        k = self._kraus
        return np.einsum("kji,jl,klm->im", k.conj(), x, k, optimize=True)

    def adjoint_times(self, x, psi, factors=None) -> np.ndarray:
        """``M(x) psi`` with ``M`` the Heisenberg-picture map, without forming ``M(x)``."""
        a = self.output_factors(psi) if factors is None else factors
        b = a @ np.asarray(x, dtype=complex).T
        return self._flat_adjoint() @ b.reshape(-1)

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        return self._kraus.shape == other._kraus.shape and bool(np.array_equal(self._kraus, other._kraus))

    def __hash__(self):
        return hash((type(self).__name__, self._kraus.shape, self._kraus.tobytes()))


class KrausChannel(_Channel):
    """CPTP map ``rho -> sum_k K_k rho K_k^dagger``."""

    def __init__(self, kraus_ops, descriptor=None, check=True):
        ops = np.array([np.asarray(k, dtype=complex) for k in kraus_ops])
        if ops.ndim != 3 or ops.shape[0] == 0:
            raise InvalidChannelError("need a non-empty list of equally shaped 2-d Kraus operators")
        if not np.all(np.isfinite(ops)):
            raise InvalidChannelError("Kraus operators have non-finite entries")
        ops.flags.writeable = False
        self._kraus = ops
        self.descriptor = descriptor
        if check:
            diag = validate(self)
            if not diag.passed:
                raise InvalidChannelError(f"not trace preserving (residual {diag.tp_residual:.3g})")

    def __repr__(self):
        return f"KrausChannel(dim_in={self.dim_in}, dim_out={self.dim_out}, num_kraus={self.num_kraus})"


class RandomUnitaryChannel(_Channel):
    """Uniform mixture of ``n`` unitaries, ``rho -> (1/n) sum_i V_i rho V_i^dagger``."""

    def __init__(self, unitaries, descriptor=None, check=True):
        us = np.array([np.asarray(u, dtype=complex) for u in unitaries])
        if us.ndim != 3 or us.shape[0] == 0 or us.shape[1] != us.shape[2]:
            raise InvalidChannelError("need a non-empty list of square unitaries of one size")
        us.flags.writeable = False
        self._unitaries = us
        kraus = us / math.sqrt(us.shape[0])
        kraus.flags.writeable = False
        self._kraus = kraus
        self.descriptor = descriptor
        if check:
            diag = validate(self)
            if not diag.passed:
                raise InvalidChannelError(f"unitarity residual {diag.unitarity_residual:.3g} exceeds {TP_TOL}")

    @property
    def unitaries(self) -> np.ndarray:
        return self._unitaries

    @property
    def dim(self) -> int:
        return self._unitaries.shape[1]

    @property
    def n(self) -> int:
        return self._unitaries.shape[0]

    @property
    def weight(self) -> float:
        return 1.0 / self.n

    def to_kraus(self) -> KrausChannel:
        return KrausChannel(self._kraus, descriptor=self.descriptor, check=False)

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        return self._unitaries.shape == other._unitaries.shape and bool(
            np.array_equal(self._unitaries, other._unitaries)
        )

    __hash__ = _Channel.__hash__

    def __repr__(self):
        return f"RandomUnitaryChannel(dim={self.dim}, n={self.n})"


@dataclass(frozen=True)
class ChannelDiagnostics:
    tp_residual: float
    unitarity_residual: Optional[float]
    passed: bool
    tol: float = TP_TOL


def validate(channel, tol=TP_TOL) -> ChannelDiagnostics:
    """Trace-preservation and unitarity residuals; never raises on a bad channel.

    Accepts a channel object or a bare list of Kraus operators.
    """
    if isinstance(channel, _Channel):
        ops = channel.kraus
    else:
        ops = np.array([np.asarray(k, dtype=complex) for k in channel])
    din = ops.shape[2]
    tp = np.einsum("kji,kjl->il", ops.conj(), ops) - np.eye(din)
    tp_res = float(np.abs(tp).max())
    unit_res = None
    if isinstance(channel, RandomUnitaryChannel):
        us = channel.unitaries
        gram = np.einsum("kij,klj->kil", us, us.conj()) - np.eye(us.shape[1])
        unit_res = float(np.abs(gram).max())
    passed = tp_res <= tol and (unit_res is None or unit_res <= tol)
    return ChannelDiagnostics(tp_res, unit_res, passed, tol)


def minimal_kraus(channel) -> KrausChannel:
    """Same map with at most ``d_in * d_out`` Kraus operators (Choi-matrix eigenvectors).

    Returns ``channel`` itself, as a KrausChannel, when it is already that small.
    Pure-input evaluation cost scales with the Kraus count, so the optimiser
    works on this form for heavily mixed random-unitary channels.
    """
    k, dout, din = channel.kraus.shape
    if k <= dout * din:
        return channel if isinstance(channel, KrausChannel) else channel.to_kraus()
    cached = channel.__dict__.get("_minimal")
    if cached is None:
        vecs = channel.kraus.reshape(k, dout * din)
        choi = vecs.T @ vecs.conj()
        w, u = np.linalg.eigh((choi + choi.conj().T) / 2)
        w = np.clip(w, 0.0, None)
        ops = (u * np.sqrt(w)).T.reshape(dout * din, dout, din)
        cached = KrausChannel(ops[::-1], descriptor=channel.descriptor, check=False)
        channel.__dict__["_minimal"] = cached
    return cached


def apply(channel, rho) -> np.ndarray:
    """Output ``sum_k K_k rho K_k^dagger`` of a density operator."""
    return channel.apply(check_density(rho))


def adjoint_apply(channel, x) -> np.ndarray:
    """Heisenberg picture ``sum_k K_k^dagger x K_k``."""
    return channel.adjoint_apply(x)


def conjugate(channel):
    """Entrywise complex conjugate of every Kraus operator (or unitary)."""
    desc = channel.descriptor
    if desc is not None:
        desc = desc.replace(conjugated=not desc.conjugated)
    if isinstance(channel, RandomUnitaryChannel):
        return RandomUnitaryChannel(channel.unitaries.conj(), descriptor=desc, check=False)
    return KrausChannel(channel.kraus.conj(), descriptor=desc, check=False)


def tensor(c1, c2):
    """Tensor product with Kraus set ``{K (x) L}`` in row-major pair order.

    Two random-unitary channels give a random-unitary channel on the product
    space (the weights ``1/(n1 n2)`` are uniform again).
    """
    dim = c1.dim_in * c2.dim_in
    if dim > MAX_TENSOR_DIM:
        raise ResourceError(f"tensor input dimension {dim} exceeds {MAX_TENSOR_DIM}")
    if isinstance(c1, RandomUnitaryChannel) and isinstance(c2, RandomUnitaryChannel):
        us = [kron(v, w) for v in c1.unitaries for w in c2.unitaries]
        return RandomUnitaryChannel(us, check=False)
    ops = [kron(k, l) for k in c1.kraus for l in c2.kraus]
    return KrausChannel(ops, check=False)


MAX_PRODUCT_OUTPUT_DIM = 4096
_PRODUCT_WORK_LIMIT = 4 * 10**10


def tensor_output_pure(c1, c2, psi) -> np.ndarray:
    """``(c1 (x) c2)(|psi><psi|)`` without materialising the tensor channel.

    Writing ``psi`` as a ``d1 x d2`` matrix ``X``, the Kraus vectors are
    ``vec(K X L^T)``; their outer products are accumulated in chunks of ``K``.
    """
    d1, d2 = c1.dim_in, c2.dim_in
    dout = c1.dim_out * c2.dim_out
    if dout > MAX_PRODUCT_OUTPUT_DIM:
        raise ResourceError(f"tensor output dimension {dout} exceeds {MAX_PRODUCT_OUTPUT_DIM}")
    if c1.num_kraus * c2.num_kraus * dout * dout > _PRODUCT_WORK_LIMIT:
        raise ResourceError("tensor output too expensive to form explicitly")
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (d1 * d2,):
        raise DimensionError(f"input has shape {psi.shape}, expected ({d1 * d2},)")
    x = psi.reshape(d1, d2)
    right = np.einsum("jk,blk->bjl", x, c2.kraus)  # X L_b^T
    out = np.zeros((dout, dout), dtype=complex)
    step = max(1, 2**22 // max(1, c2.num_kraus * dout))
    for lo in range(0, c1.num_kraus, step):
        rows = np.einsum("aij,bjl->abil", c1.kraus[lo : lo + step], right).reshape(-1, dout)
        out += rows.T @ rows.conj()
    return (out + out.conj().T) / 2


def identity_channel(d) -> RandomUnitaryChannel:
    return RandomUnitaryChannel([np.eye(d)], descriptor=ChannelDescriptor("identity", d), check=False)


def random_unitary_channel(d, n, seed) -> RandomUnitaryChannel:
    """``n`` independent Haar unitaries; unitary ``i`` comes from stream ``(seed, i)``."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    us = [haar_unitary(d, SeededRng(int(seed), i)) for i in range(int(n))]
    desc = ChannelDescriptor("random_unitary_haar", int(d), n=int(n), seed=int(seed))
    return RandomUnitaryChannel(us, descriptor=desc)


def weyl_operators(d) -> np.ndarray:
    """The ``d**2`` discrete Weyl operators ``X^a Z^b``, index ``a * d + b``."""
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    phases = np.exp(2j * np.pi * np.arange(d) / d)
    out = np.empty((d * d, d, d), dtype=complex)
    xa = np.eye(d, dtype=complex)
    for a in range(d):
        for b in range(d):
            out[a * d + b] = xa * (phases ** b)[None, :]
        xa = shift @ xa
    return out


def weyl_channel(d) -> RandomUnitaryChannel:
    """Uniform mixture of all discrete Weyl operators: maps every state to ``I/d``."""
    if d < 2:
        raise DimensionError("weyl_channel needs d >= 2")
    return RandomUnitaryChannel(weyl_operators(d), descriptor=ChannelDescriptor("weyl", d))


def werner_holevo_map(rho) -> np.ndarray:
    """Closed form ``(tr(rho) I - rho^T) / (d - 1)``."""
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    return (np.trace(rho) * np.eye(d) - rho.T) / (d - 1)


def werner_holevo(d) -> KrausChannel:
    """Transpose-depolarising channel from antisymmetric Kraus operators.

    The Kraus realisation is checked against :func:`werner_holevo_map` on
    every matrix unit ``|i><j|`` before the channel is returned.
    """
    if d < 2:
        raise DimensionError("the Werner-Holevo channel needs d >= 2")
    ops = []
    scale = 1.0 / math.sqrt(d - 1)
    for i in range(d):
        for j in range(i + 1, d):
            k = np.zeros((d, d), dtype=complex)
            k[i, j] = scale
            k[j, i] = -scale
            ops.append(k)
    ch = KrausChannel(ops, descriptor=ChannelDescriptor("werner_holevo", d))
    kr = ch.kraus
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            got = np.einsum("kab,bc,kdc->ad", kr, e, kr.conj())
            if np.abs(got - werner_holevo_map(e)).max() > 1e-10:
                raise AssertionError("Kraus form disagrees with the closed form")
    return ch


@dataclass(frozen=True)
class ChannelDescriptor:
    """Serializable recipe for a named channel.

    The command-line form is ``kind:dim[:n[:seed]]`` with kinds ``haar``,
    ``weyl``, ``wh``, ``id`` (long names accepted too).
    """

    kind: str
    dim: int
    n: Optional[int] = None
    seed: Optional[int] = None
    conjugated: bool = False
    kraus: Optional[list] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        if (self.n is not None) != (self.kind == "random_unitary_haar"):
            raise ValueError("n is required for, and only for, random_unitary_haar")
        if self.n is not None and self.n < 1:
            raise ValueError("n must be positive")
        if self.kind == "explicit_kraus" and self.kraus is None:
            raise ValueError("explicit_kraus needs a kraus list")

    @classmethod
    def parse(cls, text, default_seed=None) -> "ChannelDescriptor":
        parts = text.strip().split(":")
        kind = _ALIASES.get(parts[0].lower())
        if kind is None or kind == "explicit_kraus":
            raise ValueError(f"unknown channel kind in {text!r}")
        try:
            nums = [int(x) for x in parts[1:]]
        except ValueError:
            raise ValueError(f"non-integer field in channel spec {text!r}") from None
        if not nums:
            raise ValueError(f"channel spec {text!r} is missing the dimension")
        if kind == "random_unitary_haar":
            if len(nums) < 2 or len(nums) > 3:
                raise ValueError("haar channel spec is haar:dim:n[:seed]")
            seed = nums[2] if len(nums) == 3 else default_seed
            return cls(kind, nums[0], n=nums[1], seed=0 if seed is None else seed)
        if len(nums) != 1:
            raise ValueError(f"{parts[0]} channel spec takes only a dimension")
        return cls(kind, nums[0])

    def replace(self, **changes) -> "ChannelDescriptor":
        fields = {**self.to_dict(include_kraus=False), "kraus": self.kraus, **changes}
        return ChannelDescriptor(**fields)

    def label(self) -> str:
        short = {v: k for k, v in _ALIASES.items() if len(k) <= 5}
        parts = [short.get(self.kind, self.kind), str(self.dim)]
        if self.n is not None:
            parts += [str(self.n), str(self.seed)]
        return ("conj:" if self.conjugated else "") + ":".join(parts)

    def to_dict(self, include_kraus=True) -> dict:
        out = {"kind": self.kind, "dim": self.dim, "n": self.n, "seed": self.seed, "conjugated": self.conjugated}
        if include_kraus and self.kraus is not None:
            out["kraus"] = self.kraus
        return out

    @classmethod
    def from_dict(cls, data) -> "ChannelDescriptor":
        return cls(
            data["kind"],
            int(data["dim"]),
            n=data.get("n"),
            seed=data.get("seed"),
            conjugated=bool(data.get("conjugated", False)),
            kraus=data.get("kraus"),
        )

    def build(self):
        if self.kind == "random_unitary_haar":
            ch = random_unitary_channel(self.dim, self.n, 0 if self.seed is None else self.seed)
        elif self.kind == "weyl":
            ch = weyl_channel(self.dim)
        elif self.kind == "werner_holevo":
            ch = werner_holevo(self.dim)
        elif self.kind == "identity":
            ch = identity_channel(self.dim)
        else:
            # explicit Kraus operators are stored as nested [re, im] pairs
            ops = np.array(self.kraus, dtype=float)
            ch = KrausChannel(ops[..., 0] + 1j * ops[..., 1], descriptor=self.replace(conjugated=False))
            if ch.dim_in != self.dim:
                raise DimensionError("explicit Kraus operators do not match dim")
        return conjugate(ch) if self.conjugated else ch
