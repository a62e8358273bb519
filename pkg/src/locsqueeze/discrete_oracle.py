"""Finite-mode Fock model with truncated occupation numbers.

The continuum field is replaced by ``M`` momentum modes ``k_i`` carrying
weights ``w_i = v / ((2 pi)^D 2 omega_i)``, ``v`` being the cell volume.
With ladder operators ``[a_i, a_j^+] = delta_ij``

``Phi(f) = sum_i sqrt(w_i) [f-(-k_i) a_i + f+(k_i) a_i^+]``

``:Phi^2:(h) = sum_ij sqrt(w_i w_j) [H-_ij a_i a_j + 2 H0_ij a_i^+ a_j + H+_ij a_i^+ a_j^+]``

with ``H-_ij = h~(-omega_i - omega_j, -k_i - k_j)``,
``H0_ij = h~(omega_i - omega_j, k_i - k_j)`` and
``H+_ij = h~(omega_i + omega_j, k_i + k_j)``. This is the symmetric Fock
convention ``Phi = (a(f) + a^+(f)) / sqrt 2`` over the discrete measure
``nu_i = 2 w_i``.

A one-particle vector is the pair ``(f+(k_i), f-(-k_i))`` of length ``2M``.
The discrete generator ``t`` is read off from the canonical commutation
relations, so ``[:Phi^2:(h) / 2, Phi(g)] = i Phi(t g)`` holds exactly on
every state whose modes stay below the occupancy cap.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import InconclusiveError, InputError
from .kinematics import MassShellSample, ModelParams, as_momenta

DIMENSION_CAP = 4096
LEAKAGE_THRESHOLD = 1e-8


@dataclass(frozen=True, eq=False)
class DiscreteModel:
    """Mode momenta, cell volume, occupancy cap and mass.

    Parameters
    ----------
    momenta : array_like, shape (M, D) or (M,)
    cell : float
        Volume ``v`` of a momentum cell (the surrogate of ``d^D p``).
    n_max : int
        Largest occupation number per mode.
    mass : float
    cap : int
        Bound on the Fock dimension ``(n_max + 1)^M``.
    """

    momenta: np.ndarray
    cell: float
    n_max: int
    mass: float = 1.0
    cap: int = DIMENSION_CAP
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        k = np.asarray(self.momenta, dtype=float)
        if k.ndim == 1:
            k = k[:, None]
        object.__setattr__(self, "momenta", k)
        if k.shape[0] < 1:
            raise InputError("at least one mode is required")
        if not self.cell > 0:
            raise InputError("cell volume must be positive")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise InputError("n_max must be a positive integer")
        if not self.mass > 0:
            raise InputError("mass must be positive")
        if self.dimension > self.cap:
            raise InputError(f"Fock dimension {self.dimension} exceeds the cap {self.cap}")

    @classmethod
    def lattice(cls, modes: int, spacing: float, n_max: int, mass: float = 1.0, cap: int = DIMENSION_CAP):
        """``modes`` equally spaced 1D momenta symmetric about zero."""
        k = spacing * (np.arange(modes) - 0.5 * (modes - 1))
        return cls(k, spacing, n_max, mass, cap)

    @property
    def modes(self) -> int:
        return self.momenta.shape[0]

    @property
    def spatial_dim(self) -> int:
        return self.momenta.shape[1]

    @property
    def dimension(self) -> int:
        return (int(self.n_max) + 1) ** self.momenta.shape[0]

    @property
    def model(self) -> ModelParams:
        return ModelParams(self.mass, self.spatial_dim)

    @property
    def energies(self):
        return np.sqrt(self.mass**2 + np.sum(self.momenta**2, axis=1))

    @property
    def weights(self):
        """``w_i``; the Fock measure is ``nu_i = 2 w_i``."""
        D = self.spatial_dim
        return self.cell / ((2 * np.pi) ** D * 2 * self.energies)

    @property
    def occupations(self):
        """Occupation numbers of every basis vector, shape ``(dim, M)``."""
        if "occ" not in self._cache:
            grids = itertools.product(range(int(self.n_max) + 1), repeat=self.modes)
            self._cache["occ"] = np.array(list(grids), dtype=int).reshape(-1, self.modes)
        return self._cache["occ"]

    def annihilator(self, i: int):
        """Truncated ``a_i`` as a sparse matrix."""
        key = ("a", i)
        if key not in self._cache:
            n = int(self.n_max)
            lower = sp.diags(np.sqrt(np.arange(1, n + 1)), 1, shape=(n + 1, n + 1), format="csr")
            eye = sp.identity(n + 1, format="csr")
            out = sp.identity(1, format="csr")
            for j in range(self.modes):
                out = sp.kron(out, lower if j == i else eye, format="csr")
            self._cache[key] = out
        return self._cache[key]

    def interior(self, margin: int):
        """Mask of basis vectors whose every mode has occupancy ``<= n_max - margin``."""
        return self.occupations.max(axis=1) <= int(self.n_max) - margin

    def boundary(self):
        """Mask of basis vectors with some mode at occupancy ``>= n_max - 1``."""
        return self.occupations.max(axis=1) >= int(self.n_max) - 1

    def particle_number(self):
        return self.occupations.sum(axis=1)


@dataclass(frozen=True)
class DiscreteOperator:
    """Sparse operator on the truncated Fock space."""

    matrix: sp.csr_matrix
    label: str

    def dense(self):
        return self.matrix.toarray()

    def __add__(self, other):
        return DiscreteOperator((self.matrix + other.matrix).tocsr(), f"{self.label}+{other.label}")

    def hermiticity_defect(self, model: DiscreteModel, margin=1):
        """``||(X - X^+) P||`` on columns away from the truncation boundary."""
        d = (self.matrix - self.matrix.getH()).toarray()[:, model.interior(margin)]
        return float(np.linalg.norm(d, 2)) if d.size else 0.0


# ------------------------------------------------------------ sampling
def sample_shell(m: DiscreteModel, f: MassShellSample):
    """One-particle vector ``(f+(k_i), f-(-k_i))`` of length ``2M``."""
    k = as_momenta(m.momenta, m.spatial_dim)
    plus, _ = f.evaluate(k)
    _, minus = f.evaluate(-k)
    return np.concatenate([plus, minus])


def kernel_matrices(m: DiscreteModel, h):
    """``(H-, H0, H+)`` on the modes."""
    if h.dim != m.spatial_dim + 1:
        raise InputError("test function dimension does not match the modes")
    k, w = m.momenta, m.energies

    def at(e, q):
        pts = np.concatenate([e[..., None], q], axis=-1)
        return h.fourier(pts.reshape(-1, m.spatial_dim + 1)).reshape(e.shape)

    ki, kj = k[:, None, :], k[None, :, :]
    wi, wj = w[:, None], w[None, :]
    return at(-wi - wj, -ki - kj), at(wi - wj, ki - kj), at(wi + wj, ki + kj)


def one_particle_generator(m: DiscreteModel, h):
    """Discrete ``t`` acting on ``(F+, F-)``, from the ladder algebra."""
    Hm, H0, Hp = kernel_matrices(m, h)
    w = m.weights[None, :]
    return np.block([[-1j * H0 * w, 1j * Hp * w],
                     [-1j * Hm * w, 1j * H0.T * w]])


def discrete_two_point(m: DiscreteModel, F, G):
    """``sum_i w_i f-(-k_i) g+(k_i)``."""
    M = m.modes
    return complex(np.sum(m.weights * F[M:] * G[:M]))


def discrete_pauli_jordan(m: DiscreteModel, F, G):
    return -1j * (discrete_two_point(m, F, G) - discrete_two_point(m, G, F))


# ------------------------------------------------------------ operators
def field_from_vector(m: DiscreteModel, F, label="phi"):
    M = m.modes
    rw = np.sqrt(m.weights)
    X = sp.csr_matrix((m.dimension, m.dimension), dtype=complex)
    for i in range(M):
        a = m.annihilator(i)
        X = X + rw[i] * (F[M + i] * a + F[i] * a.getH())
    return DiscreteOperator(X.tocsr(), label)


def build_field(m: DiscreteModel, f: MassShellSample) -> DiscreteOperator:
    """Truncated ``Phi(f)``."""
    return field_from_vector(m, sample_shell(m, f))


def build_wick_square(m: DiscreteModel, h) -> DiscreteOperator:
    """Truncated ``:Phi^2:(h)``."""
    Hm, H0, Hp = kernel_matrices(m, h)
    rw = np.sqrt(m.weights)
    X = sp.csr_matrix((m.dimension, m.dimension), dtype=complex)
    for i in range(m.modes):
        ai = m.annihilator(i)
        for j in range(m.modes):
            aj = m.annihilator(j)
            c = rw[i] * rw[j]
            X = X + c * (Hm[i, j] * (ai @ aj) + 2 * H0[i, j] * (ai.getH() @ aj)
                         + Hp[i, j] * (ai.getH() @ aj.getH()))
    return DiscreteOperator(X.tocsr(), "wick")


def _column_norm(R, cols):
    R = R[:, cols]
    return float(np.linalg.norm(R, 2)) if R.size else 0.0


# ------------------------------------------------------------ checks
def verify_commutator(m: DiscreteModel, h, g: MassShellSample, order: int = 1) -> float:
    """``||[A, Phi(g)]_n - i^n Phi(t^n g)||`` with ``A = :Phi^2:(h) / 2``.

    The norm is taken over basis columns whose occupancies stay at least
    ``2 n`` below the cap, where truncation cannot enter.
    """
    if order < 1:
        raise InputError("order must be at least 1")
    A = 0.5 * build_wick_square(m, h).matrix
    G = sample_shell(m, g)
    C = field_from_vector(m, G).matrix
    for _ in range(order):
        C = (A @ C - C @ A).tocsr()
    t = one_particle_generator(m, h)
    rhs = field_from_vector(m, np.linalg.matrix_power(t, order) @ G).matrix * (1j**order)
    return _column_norm((C - rhs).toarray(), m.interior(2 * order))


def verify_symplectic(m: DiscreteModel, h, f: MassShellSample, g: MassShellSample, s=1.0):
    """``|Delta(T f, T g) - Delta(f, g)|`` with ``T = exp(s t)``."""
    T = scipy.linalg.expm(s * one_particle_generator(m, h))
    F, G = sample_shell(m, f), sample_shell(m, g)
    return abs(discrete_pauli_jordan(m, T @ F, T @ G) - discrete_pauli_jordan(m, F, G))


@dataclass(frozen=True)
class FockBoundReport:
    """Per-particle-number ratios ``||X psi|| / ((n + 1) K ||psi||)``."""

    K: float
    f_norm: float
    c_h: float
    c_discrete: float
    pair_norm: float
    ratios: dict
    schur: tuple
    s_h_norm: float

    @property
    def max_ratio(self):
        return max(self.ratios.values(), default=0.0)

    @property
    def headroom(self):
        return 1.0 - self.max_ratio

    def to_dict(self):
        return {"K": self.K, "f_norm": self.f_norm, "c_h": self.c_h, "c_discrete": self.c_discrete,
                "pair_norm": self.pair_norm, "ratios": {str(k): v for k, v in self.ratios.items()},
                "max_ratio": self.max_ratio, "schur_bounds": list(self.schur),
                "s_h_norm": self.s_h_norm}


def discrete_K(m: DiscreteModel, f: MassShellSample, h, c_h=0.0):
    """Grid version of ``K(f, h)`` over the Fock measure ``nu = 2 w``.

    ``c`` is the larger of ``c_h`` and ``4 sqrt(B1 Binf)``, the Schur
    bounds of ``S_h g(p) = sum_q nu_q H0(p, q) g(q)``.
    """
    nu = 2 * m.weights
    F = sample_shell(m, f)
    M = m.modes
    f_norm = float(np.sqrt(max(np.sum(nu * np.abs(F[:M]) ** 2), np.sum(nu * np.abs(F[M:]) ** 2))))
    Hm, H0, Hp = kernel_matrices(m, h)
    nn = nu[:, None] * nu[None, :]
    pair = float(np.sqrt(max(np.sum(nn * np.abs(Hp) ** 2), np.sum(nn * np.abs(Hm) ** 2))))
    S = H0 * nu[None, :]
    b1 = float(np.max(np.abs(S).sum(axis=0)))
    binf = float(np.max(np.abs(S).sum(axis=1)))
    # S_h on l^2(nu) is unitarily equivalent to sqrt(nu) H0 sqrt(nu)
    s2 = float(np.linalg.norm(np.sqrt(nu)[:, None] * H0 * np.sqrt(nu)[None, :], 2))
    c_disc = 4.0 * np.sqrt(b1 * binf)
    c = max(float(c_h), c_disc)
    return max(f_norm, c, pair), f_norm, c, c_disc, pair, (b1, binf), s2


def verify_fock_bound(m: DiscreteModel, f: MassShellSample, h, c_h=0.0) -> FockBoundReport:
    """Ratios of ``||(Phi(f) + :Phi^2:(h)) psi||`` to ``(n + 1) K ||psi||`` per basis vector.

    Basis vectors with ``n <= n_max - 2`` particles are exact ``n``-particle
    states of the untruncated model; the reported ratio for ``n`` is the
    largest over them.
    """
    K, fn, c, cd, pn, schur, s2 = discrete_K(m, f, h, c_h)
    X = (build_field(m, f) + build_wick_square(m, h)).matrix
    N = m.particle_number()
    ratios = {}
    for n in range(int(m.n_max) - 1):
        cols = np.flatnonzero(N == n)
        norms = sp.linalg.norm(X[:, cols], axis=0) if cols.size else np.zeros(0)
        ratios[n] = float(np.max(norms)) / ((n + 1) * K) if K > 0 else 0.0
    return FockBoundReport(K, fn, float(c_h), cd, pn, ratios, schur, s2)


@dataclass(frozen=True)
class BogoliubovReport:
    residual: float
    leakage: float
    two_point_residual: float
    inconclusive: bool
    per_s: list

    def to_dict(self):
        return {"residual": self.residual, "leakage": self.leakage,
                "two_point_residual": self.two_point_residual,
                "inconclusive": self.inconclusive,
                "per_s": [dict(zip(("s", "residual", "leakage", "two_point_residual"), r))
                          for r in self.per_s]}


def verify_bogoliubov(m: DiscreteModel, h, f: MassShellSample, s_values, *, core=1,
                      threshold=LEAKAGE_THRESHOLD, g: MassShellSample | None = None,
                      strict=False) -> BogoliubovReport:
    """``U^+ Phi(f) U - Phi(exp(s t) f)`` with ``U = exp(i s :Phi^2:(h) / 2)``.

    The residual is measured on core states (every mode occupied at most
    ``core`` times). Leakage is the largest weight that ``U`` moves from a
    core state onto the truncation boundary; above ``threshold`` the result
    is flagged inconclusive (or raises when ``strict``). The quasi-free check
    compares ``<U Omega, Phi(f) Phi(g) U Omega>`` with the transformed
    two-point function.
    """
    A = 0.5 * build_wick_square(m, h).dense()
    t = one_particle_generator(m, h)
    F = sample_shell(m, f)
    G = F if g is None else sample_shell(m, g)
    phi_f = field_from_vector(m, F).dense()
    phi_g = field_from_vector(m, G).dense()
    cols = np.flatnonzero(m.interior(int(m.n_max) - core))
    bnd = m.boundary()
    vac = np.zeros(m.dimension, dtype=complex)
    vac[0] = 1.0
    per_s = []
    for s in s_values:
        U = scipy.linalg.expm(1j * s * A)
        Ts = scipy.linalg.expm(s * t)
        lhs = U.conj().T @ phi_f @ U
        rhs = field_from_vector(m, Ts @ F).dense()
        res = _column_norm(lhs - rhs, cols)
        leak = float(np.max(np.sum(np.abs(U[np.ix_(bnd, cols)]) ** 2, axis=0))) if cols.size else 0.0
        psi = U @ vac
        tp = complex(psi.conj() @ (phi_f @ (phi_g @ psi)))
        tp_res = abs(tp - discrete_two_point(m, Ts @ F, Ts @ G))
        per_s.append((float(s), res, leak, tp_res))
    leakage = max(r[2] for r in per_s)
    flag = leakage > threshold
    if flag and strict:
        raise InconclusiveError(f"truncation leakage {leakage:.3g} above {threshold:.3g}; raise n_max")
    return BogoliubovReport(max(r[1] for r in per_s), leakage, max(r[3] for r in per_s), flag, per_s)


# ------------------------------------------------------------ random suites
def random_element(rng, spatial_dim, scale=1.0):
    """Random real Gaussian test function on ``R^(D+1)``."""
    from .testfunctions import SchwartzElement

    d = spatial_dim + 1
    return SchwartzElement(
        amplitude=float(scale * rng.uniform(0.3, 1.0)),
        center=rng.normal(0.0, 0.5, d).tolist(),
        sigma=float(rng.uniform(0.4, 1.2)),
        kappa=rng.normal(0.0, 0.7, d).tolist(),
        phase=str(rng.choice(["cos", "sin"])),
    )


def random_sample(rng, m: DiscreteModel, scale=1.0):
    e = random_element(rng, m.spatial_dim, scale)
    return MassShellSample.from_element(e, m.model)
