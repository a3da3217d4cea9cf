"""Single-qubit Lindblad generators and their representations.

Conventions used throughout the package:

* Hamiltonian ``H = 1/2 (h_x sx + h_y sy + h_z sz)``, so ``|h|`` is the angular
  rate (rad/us) at which the Bloch vector precesses, ``dr/dt = h x r``, and
  ``h_x`` equals the Rabi frequency of a resonant drive.
* ``|0>`` is the ``sz = +1`` eigenstate, Bloch vector ``(0, 0, +1)`` (the north
  pole), identified with the ion's ``|down>`` level.
* Time is in microseconds and rates in 1/us or rad/us.
* The generator is the real 4x4 matrix ``G[mu, nu] = 1/2 Tr[s_mu L(s_nu)]``
  with ``s_0 = I``.  It acts on the affine Bloch vector ``(1, r)``; row 0 is
  zero because the dynamics preserve trace.
* The dissipator is written in the Pauli operator basis,
  ``D(rho) = sum_ij K_ij (s_i rho s_j - 1/2 {s_j s_i, rho})``, with the
  Kossakowski matrix ``K = V^dagger V`` for a lower-triangular ``V``.  Any such
  ``V`` gives a completely positive generator, which is why the optimizer
  searches over ``V`` rather than ``K``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)
PAULI_BASIS = (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)

FIDUCIAL_LABELS = ("0", "1", "+", "i")
FIDUCIAL_BLOCH = np.array(
    [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
)
OBSERVABLE_LABELS = ("x", "y", "z")

PARAM_LAYOUT = (
    "h_x", "h_y", "h_z",
    "V_00", "V_11", "V_22",
    "Re_V_10", "Im_V_10",
    "Re_V_20", "Im_V_20",
    "Re_V_21", "Im_V_21",
)
_LOWER = ((1, 0), (2, 0), (2, 1))


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LindbladParams:
    """Twelve real numbers defining a single-qubit Lindbladian.

    ``h`` holds the Hamiltonian coefficients (rad/us).  ``V`` is the
    lower-triangular Cholesky-type factor of the Kossakowski matrix, with
    real non-negative diagonal, in units of (rad/us)**0.5.
    """

    h: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        V = np.asarray(self.V, dtype=complex)
        if h.shape != (3,) or V.shape != (3, 3):
            raise ValueError("h must have shape (3,) and V shape (3, 3)")
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(V))):
            raise ValueError("parameters must be finite")
        if np.any(np.triu(V, 1) != 0):
            raise ValueError("V must be lower triangular")
        diag = np.diag(V)
        if np.any(diag.imag != 0) or np.any(diag.real < 0):
            raise ValueError("V must have a real non-negative diagonal")
        object.__setattr__(self, "h", _frozen(h, float))
        object.__setattr__(self, "V", _frozen(V, complex))

    @classmethod
    def zeros(cls):
        return cls(np.zeros(3), np.zeros((3, 3), dtype=complex))

    @classmethod
    def from_flat(cls, x):
        """Build params from the 12-vector layout in ``PARAM_LAYOUT``.

        Negative diagonal entries are accepted: the corresponding row of
        ``V`` is negated, which leaves ``K = V^dagger V`` unchanged.
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (12,):
            raise ValueError(f"expected 12 parameters, got shape {x.shape}")
        V = _flat_to_factor(x[3:])
        signs = np.where(np.diag(V).real < 0, -1.0, 1.0)
        return cls(x[:3], signs[:, None] * V)

    def to_flat(self):
        out = np.empty(12)
        out[:3] = self.h
        out[3:6] = np.diag(self.V).real
        for n, (i, j) in enumerate(_LOWER):
            out[6 + 2 * n] = self.V[i, j].real
            out[7 + 2 * n] = self.V[i, j].imag
        return out

    @property
    def kossakowski(self):
        return self.V.conj().T @ self.V

    @classmethod
    def from_kossakowski(cls, h, K, atol=1e-12):
        return cls(h, kossakowski_factor(K, atol=atol))

    def scaled(self, factor):
        """Params whose generator is ``factor`` times this one's."""
        if factor < 0:
            raise ValueError("scale factor must be non-negative")
        return LindbladParams(self.h * factor, self.V * np.sqrt(factor))


@dataclass(frozen=True)
class JumpTerm:
    rate: float
    operator: np.ndarray

    def __post_init__(self):
        op = np.asarray(self.operator, dtype=complex)
        if op.shape != (2, 2):
            raise ValueError("jump operator must be 2x2")
        object.__setattr__(self, "rate", float(self.rate))
        object.__setattr__(self, "operator", _frozen(op, complex))


@dataclass(frozen=True)
class GeometricDecomposition:
    """Rotation, dilation and displacement content of a generator.

    ``dilation_rates[i]`` is the stretch rate along ``dilation_axes[i]``
    (rows are the orthonormal principal axes).  Negative rates contract.
    """

    rotation_axis: np.ndarray
    rotation_rate: float
    dilation_axes: np.ndarray
    dilation_rates: np.ndarray
    displacement: np.ndarray
    degenerate: bool

    def reassemble(self):
        """Return ``(A, c)`` such that ``dr/dt = A r + c``."""
        w = self.rotation_rate * self.rotation_axis
        A = cross_matrix(w) + self.dilation_axes.T @ np.diag(self.dilation_rates) @ self.dilation_axes
        return A, np.array(self.displacement)


def _flat_to_factor(v9):
    V = np.zeros((3, 3), dtype=complex)
    V[np.diag_indices(3)] = v9[:3]
    for n, (i, j) in enumerate(_LOWER):
        V[i, j] = v9[3 + 2 * n] + 1j * v9[4 + 2 * n]
    return V


def kossakowski_factor(K, atol=1e-12):
    """Lower-triangular ``V`` with ``V^dagger V = K`` for PSD Hermitian ``K``.

    Handles rank-deficient ``K``.  Raises ``ValueError`` when ``K`` is not
    positive semidefinite within ``atol`` (relative to its largest entry).
    """
    K = np.asarray(K, dtype=complex)
    if K.shape != (3, 3):
        raise ValueError("Kossakowski matrix must be 3x3")
    scale = max(1.0, np.abs(K).max())
    if np.abs(K - K.conj().T).max() > atol * scale:
        raise ValueError("Kossakowski matrix is not Hermitian")
    K = 0.5 * (K + K.conj().T)
    if np.linalg.eigvalsh(K).min() < -atol * scale * 10:
        raise ValueError("Kossakowski matrix is not positive semidefinite")
    # V^dagger V = K with V lower triangular <=> U U^dagger = J K J with
    # U = J V^dagger J lower triangular, J the exchange matrix.
    Kr = K[::-1, ::-1]
    U = np.zeros((3, 3), dtype=complex)
    tol = atol * scale * 10
    for j in range(3):
        d = Kr[j, j].real - np.sum(np.abs(U[j, :j]) ** 2)
        if d <= tol:
            continue
        U[j, j] = np.sqrt(d)
        for i in range(j + 1, 3):
            U[i, j] = (Kr[i, j] - U[i, :j] @ U[j, :j].conj()) / U[j, j]
    return U[::-1, ::-1].conj().T


def cross_matrix(w):
    """Matrix ``W`` with ``W @ r == np.cross(w, r)``."""
    return np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])


def hamiltonian_matrix(h):
    h = np.asarray(h, dtype=float)
    return 0.5 * (h[0] * SIGMA_X + h[1] * SIGMA_Y + h[2] * SIGMA_Z)


def bloch_to_density(r):
    r = np.asarray(r, dtype=float)
    return 0.5 * (IDENTITY + r[0] * SIGMA_X + r[1] * SIGMA_Y + r[2] * SIGMA_Z)


def density_to_bloch(rho):
    rho = np.asarray(rho)
    return np.array([np.trace(s @ rho).real for s in PAULIS])


def check_density_matrix(rho, atol=1e-12, psd_tol=1e-9):
    """Raise ``ValueError`` unless ``rho`` is a valid qubit density matrix."""
    rho = np.asarray(rho)
    if rho.shape != (2, 2):
        raise ValueError("density matrix must be 2x2")
    if np.abs(rho - rho.conj().T).max() > atol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > atol:
        raise ValueError("density matrix does not have unit trace")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -psd_tol:
        raise ValueError("density matrix is not positive semidefinite")


def _lindblad_action(H, jumps, X):
    out = -1j * (H @ X - X @ H)
    for term in jumps:
        L = term.operator
        Ld = L.conj().T
        LdL = Ld @ L
        out = out + term.rate * (L @ X @ Ld - 0.5 * (LdL @ X + X @ LdL))
    return out


def _check_rates(jumps):
    for n, term in enumerate(jumps):
        if term.rate < 0:
            raise ValueError(f"jump term {n} has negative rate {term.rate}")


def lindblad_rhs(H, jumps, rho):
    """Right-hand side ``-i[H, rho] + sum_n g_n D[L_n](rho)`` of the master equation."""
    H = np.asarray(H, dtype=complex)
    _check_rates(jumps)
    check_density_matrix(rho)
    return _lindblad_action(H, jumps, np.asarray(rho, dtype=complex))


def superoperator_generator(H, jumps):
    """Generator of ``(H, jumps)`` by acting on each Pauli basis element."""
    H = np.asarray(H, dtype=complex)
    _check_rates(jumps)
    G = np.empty((4, 4))
    for nu, s_nu in enumerate(PAULI_BASIS):
        image = _lindblad_action(H, jumps, s_nu)
        for mu, s_mu in enumerate(PAULI_BASIS):
            G[mu, nu] = 0.5 * np.trace(s_mu @ image).real
    return G


def _dissipator_tensor():
    # T[mu, nu, i, j] = 1/2 Tr[s_mu (s_i s_nu s_j - 1/2 {s_j s_i, s_nu})]
    T = np.zeros((4, 4, 3, 3), dtype=complex)
    for i, si in enumerate(PAULIS):
        for j, sj in enumerate(PAULIS):
            ji = sj @ si
            for nu, s_nu in enumerate(PAULI_BASIS):
                image = si @ s_nu @ sj - 0.5 * (ji @ s_nu + s_nu @ ji)
                for mu, s_mu in enumerate(PAULI_BASIS):
                    T[mu, nu, i, j] = 0.5 * np.trace(s_mu @ image)
    return T


_DISSIPATOR_TENSOR = _dissipator_tensor()


def hamiltonian_generator(h):
    G = np.zeros((4, 4))
    G[1:, 1:] = cross_matrix(h)
    return G


def dissipator_generator(K):
    return np.einsum("ij,mnij->mn", K, _DISSIPATOR_TENSOR).real


def params_to_generator(p):
    """4x4 affine-Pauli generator of ``p``."""
    return hamiltonian_generator(p.h) + dissipator_generator(p.kossakowski)


def kossakowski_to_jumps(V, atol=1e-14):
    """Diagonalize ``K = V^dagger V`` into jump terms ``(g_n, sum_m v_nm s_m)``.

    Eigenvalues below ``atol`` times the largest one are dropped.
    """
    K = np.asarray(V).conj().T @ np.asarray(V)
    evals, evecs = np.linalg.eigh(K)
    top = evals.max() if evals.size else 0.0
    jumps = []
    for g, v in zip(evals, evecs.T):
        if top <= 0 or g <= atol * top:
            continue
        L = v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z
        jumps.append(JumpTerm(g, L))
    return jumps


def jumps_to_params(jumps, H, atol=1e-12):
    """Fold ``(H, jumps)`` into :class:`LindbladParams`.

    A jump ``L = a I + B`` with traceless ``B`` contributes ``B`` to the
    Kossakowski matrix and the Hamiltonian ``(i/2)(a* B - a B^dagger)`` times
    its rate; both pieces together reproduce ``D[L]`` exactly.  The identity
    part of ``H`` is a global phase and is dropped.
    """
    _check_rates(jumps)
    H = np.array(H, dtype=complex)
    if np.abs(H - H.conj().T).max() > atol * max(1.0, np.abs(H).max()):
        raise ValueError("Hamiltonian is not Hermitian")
    K = np.zeros((3, 3), dtype=complex)
    for term in jumps:
        L = term.operator
        a = 0.5 * np.trace(L)
        b = np.array([0.5 * np.trace(s @ L) for s in PAULIS])
        B = L - a * IDENTITY
        K += term.rate * np.outer(b, b.conj())
        H = H + term.rate * 0.5j * (np.conj(a) * B - a * B.conj().T)
    h = np.array([np.trace(s @ H).real for s in PAULIS])
    return LindbladParams.from_kossakowski(h, K, atol=atol)


def _check_time(t):
    if not np.isfinite(t) or t < 0:
        raise ValueError(f"evolution time must be finite and non-negative, got {t}")


def propagator(G, t):
    """``exp(G t)`` for ``t >= 0``."""
    _check_time(t)
    return expm(np.asarray(G, dtype=float) * t)


def propagate(G, r0, t):
    """Bloch vector at time ``t`` starting from ``r0``."""
    x = np.concatenate(([1.0], np.asarray(r0, dtype=float)))
    return (propagator(G, t) @ x)[1:]


def _uniform_step(times, rtol=1e-9):
    steps = np.diff(times)
    if steps.size and np.all(np.abs(steps - steps[0]) <= rtol * max(steps[0], 1e-300)):
        return steps[0]
    return None


def _matrix_powers(E, count):
    """``[E**0, E**1, ..., E**(count-1)]`` stacked, by batched doubling."""
    out = np.empty((count,) + E.shape)
    out[0] = np.eye(E.shape[0])
    filled, block = 1, E
    while filled < count:
        take = min(filled, count - filled)
        out[filled:filled + take] = out[:take] @ block
        filled += take
        block = block @ block
    return out


_FIDUCIAL_AFFINE = np.vstack([np.ones(4), FIDUCIAL_BLOCH.T])


def grid_propagators(G, times):
    """``exp(G t)`` for every ``t`` in ``times``, shape ``(len(times), 4, 4)``.

    On a uniform grid the step propagator is computed once and raised to
    successive powers.
    """
    times = np.asarray(times, dtype=float)
    G = np.asarray(G, dtype=float)
    for t in times[:1]:
        _check_time(t)
    dt = _uniform_step(times)
    if dt is not None and times.size > 1:
        powers = _matrix_powers(expm(G * dt), times.size)
        return powers if times[0] == 0 else powers @ expm(G * times[0])
    return np.array([propagator(G, t) for t in times])


def fiducial_trajectories(G, times):
    """Bloch vectors of the four fiducial states, shape ``(len(times), 4, 3)``."""
    X = grid_propagators(G, times) @ _FIDUCIAL_AFFINE
    return X[:, 1:, :].transpose(0, 2, 1)


def outcome_distribution(G, k, b, t):
    """Probabilities ``(P(+1), P(-1))`` of measuring Pauli ``b`` on fiducial ``k`` at ``t``.

    ``k`` indexes ``(|0>, |1>, |+>, |i>)``; ``b`` indexes ``(x, y, z)`` or is
    one of the labels ``"x"``, ``"y"``, ``"z"``.
    """
    if isinstance(b, str):
        if b not in OBSERVABLE_LABELS:
            raise ValueError(f"unknown observable {b!r}")
        b = OBSERVABLE_LABELS.index(b)
    if not 0 <= k < 4:
        raise IndexError(f"fiducial index {k} out of range")
    if not 0 <= b < 3:
        raise IndexError(f"observable index {b} out of range")
    r = propagate(G, FIDUCIAL_BLOCH[k], t)
    p = min(1.0, max(0.0, 0.5 * (1.0 + r[b])))
    return p, 1.0 - p


def geometric_decomposition(G, tol=1e-9):
    """Split ``dr/dt = A r + c`` into rotation, dilation and displacement."""
    G = np.asarray(G, dtype=float)
    A = G[1:, 1:]
    W = 0.5 * (A - A.T)
    S = 0.5 * (A + A.T)
    w = np.array([W[2, 1], W[0, 2], W[1, 0]])
    rate = float(np.linalg.norm(w))
    axis = w / rate if rate > 0 else np.array([0.0, 0.0, 1.0])

    evals, evecs = np.linalg.eigh(S)
    axes = []
    for v in evecs.T:
        nz = np.flatnonzero(np.abs(v) > 1e-12)
        axes.append(v if v[nz[0]] > 0 else -v)
    scale = tol * max(1.0, np.abs(S).max())
    # Descending rate; rates within tolerance tie and fall back to axis order.
    order = sorted(
        range(3),
        key=lambda n: (-np.round(evals[n] / scale) * scale, *(-axes[n])),
    )
    rates = evals[order]
    degenerate = bool(np.any(np.abs(np.diff(np.sort(evals))) <= scale))
    return GeometricDecomposition(
        rotation_axis=axis,
        rotation_rate=rate,
        dilation_axes=np.array([axes[n] for n in order]),
        dilation_rates=np.array(rates),
        displacement=G[1:, 0].copy(),
        degenerate=degenerate,
    )


def bloch_snapshot(G, t):
    """Affine Bloch map ``r -> M r + v`` of ``exp(G t)``."""
    P = propagator(G, t)
    return P[1:, 1:].copy(), P[1:, 0].copy()


def choi_matrix(P):
    """Choi matrix ``sum_ij |i><j| (x) Phi(|i><j|)`` of a 4x4 Pauli transfer map."""
    P = np.asarray(P, dtype=float)
    C = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            E = np.zeros((2, 2), dtype=complex)
            E[i, j] = 1.0
            a = np.array([np.trace(s @ E) for s in PAULI_BASIS])
            b = P @ a
            image = 0.5 * sum(b[m] * PAULI_BASIS[m] for m in range(4))
            C[2 * i:2 * i + 2, 2 * j:2 * j + 2] = image
    return C


def is_completely_positive(P, tol=1e-8):
    return bool(np.linalg.eigvalsh(choi_matrix(P)).min() >= -tol)
