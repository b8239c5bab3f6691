"""Left-invariant pseudohermitian geometry on 3-dimensional Lie algebras.

Everything is a constant on the group, so exterior derivatives reduce to the
structure constants: for a left-invariant 1-form alpha,

    d alpha(X, Y) = -alpha([X, Y]).

Conventions
-----------
* su(2):       [e1, e2] = 2 e3, [e2, e3] = 2 e1, [e3, e1] = 2 e2
* Heisenberg:  [e1, e2] = e3
* Contact basis (u1, u2) of ker theta: drop the basis vector e_k with the
  largest |theta_k|, set u_i = e_i - (theta_i / theta_k) e_k for the other two
  (in increasing order), and flip u2 if needed so that d theta(u1, u2) > 0.
  For theta = s sigma^3 on su(2) this gives (e1, -e2).
* J is the real 2x2 matrix of the complex structure in that basis, written
  [[a, b], [c, -a]] with a^2 + bc = -1; positivity d theta(X, JX) > 0 is c > 0.
* Z1 = lam (u1 - i J u1), the +i eigenvector of J, with |lam| fixed by
  -i d theta(Z1, Z1bar) = 1 and its phase by theta^1(e1) real positive
  (theta^1(u1) when e1 is not in the contact basis).
* Vol(theta) = |theta ^ d theta (e1, e2, e3)|.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateContact, NonCompatibleJ, SingularSystem

RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class LieAlgebra3:
    """Structure constants c[k, i, j] with [e_i, e_j] = sum_k c[k, i, j] e_k."""

    structure_constants: np.ndarray
    name: str = ""

    def __post_init__(self):
        c = np.asarray(self.structure_constants, dtype=float)
        if c.shape != (3, 3, 3):
            raise ValueError("structure constants must have shape (3, 3, 3)")
        if not np.array_equal(c, -np.transpose(c, (0, 2, 1))):
            raise ValueError("structure constants must be antisymmetric in the lower indices")
        c.setflags(write=False)
        object.__setattr__(self, "structure_constants", c)

    @property
    def c(self) -> np.ndarray:
        return self.structure_constants

    def bracket(self, u, v) -> np.ndarray:
        """[u, v] for (possibly complex) component vectors."""
        return np.einsum("kij,i,j->k", self.c, u, v)

    def d(self, alpha) -> np.ndarray:
        """d alpha as the antisymmetric matrix M[i, j] = d alpha(e_i, e_j)."""
        return -np.einsum("k,kij->ij", alpha, self.c)

    @staticmethod
    def from_brackets(brackets: dict[tuple[int, int], dict[int, float]], name: str = "") -> "LieAlgebra3":
        """Build from {(i, j): {k: coeff}} with 1-based indices, antisymmetrized."""
        c = np.zeros((3, 3, 3))
        for (i, j), out in brackets.items():
            for k, v in out.items():
                c[k - 1, i - 1, j - 1] = v
                c[k - 1, j - 1, i - 1] = -v
        return LieAlgebra3(c, name)


def su2() -> LieAlgebra3:
    return LieAlgebra3.from_brackets({(1, 2): {3: 2}, (2, 3): {1: 2}, (3, 1): {2: 2}}, "su(2)")


def heisenberg() -> LieAlgebra3:
    return LieAlgebra3.from_brackets({(1, 2): {3: 1}}, "heisenberg")


def jacobi_residuals(algebra: LieAlgebra3) -> np.ndarray:
    """[[e_i, e_j], e_k] + cyclic, for every triple, as a (3, 3, 3, 3) array."""
    c = algebra.c
    # [[e_i, e_j], e_k] = c[m, i, j] c[l, m, k] e_l
    term = np.einsum("mij,lmk->lijk", c, c)
    return term + np.transpose(term, (0, 2, 3, 1)) + np.transpose(term, (0, 3, 1, 2))


def jacobi_check(algebra: LieAlgebra3) -> bool:
    """True iff every Jacobi residual vanishes exactly."""
    return not np.any(jacobi_residuals(algebra))


def sigma(k: int) -> np.ndarray:
    """Dual basis covector sigma^k (1-based)."""
    out = np.zeros(3)
    out[k - 1] = 1.0
    return out


J_CANONICAL = np.array([[0.0, -1.0], [1.0, 0.0]])


def j_from_chart(a: float, b: float) -> np.ndarray:
    """J = [[a, b], [c, -a]] with c = -(1 + a^2)/b on the positive branch (needs b < 0)."""
    if b >= 0:
        raise NonCompatibleJ("positive branch needs b < 0")
    c = -(1.0 + a * a) / b
    return np.array([[a, b], [c, -a]])


@dataclass(frozen=True)
class LeftInvariantStructure:
    algebra: LieAlgebra3
    theta: np.ndarray
    J: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        object.__setattr__(self, "J", np.asarray(self.J, dtype=float))

    @property
    def dtheta(self) -> np.ndarray:
        return self.algebra.d(self.theta)

    def contact_volume(self) -> float:
        """theta ^ d theta (e1, e2, e3)."""
        th, M = self.theta, self.dtheta
        return float(th[0] * M[1, 2] - th[1] * M[0, 2] + th[2] * M[0, 1])

    def volume(self) -> float:
        return abs(self.contact_volume())

    def contact_basis(self) -> np.ndarray:
        """Rows u1, u2 spanning ker theta, oriented so d theta(u1, u2) > 0."""
        if abs(self.contact_volume()) <= 1e-300 or not np.any(self.theta):
            raise DegenerateContact("theta ^ d theta vanishes")
        th = self.theta
        k = int(np.argmax(np.abs(th)))
        rows = []
        for i in range(3):
            if i == k:
                continue
            u = np.zeros(3)
            u[i] = 1.0
            u[k] = -th[i] / th[k]
            rows.append(u)
        u1, u2 = rows
        if u1 @ self.dtheta @ u2 < 0:
            u2 = -u2
        return np.array([u1, u2])

    def check_J(self, tol: float = RESIDUAL_TOL) -> None:
        J = self.J
        if J.shape != (2, 2):
            raise NonCompatibleJ("J must be a 2x2 matrix")
        if np.max(np.abs(J @ J + np.eye(2))) > tol * max(1.0, float(np.max(np.abs(J))) ** 2):
            raise NonCompatibleJ("J^2 != -I")
        # d theta(u1, u2) > 0, so positivity of d theta(X, JX) is c = J[1, 0] > 0
        if J[1, 0] <= 0:
            raise NonCompatibleJ("d theta(X, JX) > 0 fails")


@dataclass(frozen=True)
class AdaptedCoframe:
    """T, Z1 and theta^1 as component vectors in the Lie algebra basis.

    ``theta`` is the contact form, ``basis`` the oriented contact basis used
    for J, and ``algebra`` the ambient Lie algebra.
    """

    T: np.ndarray
    Z1: np.ndarray
    theta1: np.ndarray
    theta: np.ndarray
    basis: np.ndarray
    algebra: LieAlgebra3

    @property
    def Z1bar(self) -> np.ndarray:
        return self.Z1.conj()

    def invariant_residuals(self) -> dict[str, float]:
        th, th1, T, Z = self.theta, self.theta1, self.T, self.Z1
        M = self.algebra.d(th)
        wedge = np.outer(th1, th1.conj()) - np.outer(th1.conj(), th1)
        return {
            "theta(T)-1": abs(th @ T - 1),
            "dtheta(T,.)": float(np.max(np.abs(T @ M))),
            "theta(Z1)": abs(th @ Z),
            "theta1(Z1)-1": abs(th1 @ Z - 1),
            "theta1(T)": abs(th1 @ T),
            "theta1(Z1bar)": abs(th1 @ Z.conj()),
            "levi": float(np.max(np.abs(M - 1j * wedge))),
        }


def reeb_vector(structure: LeftInvariantStructure) -> np.ndarray:
    """The unique T with theta(T) = 1 and d theta(T, .) = 0."""
    M = structure.dtheta
    if abs(structure.contact_volume()) <= 1e-300:
        raise DegenerateContact("theta ^ d theta vanishes")
    # kernel of the antisymmetric M is its Hodge dual vector
    v = np.array([M[1, 2], M[2, 0], M[0, 1]])
    return v / (structure.theta @ v)


def adapted_coframe(structure: LeftInvariantStructure) -> AdaptedCoframe:
    structure.check_J()
    T = reeb_vector(structure)
    U = structure.contact_basis()
    M = structure.dtheta
    J = structure.J
    u1 = U[0]
    Ju1 = J[0, 0] * U[0] + J[1, 0] * U[1]
    levi = float(u1 @ M @ Ju1)  # d theta(u1, J u1) > 0
    if levi <= 0:
        raise NonCompatibleJ("d theta(X, JX) > 0 fails")
    Z = (u1 - 1j * Ju1) / np.sqrt(2.0 * levi)
    # dual coframe: rows of the inverse of the column matrix [T, Z, Zbar]
    cols = np.column_stack([T, Z, Z.conj()])
    dual = np.linalg.inv(cols)
    theta1 = dual[1]
    # fix the phase: theta^1(e1) real positive (fallback theta^1(u1))
    probe = theta1[0] if abs(theta1[0]) > 1e-12 else theta1 @ u1
    phase = probe / abs(probe)
    Z = Z * phase
    theta1 = theta1 / phase
    return AdaptedCoframe(T=T, Z1=Z, theta1=theta1, theta=structure.theta, basis=U, algebra=structure.algebra)


@dataclass(frozen=True)
class PseudohermitianGeometry:
    """omega_1^1 = p theta^1 + q theta^1bar + r theta, torsion A_11, Webster W."""

    omega: tuple[complex, complex, complex]
    A11: complex
    W: float
    residual: float = 0.0
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def ricci(self) -> float:
        """R_11bar; equals W at n = 1."""
        return self.W

    @property
    def A_abs(self) -> float:
        return abs(self.A11)


def _two_form(M, u, v):
    return u @ M @ v


def solve_structure_equations(coframe: AdaptedCoframe) -> PseudohermitianGeometry:
    """Solve d theta^1 = theta^1 ^ omega + theta ^ tau^1 for omega and A, then W = d omega(Z1, Z1bar).

    With tau^1 = A_{1bar1bar} theta^1bar the equation evaluated on the frame
    pairs (Z, Zbar), (Z, T), (T, Zbar) reads q, r, A_{1bar1bar}; p follows
    from omega + omegabar = 0.  The system is solved by least squares over
    all six pairs of algebra basis vectors, and its residual is reported.
    """
    alg = coframe.algebra
    th, th1, T, Z = coframe.theta, coframe.theta1, coframe.T, coframe.Z1
    th1b = th1.conj()
    D = alg.d(th1)  # d theta^1 on basis pairs
    pairs = [(0, 1), (0, 2), (1, 2)]
    # unknowns x = (q, r, abar); d theta^1 = q th1^th1b + r th1^th + abar th^th1b
    def wedge(a, b, i, j):
        return a[i] * b[j] - a[j] * b[i]

    rows, rhs = [], []
    for i, j in pairs:
        rows.append([wedge(th1, th1b, i, j), wedge(th1, th, i, j), wedge(th, th1b, i, j)])
        rhs.append(D[i, j])
    A_mat = np.array(rows, dtype=complex)
    b = np.array(rhs, dtype=complex)
    if np.linalg.matrix_rank(A_mat, tol=1e-10) < 3:
        raise SingularSystem("structure equations are rank deficient; coframe not adapted")
    x, *_ = np.linalg.lstsq(A_mat, b, rcond=None)
    q, r, abar = x
    p = -np.conj(q)
    residual = float(np.max(np.abs(A_mat @ x - b)))
    if residual > 1e-9:
        raise SingularSystem(f"structure equations inconsistent (residual {residual:.3e})")
    # omega as a covector in the algebra basis
    omega = p * th1 + q * th1b + r * th
    W = -(omega @ alg.bracket(Z, Z.conj()))
    extra = {"reality": abs(r + np.conj(r)), "W_imag": float(abs(W.imag))}
    return PseudohermitianGeometry(
        omega=(complex(p), complex(q), complex(r)),
        A11=complex(np.conj(abar)),
        W=float(W.real),
        residual=residual,
        extra=extra,
    )


def structure_residual(coframe: AdaptedCoframe, omega, A11: complex) -> float:
    """max over basis pairs of |d theta^1 - theta^1 ^ omega - theta ^ tau^1|, tau^1 = A_1bar1bar theta^1bar."""
    th, th1 = coframe.theta, coframe.theta1
    p, q, r = omega
    om = p * th1 + q * th1.conj() + r * th
    tau = np.conj(A11) * th1.conj()
    wedge = lambda a, b: np.outer(a, b) - np.outer(b, a)  # noqa: E731
    R = coframe.algebra.d(th1) - wedge(th1, om) - wedge(th, tau)
    return float(np.max(np.abs(R)))


def geometry_of(structure: LeftInvariantStructure) -> PseudohermitianGeometry:
    return solve_structure_equations(adapted_coframe(structure))


def torsion_endomorphism(coframe: AdaptedCoframe, A11: complex) -> np.ndarray:
    """Real 2x2 matrix, in the contact basis, of A11 Zbar (x) theta^1 + conj."""
    U = coframe.basis
    # coordinates of Zbar in the contact basis (least squares on the 3-vectors)
    zb_coords, *_ = np.linalg.lstsq(U.T.astype(complex), coframe.Z1.conj(), rcond=None)
    out = np.zeros((2, 2))
    for j in range(2):
        img = A11 * (coframe.theta1 @ U[j]) * zb_coords
        out[:, j] = 2.0 * img.real
    return out
