"""Fast contractions over the weakly symmetric part of a tensor, plus Newton refinement.

The iterative solvers call g and h thousands of times, so the tensor is
block-symmetrized once and unfolded into an (m*n) x (m*n) symmetric matrix S.
With w = reshape(S @ kron(x, y), (m, n)):

    g = w @ y,    h = x @ w,    f = x @ w @ y

which agree with the reference contractions in tensor_core.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from biquad.tensor_core import BiquadraticTensor, FloatArray, block_symmetrize

logger = logging.getLogger(__name__)

_NEWTON_MAX_STEPS = 50
_NEWTON_MIN_DAMPING = 1.0 / 1024
_NEWTON_TARGET = 1e-15
# Relative smallest singular value below which a KKT Jacobian counts as singular.
_DEGENERACY_RATIO = 1e-7


@dataclass(frozen=True)
class NewtonResult:
    x: FloatArray
    y: FloatArray
    eigenvalue: float
    residual: float
    degenerate: bool


class ContractionKernel:
    def __init__(self, tensor: BiquadraticTensor) -> None:
        self.m = tensor.m
        self.n = tensor.n
        self.sym = block_symmetrize(tensor).entries
        self.matrix = self.sym.reshape(self.m * self.n, self.m * self.n)

    def gh(self, x: FloatArray, y: FloatArray) -> tuple[FloatArray, FloatArray]:
        w = (self.matrix @ np.kron(x, y)).reshape(self.m, self.n)
        return w @ y, x @ w

    def value(self, x: FloatArray, y: FloatArray) -> float:
        w = (self.matrix @ np.kron(x, y)).reshape(self.m, self.n)
        return float(x @ w @ y)

    def batch_gh(self, xs: FloatArray, ys: FloatArray) -> tuple[FloatArray, FloatArray]:
        """Row-wise g and h for matched batches xs (N, m), ys (N, n)."""
        w = np.einsum("iakb,Nk,Nb->Nia", self.sym, xs, ys, optimize=True)
        g = np.einsum("Nia,Na->Ni", w, ys)
        h = np.einsum("Nia,Ni->Na", w, xs)
        return g, h

    def grid_gh(self, xs: FloatArray, ys: FloatArray) -> tuple[FloatArray, FloatArray]:
        """g and h on the full product grid: shapes (P, Q, m) and (P, Q, n)."""
        g = np.einsum("iakb,qa,pk,qb->pqi", self.sym, ys, xs, ys, optimize=True)
        h = np.einsum("iakb,pi,pk,qb->pqa", self.sym, xs, xs, ys, optimize=True)
        return g, h

    def residual(self, x: FloatArray, y: FloatArray, lam: float) -> float:
        g, h = self.gh(x, y)
        return max(
            float(np.max(np.abs(g - lam * x))),
            float(np.max(np.abs(h - lam * y))),
            abs(float(np.linalg.norm(x)) - 1.0),
            abs(float(np.linalg.norm(y)) - 1.0),
        )

    def _system(self, z: FloatArray) -> FloatArray:
        m, n = self.m, self.n
        x, y, lam = z[:m], z[m : m + n], z[-1]
        g, h = self.gh(x, y)
        return np.concatenate(
            [g - lam * x, h - lam * y, [0.5 * (x @ x - 1.0), 0.5 * (y @ y - 1.0)]]
        )

    def jacobian(self, x: FloatArray, y: FloatArray, lam: float) -> FloatArray:
        """Jacobian of (g - lam x, h - lam y, |x|^2/2, |y|^2/2) in (x, y, lam)."""
        m, n = self.m, self.n
        s = self.sym
        gx = np.einsum("iakb,a,b->ik", s, y, y)
        gy = np.einsum("ickb,k,b->ic", s, x, y) + np.einsum("iakc,a,k->ic", s, y, x)
        hy = np.einsum("ijkc,i,k->jc", s, x, x)
        jac = np.zeros((m + n + 2, m + n + 1))
        jac[:m, :m] = gx - lam * np.eye(m)
        jac[:m, m : m + n] = gy
        jac[:m, -1] = -x
        jac[m : m + n, :m] = gy.T
        jac[m : m + n, m : m + n] = hy - lam * np.eye(n)
        jac[m : m + n, -1] = -y
        jac[m + n, :m] = x
        jac[m + n + 1, m : m + n] = y
        return jac

    def is_degenerate(self, x: FloatArray, y: FloatArray, lam: float) -> bool:
        """True when the solution is not isolated (rank-deficient KKT Jacobian)."""
        sv = np.linalg.svd(self.jacobian(x, y, lam), compute_uv=False)
        scale = max(float(sv[0]), 1.0)
        return bool(sv[-1] <= _DEGENERACY_RATIO * scale)

    def newton_refine(self, x: FloatArray, y: FloatArray, lam: float | None = None) -> NewtonResult:
        """Damped Gauss-Newton on the KKT system, halving the step until the defect drops."""
        m, n = self.m, self.n
        x = x / np.linalg.norm(x)
        y = y / np.linalg.norm(y)
        if lam is None:
            lam = self.value(x, y)
        z = np.concatenate([x, y, [lam]])
        fz = self._system(z)
        norm = float(np.linalg.norm(fz))
        for _ in range(_NEWTON_MAX_STEPS):
            if norm <= _NEWTON_TARGET:
                break
            jac = self.jacobian(z[:m], z[m : m + n], float(z[-1]))
            step = np.linalg.lstsq(jac, -fz, rcond=None)[0]
            damping = 1.0
            while damping >= _NEWTON_MIN_DAMPING:
                trial = z + damping * step
                f_trial = self._system(trial)
                trial_norm = float(np.linalg.norm(f_trial))
                if trial_norm < norm:
                    z, fz, norm = trial, f_trial, trial_norm
                    break
                damping /= 2
            else:
                break
        x = z[:m] / np.linalg.norm(z[:m])
        y = z[m : m + n] / np.linalg.norm(z[m : m + n])
        lam = self.value(x, y)
        return NewtonResult(
            x=x,
            y=y,
            eigenvalue=lam,
            residual=self.residual(x, y, lam),
            degenerate=self.is_degenerate(x, y, lam),
        )
