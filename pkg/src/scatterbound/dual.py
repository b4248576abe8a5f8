"""Certified lower bounds on the cross-section objective via a convex dual.

Primal (per pixel i, contrast chi_i in [chi_-, chi_+]):

    minimize   f(Phi) = -2 Im<E_inc, Phi>
    subject to Phi = chi E,  E = E_inc + G Phi,  ||E - E_ref|| <= alpha ||E_ref||.

Pairing the field equation with a multiplier V, relaxing the norm constraint
with lambda > 0 and minimizing the Lagrangian pixel by pixel over (E_i, chi_i)
gives, for ANY V and lambda > 0,

    d(V, lambda) = 2 Re<V, E_ref - E_inc> - dA sum_i beta_i - lambda alpha^2 ||E_ref||^2,
    beta_i = max_{s in {chi_-, chi_+}} |V_i - s S_i|^2 / lambda + 2 s Re(S_i^* . E_ref,i),
    S = G^H V + c,

a lower bound on the primal optimum (weak duality). Because f is linear its
conjugate is the indicator of a single point, which pins the offset c to a
fixed multiple of i E_inc; the multiple depends on the real pairing used for
the conjugate and is selected by :data:`CONVENTIONS` (``"i"`` is the one that
survives the weak-duality calibration, see ``calibrate_convention``).

The solver maximizes d over (V, log lambda) after replacing the pointwise max
by a log-sum-exp with a decreasing temperature, polishes the result through
the endpoint-weight saddle formulation, and always reports the exact
(unsmoothed) value at the final point, so the returned number is a valid bound
regardless of how well the optimization converged.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.optimize import minimize

from .geometry import FieldArray
from .greens import GreensOperator

CONVENTIONS = {"i": 1j, "2i": 2j, "-i": -1j, "-2i": -2j}
DEFAULT_CONVENTION = "i"
LAMBDA_FLOOR = 1e-12  # relative to ||E_inc||^2
LAMBDA_CEIL = 1e12  # same units; alpha = 0 pushes lambda to infinity


def fenchel_eliminate(E_inc: FieldArray, V: FieldArray, G: GreensOperator,
                      convention: str = DEFAULT_CONVENTION,
                      objective: str = "cross_section") -> FieldArray:
    """S = G^H V + c with c = (convention factor) * E_inc."""
    if objective != "cross_section":
        raise NotImplementedError(f"only the linear cross-section objective is supported, "
                                  f"got {objective!r}")
    return V.like(G.adjoint @ V.values + CONVENTIONS[convention] * E_inc.values)


@dataclass
class DualCertificate:
    V: np.ndarray
    S: np.ndarray
    lam: float
    beta: np.ndarray
    value: float
    alpha: float
    lower: float
    upper: float
    convention: str = DEFAULT_CONVENTION
    residuals: dict = field(default_factory=dict)
    converged: bool = True
    iterations: int = 0
    problem: dict = field(default_factory=dict)

    @property
    def bound(self) -> float:
        """Upper bound on 2 Im<E_inc, Phi> (objective units)."""
        return -self.value

    def to_json(self) -> dict:
        out = asdict(self)
        out["V"] = _complex_pairs(self.V)
        out["S"] = _complex_pairs(self.S)
        out["beta"] = [float(b) for b in self.beta]
        return out

    @classmethod
    def from_json(cls, data: dict) -> DualCertificate:
        data = dict(data)
        data["V"] = _from_pairs(data["V"])
        data["S"] = _from_pairs(data["S"])
        data["beta"] = np.asarray(data["beta"], dtype=float)
        return cls(**data)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1))

    @classmethod
    def load(cls, path) -> DualCertificate:
        return cls.from_json(json.loads(Path(path).read_text()))


def _complex_pairs(z) -> list:
    return [[float(v.real), float(v.imag)] for v in np.asarray(z).ravel()]


def _from_pairs(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
    return arr[:, 0] + 1j * arr[:, 1]


class DualProblem:
    """Data of one dual program plus its exact and smoothed objectives."""

    def __init__(self, G: GreensOperator, E_inc: FieldArray, E_ref: FieldArray,
                 lower: float, upper: float, alpha: float,
                 convention: str = DEFAULT_CONVENTION):
        if not np.isfinite(alpha) or alpha < 0:
            raise ValueError("alpha must be finite and nonnegative; an infinite budget "
                             "means the cross-section is unbounded")
        if lower > upper:
            raise ValueError("lower contrast bound exceeds upper bound")
        if convention not in CONVENTIONS:
            raise ValueError(f"unknown pairing convention {convention!r}")
        self.G, self.E_inc, self.E_ref = G, E_inc, E_ref
        self.lower, self.upper, self.alpha = float(lower), float(upper), float(alpha)
        self.convention = convention
        self.d = G.polarization.ncomp
        self.area = G.grid.cell_area
        self.GH = G.adjoint
        self.offset = CONVENTIONS[convention] * E_inc.values
        self.b = E_ref.values - E_inc.values
        self.ref_norm2 = self.area * np.vdot(E_ref.values, E_ref.values).real
        self.inc_norm2 = self.area * np.vdot(E_inc.values, E_inc.values).real
        self.lam_min = LAMBDA_FLOOR * self.inc_norm2
        self.lam_max = LAMBDA_CEIL * self.inc_norm2
        self.endpoints = np.array([self.lower, self.upper])

    @property
    def size(self) -> int:
        return self.G.size

    def _terms(self, V, lam):
        S = self.GH @ V + self.offset
        w = V[None, :] - self.endpoints[:, None] * S[None, :]
        sq = (np.abs(w) ** 2).reshape(2, -1, self.d).sum(2)
        lin = np.real(S.conj() * self.E_ref.values).reshape(-1, self.d).sum(1)
        q = sq / lam + 2 * self.endpoints[:, None] * lin[None, :]
        return S, w, sq, q

    def exact(self, V, lam) -> tuple[float, np.ndarray, np.ndarray]:
        S, _, _, q = self._terms(V, lam)
        beta = q.max(axis=0)
        value = (2 * self.area * np.vdot(V, self.b).real - self.area * beta.sum()
                 - lam * self.alpha**2 * self.ref_norm2)
        return float(value), S, beta

    def smoothed(self, V, lam, tau):
        """Log-sum-exp smoothed objective (a lower bound on the exact one) and its
        gradient with respect to (Re V, Im V, lambda)."""
        S, w, sq, q = self._terms(V, lam)
        top = q.max(axis=0)
        ex = np.exp((q - top) / tau)
        z = ex.sum(axis=0)
        p = ex / z
        beta = top + tau * np.log(z)
        value = (2 * self.area * np.vdot(V, self.b).real - self.area * beta.sum()
                 - lam * self.alpha**2 * self.ref_norm2)
        pf = np.repeat(p, self.d, axis=1)                  # (2, n)
        u_v = (pf * w).sum(0) / lam
        u_s = (self.endpoints[:, None] * pf * w).sum(0) / lam
        s_avg = (self.endpoints[:, None] * pf).sum(0)
        dv = self.area * (self.b - u_v + self.G.matrix @ (u_s - s_avg * self.E_ref.values))
        dlam = self.area * (p * sq).sum() / lam**2 - self.alpha**2 * self.ref_norm2
        return value, dv, dlam, q

    def weighted_optimum(self, p, factors, hessian: bool = False):
        """Maximize the Lagrangian over (V, lambda) for fixed endpoint weights.

        ``p`` is the weight on the upper endpoint per pixel. The Lagrangian is
        concave quadratic in V (a linear solve) and of the form a lam - b / lam
        in lambda. Returns (value, gradient in p, V, lam[, Hessian in p]); the
        dual is the minimum of this value over p in [0, 1]^n.
        """
        M_lo, M_up = factors
        w_up = np.repeat(p, self.d)
        w_lo = 1.0 - w_up
        c, A = self.offset, self.area
        Q = M_lo.conj().T @ (w_lo[:, None] * M_lo) + M_up.conj().T @ (w_up[:, None] * M_up)
        r = (self.lower * (M_lo.conj().T @ (w_lo * c))
             + self.upper * (M_up.conj().T @ (w_up * c)))
        h = self.b - self.G.matrix @ ((self.lower * w_lo + self.upper * w_up)
                                      * self.E_ref.values)
        C0 = (self.lower**2 * (w_lo * np.abs(c) ** 2).sum()
              + self.upper**2 * (w_up * np.abs(c) ** 2).sum())
        fac = cho_factor(Q)
        Kr, Kh = cho_solve(fac, r), cho_solve(fac, h)
        slope = A * np.vdot(h, Kh).real - self.alpha**2 * self.ref_norm2
        curv = max(A * (C0 - np.vdot(r, Kr).real), 0.0)
        lam = np.sqrt(curv / -slope) if slope < 0 else self.lam_max
        lam_free = self.lam_min < lam < self.lam_max
        lam = float(np.clip(lam, self.lam_min, self.lam_max))
        V = Kr + lam * Kh
        S, w, sq, q = self._terms(V, lam)
        beta = (1 - p) * q[0] + p * q[1]
        value = (2 * A * np.vdot(V, self.b).real - A * beta.sum()
                 - lam * self.alpha**2 * self.ref_norm2)
        grad = -A * (q[1] - q[0])
        if not hessian:
            return float(value), grad, V, lam
        # Hessian of the value in p: -A^2 J H^-1 J^T with J the Jacobian of the
        # endpoint gaps and H the Lagrangian Hessian, both in (Re V, Im V, lam).
        N, d = self.size, self.d
        rows = (2 / lam) * (w[1].conj()[:, None] * M_up - w[0].conj()[:, None] * M_lo)
        rows += 2 * (self.upper - self.lower) * self.E_ref.values.conj()[:, None] * self.GH
        a = rows.reshape(-1, d, N).sum(1)
        J = np.hstack([a.real, -a.imag])
        RQ = np.block([[Q.real, -Q.imag], [Q.imag, Q.real]])
        H = -(2 * A / lam) * RQ
        if lam_free:
            z = np.concatenate([V.real, V.imag])
            rho = np.concatenate([r.real, r.imag])
            phi = z @ RQ @ z - 2 * z @ rho + C0
            cross = (A / lam**2) * (2 * RQ @ z - 2 * rho)
            J = np.hstack([J, (-(sq[1] - sq[0]) / lam**2)[:, None]])
            corner = np.array([[-(2 * A / lam**3) * phi]])
            H = np.block([[H, cross[:, None]], [cross[None, :], corner]])
        hess = -A**2 * J @ np.linalg.solve(H, J.T)
        return float(value), grad, V, lam, 0.5 * (hess + hess.T)

    def certificate(self, V, lam, **extra) -> DualCertificate:
        if lam < self.lam_min:
            raise ValueError(f"lambda={lam:.3e} below the floor {self.lam_min:.3e}")
        value, S, beta = self.exact(V, lam)
        cert = DualCertificate(np.array(V), S, float(lam), beta, value, self.alpha,
                               self.lower, self.upper, self.convention, **extra)
        cert.residuals = constraint_residuals(cert, self.G, self.E_inc, self.E_ref)
        return cert


def dual_objective(V: FieldArray, lam: float, G: GreensOperator, E_inc: FieldArray,
                   E_ref: FieldArray, lower: float, upper: float, alpha: float,
                   convention: str = DEFAULT_CONVENTION) -> tuple[float, DualCertificate]:
    """Exact dual value at (V, lambda) with beta at its smallest feasible value.

    Any input gives a valid lower bound on the constrained primal optimum.
    """
    prob = DualProblem(G, E_inc, E_ref, lower, upper, alpha, convention)
    values = V.values if isinstance(V, FieldArray) else np.asarray(V, dtype=complex)
    cert = prob.certificate(values, lam)
    return cert.value, cert


def _polish(prob: DualProblem, x: np.ndarray, tau: float, max_iter: int,
            newton_steps: int = 8):
    """Refine a smoothed optimum by minimizing over the endpoint weights."""
    n = prob.size
    V, lam = x[:n] + 1j * x[n:2 * n], float(np.exp(x[-1]))
    _, _, _, q = prob.smoothed(V, lam, tau)
    p0 = np.clip(0.5 * (1 + np.tanh((q[1] - q[0]) / (2 * tau))), 0.0, 1.0)
    eye = np.eye(n)
    factors = (eye - prob.lower * prob.GH, eye - prob.upper * prob.GH)
    scale = prob.inc_norm2

    def fun(p):
        value, grad, _, _ = prob.weighted_optimum(p, factors)
        return value / scale, grad / scale

    try:
        res = minimize(fun, p0, jac=True, method="L-BFGS-B", bounds=[(0.0, 1.0)] * p0.size,
                       options={"maxiter": max_iter, "ftol": 0.0, "gtol": 1e-14})
        p = res.x
        _, _, V, lam = prob.weighted_optimum(p, factors)
        best = (prob.exact(V, lam)[0], V, lam)
        # L-BFGS stalls once roundoff in the value dominates; Newton on the
        # gradient (the endpoint gaps) finishes the job.
        def kkt(p, grad):
            # projected gradient: zero exactly at the minimizer over the box
            return np.abs(np.clip(p - grad, 0.0, 1.0) - p).max()

        _, grad, _, _, hess = prob.weighted_optimum(p, factors, hessian=True)
        for _ in range(newton_steps):
            free = ~(((p <= 0) & (grad > 0)) | ((p >= 1) & (grad < 0)))
            if not free.any():
                break
            step = np.zeros_like(p)
            step[free] = -np.linalg.lstsq(hess[np.ix_(free, free)], grad[free], rcond=None)[0]
            current = kkt(p, grad)
            for t in 0.5 ** np.arange(12):
                trial = np.clip(p + t * step, 0.0, 1.0)
                _, g_trial, V, lam, h_trial = prob.weighted_optimum(trial, factors, hessian=True)
                if kkt(trial, g_trial) < current:
                    break
            else:
                break
            p, grad, hess = trial, g_trial, h_trial
            value = prob.exact(V, lam)[0]
            if value > best[0]:
                best = (value, V, lam)
    except (LinAlgError, ValueError, np.linalg.LinAlgError):
        return None
    return best[1], best[2]


def _phase_reference(values: np.ndarray) -> complex:
    """Unit factor that rotates ``values`` so their sum is real and positive."""
    total = values.sum()
    if abs(total) <= 1e-8 * np.abs(values).sum():
        total = values[np.flatnonzero(np.abs(values) > 0)[0]] if np.any(values) else 1.0
    return complex(np.conj(total) / abs(total))


def solve_dual(G: GreensOperator, E_inc: FieldArray, E_ref: FieldArray,
               lower: float, upper: float, alpha: float,
               convention: str = DEFAULT_CONVENTION, warm_start: DualCertificate | None = None,
               stages: int = 6, decay: float = 0.1, max_iter: int = 20000,
               final_tau: float = 1e-11, polish: bool = True,
               polish_iter: int = 500) -> DualCertificate:
    """Maximize the dual over (V, log lambda) and return an exact certificate.

    Temperatures start at the median per-pixel gap between the two endpoint
    terms and shrink by ``decay`` per stage; a last stage at ``final_tau``
    (relative to the mean incident intensity) sharpens the max. With ``polish``
    the smoothed optimum is then refined over the per-pixel endpoint weights
    (see :meth:`DualProblem.weighted_optimum`), which resolves pixels where both
    endpoints tie far more precisely than smoothing can. If ``warm_start`` is given
    and its point scores better on this problem than the optimized one, it is
    returned instead; chained over a decreasing alpha grid this makes the
    certified values monotone by construction.
    """
    target = DualProblem(G, E_inc, E_ref, lower, upper, alpha, convention)
    # The dual is covariant under E -> cE, V -> cV with |c| = 1; optimizing in a
    # fixed phase frame makes the result independent of the input phase.
    rot = _phase_reference(E_inc.values)
    prob = DualProblem(G, E_inc.like(rot * E_inc.values), E_ref.like(rot * E_ref.values),
                       lower, upper, alpha, convention)
    n = prob.size
    scale = prob.inc_norm2
    log_floor = np.log(prob.lam_min)
    if warm_start is not None:
        Vw = rot * warm_start.V
        x = np.concatenate([Vw.real, Vw.imag,
                            [np.log(np.clip(warm_start.lam, prob.lam_min, prob.lam_max))]])
    else:
        x = np.zeros(2 * n + 1)  # V = 0, lambda = 1

    def unpack(x):
        return x[:n] + 1j * x[n:2 * n], float(np.exp(x[-1]))

    def neg(x, tau):
        V, lam = unpack(x)
        value, dv, dlam, _ = prob.smoothed(V, lam, tau)
        grad = np.concatenate([2 * dv.real, 2 * dv.imag, [lam * dlam]])
        return -value / scale, -grad / scale

    V0, lam0 = unpack(x)
    _, _, _, q0 = prob.smoothed(V0, lam0, 1.0)
    tau0 = float(np.median(np.abs(q0[1] - q0[0])))
    if tau0 <= 0:
        tau0 = float(np.median(np.abs(q0))) or 1.0
    intensity = scale / (prob.area * G.grid.n_pixels)
    taus = [tau0 * decay**j for j in range(stages)] + [final_tau * intensity]
    bounds = [(None, None)] * (2 * n) + [(log_floor, np.log(prob.lam_max))]
    per_stage = max(1, max_iter // len(taus))
    history = []
    total_iter = 0
    status = 0
    recording = [False]

    def record(intermediate_result):
        if recording[0]:
            history.append(float(intermediate_result.fun))

    for j, tau in enumerate(taus):
        recording[0] = j == len(taus) - 1
        res = minimize(neg, x, args=(tau,), jac=True, method="L-BFGS-B", bounds=bounds,
                       callback=record,
                       options={"maxiter": per_stage, "maxcor": 30, "ftol": 0.0,
                                "gtol": 1e-13, "maxfun": 4 * per_stage})
        x = res.x
        total_iter += res.nit
        status = res.status
    converged = True
    if status == 1 and len(history) >= 10:
        tail = history[-max(1, len(history) // 10):]
        gain = abs(tail[0] - tail[-1]) / max(abs(tail[-1]), 1e-300)
        converged = gain <= 1e-4
    V, lam = unpack(x)
    if polish:
        refined = _polish(prob, x, taus[-1], polish_iter)
        if refined is not None and prob.exact(*refined)[0] > prob.exact(V, lam)[0]:
            V, lam = refined
    cert = target.certificate(V * np.conj(rot), lam, converged=converged, iterations=total_iter)
    if warm_start is not None:
        V0, lam0 = warm_start.V, max(warm_start.lam, prob.lam_min)
        alt = target.certificate(V0, lam0, converged=converged, iterations=total_iter)
        if alt.value > cert.value:
            cert = alt
    return cert


def bound_curve(G: GreensOperator, E_inc: FieldArray, E_ref: FieldArray,
                lower: float, upper: float, alphas, convention: str = DEFAULT_CONVENTION,
                **options) -> list[DualCertificate]:
    """Certificates for every alpha in ``alphas`` (returned in the same order).

    Solved from the largest alpha down, each warm-started from the previous
    one. The dual value at a fixed point only grows as alpha shrinks, so the
    bounds come out nondecreasing in alpha.
    """
    alphas = [float(a) for a in alphas]
    certs = [None] * len(alphas)
    warm = None
    for j in sorted(range(len(alphas)), key=lambda j: -alphas[j]):
        warm = solve_dual(G, E_inc, E_ref, lower, upper, alphas[j], convention,
                          warm_start=warm, **options)
        certs[j] = warm
    return certs


def constraint_residuals(cert: DualCertificate, G: GreensOperator, E_inc: FieldArray,
                         E_ref: FieldArray) -> dict:
    """Independent re-evaluation of a certificate.

    Recomputes S from V, every endpoint constraint on beta, and the objective,
    with pixel-by-pixel loops that share no code with :class:`DualProblem`.
    Residuals are relative to the magnitude of the terms involved.
    """
    d = G.polarization.ncomp
    area = G.grid.cell_area
    c = CONVENTIONS[cert.convention] * E_inc.values
    S_expected = G.matrix.conj().T @ cert.V + c
    fenchel = np.linalg.norm(cert.S - S_expected) / max(np.linalg.norm(S_expected), 1e-300)
    worst_beta = 0.0
    for i in range(G.grid.n_pixels):
        sl = slice(i * d, (i + 1) * d)
        v, s_i, e = cert.V[sl], cert.S[sl], E_ref.values[sl]
        for chi in (cert.lower, cert.upper):
            quad = float(np.sum(np.abs(v - chi * s_i) ** 2)) / cert.lam
            lin = 2 * chi * float(np.sum((s_i.conj() * e).real))
            size = abs(quad) + abs(lin) + abs(cert.beta[i])
            worst_beta = max(worst_beta, (quad + lin - cert.beta[i]) / max(size, 1e-300))
    pairing = 2 * area * np.sum((cert.V.conj() * (E_ref.values - E_inc.values)).real)
    beta_sum = area * float(np.sum(cert.beta))
    penalty = cert.lam * cert.alpha**2 * area * float(np.sum(np.abs(E_ref.values) ** 2))
    recomputed = pairing - beta_sum - penalty
    size = abs(pairing) + abs(beta_sum) + abs(penalty)
    return {
        "fenchel": float(fenchel),
        "beta": float(max(worst_beta, 0.0)),
        "lambda_ok": bool(cert.lam > 0),
        "value_error": float(abs(recomputed - cert.value) / max(size, 1e-300)),
        "recomputed_value": float(recomputed),
    }


def verify_certificate(cert: DualCertificate, G: GreensOperator, E_inc: FieldArray,
                       E_ref: FieldArray, constraint_tol: float = 1e-10,
                       value_tol: float = 1e-12) -> tuple[bool, dict]:
    res = constraint_residuals(cert, G, E_inc, E_ref)
    ok = (res["lambda_ok"] and res["fenchel"] <= constraint_tol
          and res["beta"] <= constraint_tol and res["value_error"] <= value_tol)
    return ok, res


@dataclass
class WeakDualityReport:
    bound: float
    n_samples: int
    n_feasible: int = 0
    n_violations: int = 0
    n_failed: int = 0
    max_excess: float = float("-inf")   # max of sigma - bound over feasible samples
    sigmas: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.n_violations == 0


def random_structures(n_pixels: int, lower: float, upper: float, samples: int, seed: int):
    """Alternating i.i.d. uniform and two-level (endpoint-valued) contrast maps."""
    rng = np.random.default_rng(seed)
    for j in range(samples):
        if j % 2:
            yield np.where(rng.random(n_pixels) < rng.random(), upper, lower)
        else:
            yield rng.uniform(lower, upper, n_pixels)


def weak_duality_sweep(cert: DualCertificate, G: GreensOperator, E_inc: FieldArray,
                       E_ref: FieldArray, samples: int = 100, seed: int = 0,
                       rtol: float = 1e-9) -> WeakDualityReport:
    """Falsification test of ``sigma(chi) <= -d`` on random feasible structures.

    Feasibility ``||E - E_ref|| <= alpha ||E_ref||`` is checked per sample, not
    assumed; infeasible samples are counted but cannot violate anything.
    """
    from .forward import SingularSystemError, solve_vie

    area = G.grid.cell_area
    ref_norm = np.sqrt(area * np.vdot(E_ref.values, E_ref.values).real)
    report = WeakDualityReport(cert.bound, samples)
    slack = rtol * max(abs(cert.bound), np.sqrt(area * np.vdot(E_inc.values, E_inc.values).real))
    for chi in random_structures(G.grid.n_pixels, cert.lower, cert.upper, samples, seed):
        try:
            sol = solve_vie(G, chi, E_inc)
        except SingularSystemError:
            report.n_failed += 1
            continue
        dev = np.sqrt(area * np.vdot(sol.field.values - E_ref.values,
                                     sol.field.values - E_ref.values).real)
        if dev > cert.alpha * ref_norm * (1 + 1e-12):
            continue
        report.n_feasible += 1
        report.sigmas.append(sol.cross_section)
        excess = sol.cross_section - cert.bound
        report.max_excess = max(report.max_excess, excess)
        if excess > slack:
            report.n_violations += 1
    return report


@dataclass
class CalibrationResult:
    selected: str | None
    table: dict          # convention -> {"violations", "feasible", "tightness"}


def calibrate_convention(instances=None, samples: int = 100, seed: int = 0,
                         tight_window: float = 1.3) -> CalibrationResult:
    """Pick the pairing convention that never violates weak duality and is tight.

    Each instance is ``(polarization, radius, spacing, chi0)`` with unit
    wavelength. The bound is taken at alpha_ub, so every sampled structure is
    feasible. Tightness is the worst ratio of the bound to the best sampled
    or locally optimized cross-section over the TE instances with
    |chi0| <= 0.5; TM bounds are loose by nature and only enter the
    soundness count.
    """
    from .alpha import alpha_ub, contrast_bounds
    from .designopt import local_optimize
    from .forward import reference_field
    from .geometry import build_grid
    from .greens import assemble, plane_wave

    if instances is None:
        instances = [("TE", 0.05, 0.02, 0.25), ("TE", 0.05, 0.02, -0.5),
                     ("TM", 0.05, 0.02, 0.25), ("TE", 0.1, 0.02, 1.0),
                     ("TM", 0.1, 0.02, -0.5)]
    prepared = []
    for pol, radius, spacing, chi0 in instances:
        G = assemble(build_grid(1.0, radius, spacing), pol)
        E_inc = plane_wave(G.grid, pol)
        lower, upper = contrast_bounds(chi0)
        E_ref = reference_field(G, (lower + upper) / 2, E_inc)
        a = alpha_ub(G, lower, upper)
        if a.divergent:
            continue
        best = local_optimize(G, E_inc, lower, upper, restarts=4, seed=seed).best_value
        prepared.append((G, E_inc, E_ref, lower, upper, a.value, pol == "TE" and abs(chi0) <= 0.5, best))
    table = {}
    for name in CONVENTIONS:
        violations = feasible = 0
        ratios = []
        for G, E_inc, E_ref, lower, upper, alpha, small, best in prepared:
            cert = solve_dual(G, E_inc, E_ref, lower, upper, alpha, convention=name)
            rep = weak_duality_sweep(cert, G, E_inc, E_ref, samples=samples, seed=seed)
            violations += rep.n_violations
            feasible += rep.n_feasible
            reference = max([best, *rep.sigmas])
            if small and reference > 0:
                ratios.append(cert.bound / reference)
        tight = max(ratios) if ratios else float("nan")
        table[name] = {"violations": violations, "feasible": feasible, "tightness": tight}
    sound = [name for name, row in table.items()
             if row["violations"] == 0 and 1.0 <= row["tightness"] <= tight_window]
    return CalibrationResult(sound[0] if len(sound) == 1 else None, table)
