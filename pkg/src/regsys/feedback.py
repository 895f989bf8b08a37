"""Closed-loop algebra: admissible feedback, closed-loop generators, and
the three composition results for perturbed systems, each with an exact
transfer-domain identity and an exact discrete time-domain identity.

Verification strategy. The transfer-domain identities are checked on the
continuous matrices at a handful of real frequencies, where they are exact
resolvent algebra. The time-domain identities are checked in the discrete
zero-order-hold world: the left side is assembled by closing the loop step
by step (a per-step recursion on the lifted one-step matrices), the right
side by the block-matrix composition formula. Both sides describe the same
discrete object through different code paths, so they must agree to
rounding, not merely to discretization order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AdmissibilityError, ControllabilityError, ShapeError
from .grids import TimeGrid
from .node import Realization, lifted_step, quadruple_maps

_ADMISSIBILITY_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class FeedbackGain:
    """Static output feedback u = scale * gamma * y + v.

    Inputs:
      gamma - m x p matrix routing outputs back to inputs
      scale - nonnegative prefactor, handy for sweeping k * identity gains
    """

    gamma: np.ndarray = field(repr=False)
    scale: float = 1.0

    def __post_init__(self) -> None:
        g = np.atleast_2d(np.asarray(self.gamma))
        if g.ndim != 2 or not np.all(np.isfinite(g.real)) or not np.all(np.isfinite(g.imag)):
            raise ShapeError("gamma must be a finite 2-D matrix")
        if self.scale < 0:
            raise ShapeError(f"scale must be nonnegative, got {self.scale}")
        g = np.array(g, copy=True)
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)

    @staticmethod
    def scaled_identity(k: float, dim: int) -> "FeedbackGain":
        return FeedbackGain(np.eye(dim), k)

    def matrix(self) -> np.ndarray:
        return self.scale * self.gamma


def admissible_feedback_check(r: Realization, fb: FeedbackGain, g: TimeGrid) -> dict:
    """Grid admissibility test for a static gain.

    Builds the discrete input-output matrix F on the grid and inspects
    I - F * blockdiag(gamma), together with the static loop matrix I - D
    gamma. The verdict is relative: smallest singular value above 1e-8
    times the largest.

    Returns a dict with keys admissible, condition_number, sigma_min,
    feedthrough_sigma_min.
    """
    gamma = fb.matrix()
    if gamma.shape != (r.m, r.p):
        raise ShapeError(f"gamma must be {r.m} x {r.p}, got {gamma.shape}")
    fio = quadruple_maps(r, g).io_map
    loop = np.eye(fio.shape[0]) - fio @ np.kron(np.eye(g.n_steps), gamma)
    sv = np.linalg.svd(loop, compute_uv=False)
    static = np.eye(r.p) - r.D @ gamma
    sv_static = np.linalg.svd(static, compute_uv=False)
    ok_grid = sv[-1] > _ADMISSIBILITY_RTOL * sv[0]
    ok_static = sv_static[-1] > _ADMISSIBILITY_RTOL * sv_static[0]
    return {
        "admissible": bool(ok_grid and ok_static),
        "condition_number": float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf"),
        "sigma_min": float(sv[-1]),
        "feedthrough_sigma_min": float(sv_static[-1]),
    }


def _inv(mat: np.ndarray, what: str) -> np.ndarray:
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[-1] <= _ADMISSIBILITY_RTOL * max(sv[0], 1.0):
        raise AdmissibilityError(f"{what} is singular (sigma_min={sv[-1]:.3e})")
    return np.linalg.solve(mat, np.eye(mat.shape[0], dtype=mat.dtype))


def closed_loop(r: Realization, fb: FeedbackGain) -> Realization:
    """Close u = gamma y + v around (A, B, C, D).

    Returns (A + B gamma (I - D gamma)^-1 C,  B (I - gamma D)^-1,
             (I - D gamma)^-1 C,  D (I - gamma D)^-1).

    The published square-case form of the control operator,
    (I - D gamma)^-1 B, equals B (I - gamma D)^-1 only under an extra
    commutation; the push-through identity
    (I - D gamma)^-1 D = D (I - gamma D)^-1 always holds and fixes the
    feedthrough. Raises AdmissibilityError when I - D gamma is singular.
    """
    gamma = fb.matrix()
    if gamma.shape != (r.m, r.p):
        raise ShapeError(f"gamma must be {r.m} x {r.p}, got {gamma.shape}")
    s_out = _inv(np.eye(r.p) - r.D @ gamma, "I - D gamma")
    s_in = _inv(np.eye(r.m) - gamma @ r.D, "I - gamma D")
    return Realization(
        r.A + r.B @ gamma @ s_out @ r.C,
        r.B @ s_in,
        s_out @ r.C,
        r.D @ s_in,
    )


def k0_bound(norms: dict) -> float:
    """Guaranteed controllability-preserving gain range (0, k0).

    Inputs (all operator norms at the working horizon):
      d_norm       - feedthrough norm of the looped system
      io_norm      - norm of its input-output map
      control_norm - norm of its input map
      pert_io_norm - norm of the perturbing system's input-output map
      radius       - smallest singular value of the perturbing input map
                     (the radius of surjectivity s0), must be positive

    k0 = min( 1/d_norm, 1/io_norm,
              radius / (control_norm * pert_io_norm + radius * io_norm) )
    with the convention 1/0 = +inf.
    """
    d = float(norms["d_norm"])
    f = float(norms["io_norm"])
    phi = float(norms["control_norm"])
    f_pert = float(norms["pert_io_norm"])
    s0 = float(norms["radius"])
    for name, val in (("d_norm", d), ("io_norm", f), ("control_norm", phi), ("pert_io_norm", f_pert)):
        if val < 0 or not np.isfinite(val):
            raise ValueError(f"{name} must be finite and nonnegative, got {val}")
    if s0 <= 0:
        raise ControllabilityError(
            f"radius of surjectivity must be positive, got {s0} (not exactly controllable)"
        )
    terms = [
        np.inf if d == 0 else 1.0 / d,
        np.inf if f == 0 else 1.0 / f,
        np.inf if phi * f_pert + s0 * f == 0 else s0 / (phi * f_pert + s0 * f),
    ]
    return float(min(terms))


def theta0_bound(norms: dict) -> float:
    """Guaranteed observability-preserving gain range (0, theta0).

    Inputs:
      d_norm       - feedthrough norm of the looped system
      io_norm      - norm of its input-output map
      pert_io_norm - norm of the perturbing system's input-output map
      obs_norm     - norm of the looped system's output map
      obs_constant - observability constant of the perturbing output map
      alpha0       - retained observability level, 0 < alpha0 < obs_constant

    theta0 = min( 1/d_norm, 1/io_norm,
                  (obs_constant - alpha0) /
                  ((obs_constant - alpha0) io_norm + pert_io_norm obs_norm) )
    with the convention 1/0 = +inf.
    """
    d = float(norms["d_norm"])
    f = float(norms["io_norm"])
    f_pert = float(norms["pert_io_norm"])
    psi = float(norms["obs_norm"])
    k_obs = float(norms["obs_constant"])
    alpha0 = float(norms["alpha0"])
    if not (0.0 < alpha0 < k_obs):
        raise ValueError(
            f"alpha0 must lie strictly between 0 and the observability constant "
            f"{k_obs}, got {alpha0}"
        )
    gap = k_obs - alpha0
    denom = gap * f + f_pert * psi
    terms = [
        np.inf if d == 0 else 1.0 / d,
        np.inf if f == 0 else 1.0 / f,
        np.inf if denom == 0 else gap / denom,
    ]
    return float(min(terms))


@dataclass(frozen=True, eq=False)
class CompositionReport:
    """Outcome of one composition-identity verification."""

    theorem: str
    closed_loop: Realization
    lhs: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    deviation_time: float
    deviation_transfer: float
    lambda_samples: tuple
    grid: TimeGrid
    k0: float | None = None
    theta0: float | None = None
    norms: dict | None = None

    def to_json_dict(self) -> dict:
        doc = {
            "theorem": self.theorem,
            "deviation_time": self.deviation_time,
            "deviation_transfer": self.deviation_transfer,
            "lambda_samples": list(self.lambda_samples),
            "grid": {"t_end": self.grid.t_end, "n_steps": self.grid.n_steps},
        }
        if self.k0 is not None:
            doc["k0"] = self.k0
        if self.theta0 is not None:
            doc["theta0"] = self.theta0
        return doc


def _require_shared(name: str, x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape or not np.allclose(x, y, rtol=0.0, atol=1e-12 * (1 + np.max(np.abs(x)))):
        raise ShapeError(f"the systems must share {name}")


def _require_identity_admissible(r: Realization, g: TimeGrid) -> None:
    check = admissible_feedback_check(r, FeedbackGain.scaled_identity(1.0, r.m), g)
    if not check["admissible"]:
        raise AdmissibilityError(
            "identity feedback is not admissible on this grid "
            f"(sigma_min={check['sigma_min']:.3e})"
        )


def _rel_dev(lhs: np.ndarray, rhs: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(rhs))), 1e-300)
    return float(np.max(np.abs(lhs - rhs)) / scale)


def _lambda_samples(*systems: Realization) -> tuple:
    shift = max(s.spectral_abscissa() for s in systems) + 1.0
    return tuple(base + shift for base in (1.0, 2.0, 5.0, 10.0))


def _control_columns(E_cl: np.ndarray, M_cl: np.ndarray, n_steps: int) -> np.ndarray:
    """Columns E_cl^(N-1-k) M_cl assembled by forward accumulation."""
    n, m = M_cl.shape
    phi = np.zeros((n, n_steps * m), dtype=np.result_type(E_cl, M_cl))
    acc = M_cl.copy()
    for k in range(n_steps - 1, -1, -1):
        phi[:, k * m : (k + 1) * m] = acc
        if k > 0:
            acc = E_cl @ acc
    return phi


def _observation_rows(C_cl: np.ndarray, E_cl: np.ndarray, n_steps: int) -> np.ndarray:
    p, n = C_cl.shape
    psi = np.zeros((n_steps * p, n), dtype=np.result_type(C_cl, E_cl))
    acc = C_cl.copy()
    for j in range(n_steps):
        psi[j * p : (j + 1) * p, :] = acc
        acc = acc @ E_cl
    return psi


def _io_toeplitz(E: np.ndarray, M: np.ndarray, C: np.ndarray, D: np.ndarray, n_steps: int) -> np.ndarray:
    p, m = D.shape
    fio = np.zeros((n_steps * p, n_steps * m), dtype=np.result_type(E, M, C, D))
    blocks = [D]
    acc = C.copy()
    for _ in range(n_steps - 1):
        blocks.append(acc @ M)
        acc = acc @ E
    for i in range(n_steps):
        for k in range(i + 1):
            fio[i * p : (i + 1) * p, k * m : (k + 1) * m] = blocks[i - k]
    return fio


def perturb_across(main: Realization, pert: Realization, g: TimeGrid) -> CompositionReport:
    """Controllability-side composition: close identity feedback around a
    square system (A, B, C, D) and drive it through a second input channel
    (A, DB, C, P) sharing the state dynamics and the observation.

    The closed loop is (A + B (I-D)^-1 C, B (I-D)^-1 P + DB, (I-D)^-1 C,
    (I-D)^-1 P). Its input map factors through the open-loop maps:

        input_map_closed = Phi (I - F)^-1 F_pert + Phi_pert

    which is checked discretely (exact), and the same identity is checked
    on resolvents at sampled frequencies. When the perturbing input map is
    onto, the report carries the guaranteed gain margin k0.
    """
    if main.m != main.p:
        raise ShapeError("the looped system must be square (m == p)")
    _require_shared("A", main.A, pert.A)
    _require_shared("C", main.C, pert.C)
    if pert.p != main.p:
        raise ShapeError("perturbing output dimension must match the loop")
    _require_identity_admissible(main, g)

    m, q, n, N = main.m, pert.m, main.n, g.n_steps
    s_out = _inv(np.eye(m) - main.D, "I - D")
    a_closed = main.A + main.B @ s_out @ main.C
    b_closed = main.B @ s_out @ pert.D + pert.B
    closed = Realization(a_closed, b_closed, s_out @ main.C, s_out @ pert.D)

    # discrete side, left: close the loop step by step
    ls = lifted_step(main, g.dt)
    E, M_I, M_J = ls.E, ls.M_I, ls.M_J
    M_B, M_D = M_I @ main.B, M_I @ pert.B
    C_bar = main.C @ M_I / g.dt
    D_bar = main.C @ M_J @ main.B / g.dt + main.D
    P_bar = main.C @ M_J @ pert.B / g.dt + pert.D
    S = _inv(np.eye(m) - D_bar, "I - D_bar")
    E_cl = E + M_B @ S @ C_bar
    M_cl = M_B @ S @ P_bar + M_D
    lhs = _control_columns(E_cl, M_cl, N)

    # discrete side, right: block composition of the open-loop maps
    qm_main = quadruple_maps(main, g)
    qm_pert = quadruple_maps(pert, g)
    gain = np.linalg.solve(np.eye(N * m) - qm_main.io_map, qm_pert.io_map)
    rhs = qm_main.input_map @ gain + qm_pert.input_map
    deviation_time = _rel_dev(lhs, rhs)

    # transfer side at sampled frequencies
    lambdas = _lambda_samples(main, closed)
    dev_transfer = 0.0
    eye_n = np.eye(n)
    for lam in lambdas:
        r_b = np.linalg.solve(lam * eye_n - main.A, main.B)
        r_d = np.linalg.solve(lam * eye_n - main.A, pert.B)
        g_main = main.C @ r_b + main.D
        g_pert = main.C @ r_d + pert.D
        rhs_lam = r_b @ np.linalg.solve(np.eye(m) - g_main, g_pert) + r_d
        lhs_lam = np.linalg.solve(lam * eye_n - a_closed, b_closed)
        dev_transfer = max(dev_transfer, _rel_dev(lhs_lam, rhs_lam))

    # margin data from the weighted grid matrices
    sqdt = np.sqrt(g.dt)
    phi_w = qm_main.input_map / sqdt
    phi_pert_w = qm_pert.input_map / sqdt
    sv_pert = np.linalg.svd(phi_pert_w, compute_uv=False)
    norms = {
        "d_norm": float(np.linalg.norm(main.D, 2)),
        "io_norm": float(np.linalg.norm(qm_main.io_map, 2)),
        "control_norm": float(np.linalg.norm(phi_w, 2)),
        "pert_io_norm": float(np.linalg.norm(qm_pert.io_map, 2)),
        "radius": float(sv_pert[-1]) if N * q >= n else 0.0,
    }
    k0 = None
    if norms["radius"] > 1e-12 * max(sv_pert[0], 1.0):
        k0 = k0_bound(norms)

    return CompositionReport(
        theorem="across",
        closed_loop=closed,
        lhs=lhs,
        rhs=rhs,
        deviation_time=deviation_time,
        deviation_transfer=dev_transfer,
        lambda_samples=lambdas,
        grid=g,
        k0=k0,
        norms=norms,
    )


def perturb_cross(main: Realization, pert: Realization, g: TimeGrid) -> CompositionReport:
    """Observability-side composition: close identity feedback around a
    square system (A, B, C, D) and observe through a second output channel
    (A, B, DC, P) sharing the state dynamics and the control.

    The closed loop is (A^I, B (I-D)^-1, P (I-D)^-1 C + DC, P (I-D)^-1)
    and its output map factors as

        output_map_closed = F_pert (I - F)^-1 Psi + Psi_pert

    checked discretely (exact) and on resolvents. The report carries the
    guaranteed gain margin theta0 at the convention alpha0 = obs_constant/2
    when the perturbing output map is bounded below.
    """
    if main.m != main.p:
        raise ShapeError("the looped system must be square (m == p)")
    _require_shared("A", main.A, pert.A)
    _require_shared("B", main.B, pert.B)
    if pert.m != main.m:
        raise ShapeError("perturbing input dimension must match the loop")
    _require_identity_admissible(main, g)

    m, n, N = main.m, main.n, g.n_steps
    r_out = pert.p
    s_out = _inv(np.eye(m) - main.D, "I - D")
    a_closed = main.A + main.B @ s_out @ main.C
    c_closed = pert.D @ s_out @ main.C + pert.C
    closed = Realization(a_closed, main.B @ s_out, c_closed, pert.D @ s_out)

    ls = lifted_step(main, g.dt)
    E, M_I, M_J = ls.E, ls.M_I, ls.M_J
    M_B = M_I @ main.B
    C_bar = main.C @ M_I / g.dt
    D_bar = main.C @ M_J @ main.B / g.dt + main.D
    DC_bar = pert.C @ M_I / g.dt
    P_bar = pert.C @ M_J @ main.B / g.dt + pert.D
    S = _inv(np.eye(m) - D_bar, "I - D_bar")
    E_cl = E + M_B @ S @ C_bar
    C_cl = DC_bar + P_bar @ S @ C_bar
    lhs = _observation_rows(C_cl, E_cl, N)

    qm_main = quadruple_maps(main, g)
    qm_pert = quadruple_maps(pert, g)
    gain = np.linalg.solve(np.eye(N * m) - qm_main.io_map, qm_main.output_map)
    rhs = qm_pert.io_map @ gain + qm_pert.output_map
    deviation_time = _rel_dev(lhs, rhs)

    lambdas = _lambda_samples(main, closed)
    dev_transfer = 0.0
    eye_n = np.eye(n)
    for lam in lambdas:
        r_b = np.linalg.solve(lam * eye_n - main.A, main.B)
        g_main = main.C @ r_b + main.D
        g_pert = pert.C @ r_b + pert.D
        res_rows = np.linalg.solve((lam * eye_n - main.A).T, main.C.T).T
        res_rows_pert = np.linalg.solve((lam * eye_n - main.A).T, pert.C.T).T
        rhs_lam = np.linalg.solve((np.eye(m) - g_main).T, g_pert.T).T @ res_rows + res_rows_pert
        lhs_lam = np.linalg.solve((lam * eye_n - a_closed).T, c_closed.T).T
        dev_transfer = max(dev_transfer, _rel_dev(lhs_lam, rhs_lam))

    sqdt = np.sqrt(g.dt)
    psi_w = qm_main.output_map * sqdt
    psi_pert_w = qm_pert.output_map * sqdt
    sv_pert = np.linalg.svd(psi_pert_w, compute_uv=False)
    norms = {
        "d_norm": float(np.linalg.norm(main.D, 2)),
        "io_norm": float(np.linalg.norm(qm_main.io_map, 2)),
        "pert_io_norm": float(np.linalg.norm(qm_pert.io_map, 2)),
        "obs_norm": float(np.linalg.norm(psi_w, 2)),
        "obs_constant": float(sv_pert[-1]) if N * r_out >= n else 0.0,
    }
    theta0 = None
    if norms["obs_constant"] > 1e-12 * max(sv_pert[0], 1.0):
        norms_full = dict(norms, alpha0=norms["obs_constant"] / 2.0)
        theta0 = theta0_bound(norms_full)
        norms = norms_full

    return CompositionReport(
        theorem="cross",
        closed_loop=closed,
        lhs=lhs,
        rhs=rhs,
        deviation_time=deviation_time,
        deviation_transfer=dev_transfer,
        lambda_samples=lambdas,
        grid=g,
        theta0=theta0,
        norms=norms,
    )


def perturb_double(
    main: Realization,
    pert_b: Realization,
    pert_c: Realization,
    pert_bc: Realization,
    g: TimeGrid,
) -> CompositionReport:
    """Two-sided composition: identity feedback around the square system
    (A, B, C, D), input through DB, output through DC.

    pert_b = (A, DB, C, 0), pert_c = (A, B, DC, 0), pert_bc = (A, DB, DC, 0).
    The closed loop is simply (A^I, DB, DC, 0) and its input-output map
    factors as

        io_map_closed = F_pert_c (I - F)^-1 F_pert_b + F_pert_bc

    checked discretely (exact) and on resolvents.
    """
    if main.m != main.p:
        raise ShapeError("the looped system must be square (m == p)")
    for name, pert in (("pert_b", pert_b), ("pert_c", pert_c), ("pert_bc", pert_bc)):
        _require_shared("A", main.A, pert.A)
        if np.any(pert.D != 0):
            raise ShapeError(f"{name} must have zero feedthrough")
    _require_shared("C", main.C, pert_b.C)
    _require_shared("B", main.B, pert_c.B)
    _require_shared("DB", pert_b.B, pert_bc.B)
    _require_shared("DC", pert_c.C, pert_bc.C)
    _require_identity_admissible(main, g)

    m, n, N = main.m, main.n, g.n_steps
    db, dc = pert_b.B, pert_c.C
    s_out = _inv(np.eye(m) - main.D, "I - D")
    a_closed = main.A + main.B @ s_out @ main.C
    closed = Realization(a_closed, db, dc, np.zeros((dc.shape[0], db.shape[1])))

    ls = lifted_step(main, g.dt)
    E, M_I, M_J = ls.E, ls.M_I, ls.M_J
    M_B, M_D = M_I @ main.B, M_I @ db
    C_bar = main.C @ M_I / g.dt
    D_bar = main.C @ M_J @ main.B / g.dt + main.D
    D_uv = main.C @ M_J @ db / g.dt
    DC_bar = dc @ M_I / g.dt
    D_zu = dc @ M_J @ main.B / g.dt
    D_zv = dc @ M_J @ db / g.dt
    S = _inv(np.eye(m) - D_bar, "I - D_bar")
    E_cl = E + M_B @ S @ C_bar
    M_cl = M_D + M_B @ S @ D_uv
    C_cl = DC_bar + D_zu @ S @ C_bar
    D_cl = D_zv + D_zu @ S @ D_uv
    lhs = _io_toeplitz(E_cl, M_cl, C_cl, D_cl, N)

    qm_main = quadruple_maps(main, g)
    fio_b = quadruple_maps(pert_b, g).io_map
    fio_c = quadruple_maps(pert_c, g).io_map
    fio_bc = quadruple_maps(pert_bc, g).io_map
    gain = np.linalg.solve(np.eye(N * m) - qm_main.io_map, fio_b)
    rhs = fio_c @ gain + fio_bc
    deviation_time = _rel_dev(lhs, rhs)

    lambdas = _lambda_samples(main, closed)
    dev_transfer = 0.0
    eye_n = np.eye(n)
    for lam in lambdas:
        r_b = np.linalg.solve(lam * eye_n - main.A, main.B)
        r_d = np.linalg.solve(lam * eye_n - main.A, db)
        g_main = main.C @ r_b + main.D
        rhs_lam = (dc @ r_b) @ np.linalg.solve(np.eye(m) - g_main, main.C @ r_d) + dc @ r_d
        lhs_lam = dc @ np.linalg.solve(lam * eye_n - a_closed, db)
        dev_transfer = max(dev_transfer, _rel_dev(lhs_lam, rhs_lam))

    return CompositionReport(
        theorem="bcross",
        closed_loop=closed,
        lhs=lhs,
        rhs=rhs,
        deviation_time=deviation_time,
        deviation_transfer=dev_transfer,
        lambda_samples=lambdas,
        grid=g,
    )
