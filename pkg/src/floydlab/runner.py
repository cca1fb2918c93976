"""Scenario execution: one function per task, each returning a Report with its identity checks."""
from __future__ import annotations

import math

import numpy as np
import scipy

from . import __version__
from .basis import LinearPotential, basis_family, make_basis
from .config import Scenario
from .core import Microstate, classical_reference, microstate_from_initial_values, microstate_to_initial_values
from .correspondence import SweepScenario, closed_form_stats, cycle_stats, indeterminacy_envelope, limit_sweep
from .dynamics import (averaged_free_time, free_time_closed_form, trajectory_time,
                       trajectory_time_linear_closed, transition_width)
from .qshje import conjugate_momentum, qshje_residual, reduced_action, residual_scale, schwarzian
from .report import Check, Report
from .squarewell import (dwell_time_jacobi, libration_period_jacobi, solve_symmetric_levels,
                         timing_report)

__all__ = ["run_task", "run_checks", "TOLERANCES"]

# Base tolerances; every one is multiplied by --tol-scale.
TOLERANCES = {
    "residual": 1e-8,
    "residual_airy": 1e-6,
    "wronskian": 1e-9,
    "jacobi": 1e-6,
    "classical": 1e-10,
    "asymptote": 1e-3,
    "cycle": 1e-8,
    "timing_ratio": 1e-12,
    "quantization": 1e-10,
    "width": 1e-6,
    "roundtrip": 1e-10,
}


class _Checks:
    def __init__(self, tol_scale: float):
        self.scale = tol_scale
        self.items: list[Check] = []

    def add(self, name: str, error: float, tol_key: str | None = None, tol: float | None = None):
        base = TOLERANCES[tol_key] if tol_key else tol
        self.items.append(Check(name, float(error), base * self.scale))


def _meta(scn: Scenario, verb: str, tol_scale: float, seed: int | None) -> dict:
    meta = {
        "tool": "floydlab",
        "version": __version__,
        "verb": verb,
        "task": scn.task,
        "scenario": scn.name,
        "scenario_sha256": scn.sha256,
        "potential": scn.potential.kind,
        "m": scn.ctx.m,
        "hbar": scn.ctx.hbar,
        "E": scn.ctx.E,
        "microstate": [scn.ms.a, scn.ms.b, scn.ms.c],
        "level": scn.level,
        "tol_scale": tol_scale,
        "tolerances": dict(TOLERANCES),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }
    if seed is not None:
        meta["seed"] = seed
        meta["rng"] = "numpy.random.default_rng (PCG64)"
    return meta


def _time_unit(ctx) -> float:
    return ctx.hbar / ctx.E


def _rel(a, b, floor) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), floor)))


def _trajectory(scn: Scenario, checks: _Checks):
    ctx, ms, pot = scn.ctx, scn.ms, scn.potential
    basis = make_basis(pot, ctx, ms)
    xs = np.array(scn.grid)
    steps = [reduced_action(basis, xs[i], xs[i - 1]) for i in range(1, len(xs))]
    w = np.concatenate([[0.0], np.cumsum(steps)])
    wx = conjugate_momentum(basis, xs)
    schw = schwarzian(basis, xs)
    res = qshje_residual(basis, xs)
    t = np.atleast_1d(trajectory_time(basis_family(pot, ctx, ms), xs, ctx, ms))
    rows = [list(r) for r in zip(xs.tolist(), w.tolist(), wx.tolist(), schw.tolist(), res.tolist(), t.tolist())]

    scale = residual_scale(basis, xs)
    checks.add("qshje_residual", np.max(np.abs(res) / scale),
               "residual_airy" if pot.kind == "linear" else "residual")
    phi, theta, dphi, dtheta = basis.evaluate(xs)
    checks.add("wronskian_constancy", np.max(np.abs((phi * dtheta - dphi * theta) / basis.wronskian - 1.0)), "wronskian")
    checks.add("momentum_positive", 0.0 if np.all(wx > 0) else 1.0, tol=0.0)
    unit = _time_unit(ctx)
    if pot.kind == "free":
        checks.add("jacobi_vs_closed_form", _rel(t, free_time_closed_form(ctx, ms, xs), unit), "jacobi")
        if ms.is_classical:
            checks.add("classical_reduction", _rel(t, math.sqrt(ctx.m / (2 * ctx.E)) * xs, unit), "classical")
    elif pot.kind == "linear":
        zeta = (2 * ctx.m * pot.f / ctx.hbar**2) ** (1 / 3) * (xs - ctx.E / pot.f)
        sel = zeta <= 2.0
        if sel.any():
            closed = trajectory_time_linear_closed(ctx, ms, pot.f, xs[sel])
            checks.add("jacobi_vs_closed_form", _rel(t[sel], closed, 0.0), "jacobi")
    summary = {"points": len(xs), "W_span": float(w[-1])}
    if pot.kind == "linear":
        # Bi^2 dominates past zeta = 8 and t - t0 underflows toward zero there
        deep = zeta >= 8.0
        summary["forbidden_flagged"] = int(np.count_nonzero(deep))
        if deep.any():
            summary["forbidden_flagged_from_x"] = float(xs[deep].min())
    return ["x", "W", "W_x", "schwarzian", "residual", "t_minus_t0"], rows, summary


def _stats(scn: Scenario, checks: _Checks):
    ctx, ms = scn.ctx, scn.ms
    basis = make_basis(scn.potential, ctx, ms)
    got = cycle_stats(basis)
    ref = closed_form_stats(ctx, ms)
    env = indeterminacy_envelope(basis)
    p = math.sqrt(2 * ctx.m * ctx.E)
    root = math.sqrt(ms.det)
    wx_min = 2 * p * root / ((ms.a + ms.b) + math.sqrt(ms.amplitude_squared))
    wx_max = 2 * p * root / ((ms.a + ms.b) - math.sqrt(ms.amplitude_squared))
    table = [
        ("mean_Wx", got.mean_Wx, ref.mean_Wx, p),
        ("mean_Wx2", got.mean_Wx2, ref.mean_Wx2, p * p),
        ("variance", got.variance, ref.variance, p * p),
        ("mean_quantum_potential", got.mean_quantum_potential, ref.mean_quantum_potential, ctx.E),
        ("Wx_min", env.Wx_min, wx_min, p),
        ("Wx_max", env.Wx_max, wx_max, p),
    ]
    rows = []
    for name, value, closed, unit in table:
        rows.append([name, value, closed])
        tol = "cycle" if not name.startswith("Wx_") else "wronskian"
        checks.add(f"{name}_vs_closed_form", abs(value - closed) / max(abs(closed), unit), tol)
    rows.append(["envelope_amplitude", got.envelope_amplitude, math.sqrt(ms.amplitude_squared)])
    checks.add("quantum_potential_two_way",
               abs(got.mean_quantum_potential - got.mean_quantum_potential_balance) / ctx.E, "cycle")
    checks.add("mean_Wx2_lower_bound", max(0.0, p * p - got.mean_Wx2) / (p * p), tol=0.0)
    x = 10.0 * math.pi * ctx.hbar / p
    t_avg = averaged_free_time(ctx, ms, x)
    t_cl = math.sqrt(ctx.m / (2 * ctx.E)) * x
    rows.append(["averaged_time_at_10_periods", t_avg, t_cl])
    checks.add("averaged_time_vs_classical", abs(t_avg - t_cl) / t_cl, "cycle")
    summary = {"phase_note": got.phase_note}
    return ["quantity", "computed", "closed_form"], rows, summary


def _timing(scn: Scenario, checks: _Checks):
    ctx, ms, pot = scn.ctx, scn.ms, scn.potential
    spectrum = solve_symmetric_levels(ctx, pot.U, pot.q)
    level = min(spectrum.levels, key=lambda lv: abs(lv.E - ctx.E))
    rep = timing_report(ctx, level, ms)
    ratio = (rep.t_plus_R + rep.t_minus_R) / rep.t_libration
    rows = [
        ["n", level.n], ["E", level.E], ["k", level.k], ["kappa", level.kappa],
        ["t_plus_R", rep.t_plus_R], ["t_minus_R", rep.t_minus_R],
        ["t_libration", rep.t_libration], ["fraction_forbidden", rep.fraction_forbidden],
    ]
    checks.add("quantization_residual", abs(level.residual), "quantization")
    checks.add("timing_ratio_identity", abs(ratio - rep.fraction_forbidden) / rep.fraction_forbidden, "timing_ratio")
    checks.add("fraction_closed_form",
               abs(rep.fraction_forbidden - 1.0 / (level.kappa * level.q + 1.0)) * (level.kappa * level.q + 1.0),
               "timing_ratio")
    if ms.is_classical:
        printed = ctx.hbar / math.sqrt(level.E * (level.U - level.E))
        t_r = rep.t_plus_R
        checks.add("dwell_printed_reduction", abs(t_r - printed) / printed, "timing_ratio")
        t_j = dwell_time_jacobi(ctx, level, +1, ms)
        rows.append(["t_R_jacobi", t_j])
        checks.add("dwell_jacobi", abs(t_j - t_r) / t_r, "jacobi")
        lib_j = libration_period_jacobi(ctx, level, ms)
        rows.append(["t_libration_jacobi", lib_j])
        checks.add("libration_jacobi", abs(lib_j - rep.t_libration) / rep.t_libration, "jacobi")
    return ["quantity", "value"], rows, {"levels_in_well": len(spectrum.levels)}


def _width(scn: Scenario, checks: _Checks):
    ctx, pot = scn.ctx, scn.potential
    w = transition_width(ctx, pot.f, scn.width_tol)
    w2 = transition_width(ctx.with_energy(2 * ctx.E), pot.f, scn.width_tol)
    rows = [
        ["E", ctx.E, w.x, w.xi, w.zeta],
        ["2E", 2 * ctx.E, w2.x, w2.xi, w2.zeta],
    ]
    checks.add("xi_width_energy_invariance", abs(w2.xi - w.xi) / w.xi, "width")
    classical = Microstate(1.0, 1.0, 0.0)
    alpha = (2 * ctx.m * pot.f / ctx.hbar**2) ** (1 / 3)
    xs = ctx.E / pot.f + np.linspace(-30.0, -8.0, 23) / alpha
    t_q = trajectory_time_linear_closed(ctx, classical, pot.f, xs)
    t_c = np.array([classical_reference(ctx, pot, x)[1] for x in xs])
    checks.add("classical_asymptote", _rel(t_q, t_c, 0.0), "asymptote")
    return ["case", "E", "width_x", "width_xi", "width_zeta"], rows, {"tol_rel": scn.width_tol}


def _sweep(scn: Scenario, checks: _Checks, threads: int):
    sweep_scn = SweepScenario(scn.potential, scn.ctx, scn.ms, scn.level or 0, scn.sweep_gap)
    result = limit_sweep(scn.sweep_axis, scn.sweep_values, sweep_scn, threads=threads)
    names = list(result.points[0].metrics)
    rows = [[p.value] + [p.metrics[n] for n in names] for p in result.points]
    diag = result.diagnostics
    kind = scn.potential.kind
    if kind == "free":
        checks.add("mean_Wx_classical", diag["mean_Wx_ratio_max_deviation"], "cycle")
        checks.add("variance_plateau", diag["variance_ratio_spread"] if not scn.ms.is_classical
                   else diag["variance_ratio_max"], "cycle")
        checks.add("quantum_potential_two_way", diag["qp_two_way_max_difference"], "cycle")
    elif kind == "square_well":
        ratio_err = max(abs((p.metrics["t_plus_R"] + p.metrics["t_minus_R"]) / p.metrics["t_libration"]
                            - p.metrics["fraction_forbidden"]) / p.metrics["fraction_forbidden"]
                        for p in result.points)
        checks.add("timing_ratio_identity", ratio_err, "timing_ratio")
        if scn.sweep_axis == "hbar":
            checks.add("fraction_decreasing", 0.0 if diag["fraction_monotone_decreasing"] else 1.0, tol=0.0)
        else:
            checks.add("fraction_plateau", diag["fraction_spread"], "timing_ratio")
    else:
        if scn.sweep_axis == "E":
            checks.add("xi_width_plateau", diag["width_xi_spread"], "width")
        else:
            scaled = [p.metrics["width_x"] / p.metrics["hbar"] ** (2 / 3) for p in result.points]
            checks.add("x_width_hbar_two_thirds", float(np.ptp(scaled) / max(scaled)), "width")
    return [scn.sweep_axis] + names, rows, diag


def _levels(scn: Scenario, checks: _Checks):
    spectrum = solve_symmetric_levels(scn.ctx, scn.potential.U, scn.potential.q)
    rows = [[lv.n, lv.E, lv.k, lv.kappa, lv.k * lv.q / math.pi, lv.residual] for lv in spectrum.levels]
    checks.add("quantization_residual", max(abs(lv.residual) for lv in spectrum.levels), "quantization")
    misplaced = sum(1 for lv in spectrum.levels
                    if not lv.n * math.pi < lv.k * lv.q < (lv.n + 0.5) * math.pi)
    checks.add("branch_placement", float(misplaced), tol=0.0)
    return ["n", "E", "k", "kappa", "kq_over_pi", "residual"], rows, {"count": len(spectrum.levels)}


def run_task(scn: Scenario, verb: str = "run", *, task: str | None = None, tol_scale: float = 1.0,
             threads: int = 1) -> Report:
    task = task or scn.task
    checks = _Checks(tol_scale)
    if task == "trajectory":
        columns, rows, summary = _trajectory(scn, checks)
    elif task == "stats":
        columns, rows, summary = _stats(scn, checks)
    elif task == "timing":
        columns, rows, summary = _timing(scn, checks)
    elif task == "width":
        columns, rows, summary = _width(scn, checks)
    elif task == "sweep":
        columns, rows, summary = _sweep(scn, checks, threads)
    elif task == "levels":
        columns, rows, summary = _levels(scn, checks)
    else:
        raise ValueError(f"unknown task {task!r}")
    meta = _meta(scn, verb, tol_scale, None)
    meta["task"] = task
    return Report(meta, columns, rows, summary, checks.items)


def _random_microstate(rng) -> Microstate:
    a, b = np.exp(rng.uniform(-1.5, 1.5, size=2))
    c = 2.0 * math.sqrt(a * b) * rng.uniform(-0.9, 0.9)
    return Microstate(float(a), float(b), float(c))


def _random_x(scn: Scenario, rng, n: int) -> np.ndarray:
    ctx, pot = scn.ctx, scn.potential
    if pot.kind == "free":
        lam = 2 * math.pi * ctx.hbar / math.sqrt(2 * ctx.m * ctx.E)
        return rng.uniform(-5 * lam, 5 * lam, n)
    if pot.kind == "square_well":
        kappa = math.sqrt(2 * ctx.m * (pot.U - ctx.E)) / ctx.hbar
        edge = pot.q + 3.0 / kappa
        return rng.uniform(-edge, edge, n)
    alpha = (2 * ctx.m * pot.f / ctx.hbar**2) ** (1 / 3)
    return ctx.E / pot.f + rng.uniform(-20.0, 3.0, n) / alpha


def run_checks(scn: Scenario, *, seed: int = 42, tol_scale: float = 1.0, threads: int = 1) -> Report:
    """Identity suite: the scenario's own checks plus seeded random draws."""
    base = run_task(scn, "check", tol_scale=tol_scale, threads=threads)
    checks = _Checks(tol_scale)
    checks.items.extend(base.checks)
    rng = np.random.default_rng(seed)
    ctx, pot = scn.ctx, scn.potential
    res_err = trip_err = cycle_err = ratio_err = 0.0
    for _ in range(scn.check_samples):
        ms = _random_microstate(rng)
        basis = make_basis(pot, ctx, ms)
        xs = _random_x(scn, rng, 10)
        res_err = max(res_err, float(np.max(np.abs(qshje_residual(basis, xs)) / residual_scale(basis, xs))))
        x0 = float(xs[0])
        iv = microstate_to_initial_values(ms, ctx, basis, x0)
        back = microstate_from_initial_values(iv, ctx, make_basis(pot, ctx, Microstate(1.0, ms.det, 0.0)))
        ref = np.array(ms.as_tuple())
        trip_err = max(trip_err, float(np.max(np.abs(np.array(back.as_tuple()) - ref)) / np.max(np.abs(ref))))
        if pot.kind == "free":
            got, ref = cycle_stats(basis), closed_form_stats(ctx, ms)
            cycle_err = max(cycle_err, abs(got.mean_Wx2 - ref.mean_Wx2) / ref.mean_Wx2,
                            abs(got.mean_quantum_potential - got.mean_quantum_potential_balance) / ctx.E)
        if pot.kind == "square_well":
            spectrum = solve_symmetric_levels(ctx, pot.U, pot.q)
            level = spectrum.levels[int(rng.integers(len(spectrum.levels)))]
            rep = timing_report(ctx, level, ms)
            ratio = (rep.t_plus_R + rep.t_minus_R) / rep.t_libration
            ratio_err = max(ratio_err, abs(ratio - rep.fraction_forbidden) / rep.fraction_forbidden)
    checks.add("random_qshje_residual", res_err, "residual_airy" if pot.kind == "linear" else "residual")
    checks.add("random_initial_value_roundtrip", trip_err, "roundtrip")
    if pot.kind == "free":
        checks.add("random_cycle_identities", cycle_err, "cycle")
    if pot.kind == "square_well":
        checks.add("random_timing_ratio", ratio_err, "timing_ratio")
    rows = [[c.name, c.error, c.tol, c.passed] for c in checks.items]
    return Report(_meta(scn, "check", tol_scale, seed), ["name", "error", "tol", "passed"], rows,
                  {"samples": scn.check_samples}, checks.items)
