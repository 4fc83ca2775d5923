#############################################################################
##
## Copyright (C) 2025 Killian-W.
## All rights reserved.
##
## This file is part of the Qtraj project.
##
## Licensed under the MIT License.
## You may obtain a copy of the License at:
##     https://opensource.org/licenses/MIT
##
## This software is provided "as is," without warranty of any kind.
##
#############################################################################

"""
Mechanised checks of trajectory laws: particle coupling, flow conservation,
admissible-domain geometry, ensemble statistics, the mean-flow baseline
and chart covariance.
"""

import logging
import math
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np
from core.api.law import ModeSet, TrajectoryLaw, compose_velocity
from core.constants import (
    COUPLED_ABOVE,
    COUPLING_FD_STEP,
    COVERAGE_SUBSAMPLES,
    MIN_ENSEMBLE_SIZE,
    UNCOUPLED_BELOW,
    XI_THRESHOLD,
)
from core.exceptions import BoundaryTooClose, NodeOfRho, QtrajError
from core.models import (
    ChiSquareSummary,
    CouplingReport,
    FlowReport,
    GridSpec,
    Inadmissible,
    PrincipalFrame,
    SignAssignment,
)
from core.plugins.laws import get_law

from .catalog import parse_state_spec
from .dynamics import admissible, integrate
from .eigenframe import match_frames, spectrum
from .geometry import Chart, covariant_hessian, laplacian, pullback
from .holland import evolve_ensemble, sample_initial
from .states import RealStationaryState, TwoVectorState, current, density, quadrature_grid
from .statistics import chi_square_summary

logger = logging.getLogger("Diagnostics")

CHUNK = 65536
DIVERGENCE_STEP = 1e-5


def _signs(law: TrajectoryLaw, state, signs) -> SignAssignment:
    count = law.mode_count(state)
    return SignAssignment.of(signs if signs is not None else [1] * count, count)


def _blocks(state, n: int):
    return state.blocks or tuple((i,) for i in range(n))


def _velocity_map(law: TrajectoryLaw, state, chart: Chart, q, signs: SignAssignment):
    """Fixed-sign velocity field with frames matched to the frame at q."""
    center = law.modes(state, chart, q)
    reference = center.frame if law.uses_frame() else None

    def velocity(point):
        result = law.velocity(state, chart, point, signs, reference)
        if isinstance(result, Inadmissible):
            raise BoundaryTooClose(
                f"Stencil point {np.array2string(point, precision=6)} leaves the admissible "
                f"domain (modes {result.modes})"
            )
        return result

    return velocity


def _verdict(norm: float) -> str:
    if norm < UNCOUPLED_BELOW:
        return "uncoupled"
    if norm > COUPLED_ABOVE:
        return "coupled"
    return "indeterminate"


def coupling_matrix(
    law, state, chart: Optional[Chart], q, signs=None, step: float = COUPLING_FD_STEP
) -> CouplingReport:
    """Per-particle Frobenius norms of the velocity Jacobian and coupled/uncoupled verdicts."""
    law = get_law(law)
    chart = chart if chart is not None else state.chart()
    q = np.asarray(q, dtype=float)
    velocity = _velocity_map(law, state, chart, q, _signs(law, state, signs))

    columns = []
    for nu in range(q.size):
        offset = np.zeros(q.size)
        offset[nu] = step
        columns.append((velocity(q + offset) - velocity(q - offset)) / (2.0 * step))
    jacobian = np.stack(columns, axis=-1)

    blocks = _blocks(state, q.size)
    norms = np.zeros((len(blocks), len(blocks)))
    verdicts: Dict[str, str] = {}
    for i, rows in enumerate(blocks):
        for j, cols in enumerate(blocks):
            norms[i, j] = np.linalg.norm(jacobian[np.ix_(list(rows), list(cols))])
            if i != j:
                verdicts[f"{i + 1}-{j + 1}"] = _verdict(norms[i, j])

    report = CouplingReport(
        law=law.get_law_name(),
        blocks=blocks,
        norms=norms,
        verdicts=verdicts,
        point=tuple(q.tolist()),
        step=step,
    )
    logger.info(f"{report.law} coupling at {report.point}: {report.verdict}")
    return report


def separation_scan(
    law, state, chart: Optional[Chart], q, separations: Iterable[float], signs=None, particle: int = 1
) -> List[Dict]:
    """Coupling at points where one particle's coordinates are shifted by each separation."""
    law = get_law(law)
    q = np.asarray(q, dtype=float)
    block = list(_blocks(state, q.size)[particle])
    results = []
    for separation in separations:
        point = q.copy()
        point[block] += separation
        try:
            report = coupling_matrix(law, state, chart, point, signs)
        except QtrajError as e:
            results.append({"separation": float(separation), "verdict": "inadmissible", "detail": str(e)})
            continue
        off_diagonal = report.norms[~np.eye(report.norms.shape[0], dtype=bool)]
        results.append(
            {
                "separation": float(separation),
                "cross_norm": float(np.max(off_diagonal, initial=0.0)),
                "verdict": report.verdict,
            }
        )
    return results


def divergence(law, state, chart: Optional[Chart], q, signs=None, step: float = DIVERGENCE_STEP) -> float:
    """
    (1 / sqrt(det g)) d_mu(sqrt(det g) psi^2 qdot^mu) on a fixed sign branch.

    Raises BoundaryTooClose if any stencil point (q +- h, q +- 2h) is
    outside the admissible domain.
    """
    law = get_law(law)
    chart = chart if chart is not None else state.chart()
    q = np.asarray(q, dtype=float)
    field = pullback(state.field, chart)
    signs = _signs(law, state, signs)

    for nu in range(q.size):
        for scale in (-2.0, -1.0, 1.0, 2.0):
            offset = np.zeros(q.size)
            offset[nu] = scale * step
            radicands = law.modes(state, chart, q + offset).radicands
            if np.any(radicands < 0.0):
                raise BoundaryTooClose(
                    f"q = {np.array2string(q, precision=6)} is within {2 * step:g} of the "
                    "admissible boundary"
                )

    velocity = _velocity_map(law, state, chart, q, signs)

    def flux(point, nu):
        volume = math.sqrt(float(np.linalg.det(chart.metric(point))))
        return volume * float(field.value(point)) ** 2 * velocity(point)[nu]

    total = 0.0
    for nu in range(q.size):
        offset = np.zeros(q.size)
        offset[nu] = step
        total += (flux(q + offset, nu) - flux(q - offset, nu)) / (2.0 * step)
    return total / math.sqrt(float(np.linalg.det(chart.metric(q))))


def domain_coverage(
    law,
    state,
    chart: Optional[Chart] = None,
    grid: Optional[GridSpec] = None,
    probes: int = 0,
    signs=None,
) -> FlowReport:
    """Admissible share of the box and of the probability weight on a cell-centred grid."""
    law = get_law(law)
    chart = chart if chart is not None else state.chart()
    law.check_chart(chart)
    grid = grid or GridSpec(bounds=state.box, subsamples=COVERAGE_SUBSAMPLES)
    mesh = np.stack(np.meshgrid(*grid.axes(), indexing="ij"), axis=-1).reshape(-1, chart.dimension)
    field = pullback(state.field, chart)

    admitted = 0
    weight_in = weight_all = 0.0
    chosen: List[np.ndarray] = []
    for start in range(0, mesh.shape[0], CHUNK):
        points = mesh[start : start + CHUNK]
        report = admissible(law, state, chart, points)
        volume = np.sqrt(np.linalg.det(chart.metric(points)))
        rho = field.value(points) ** 2 * volume
        admitted += int(np.count_nonzero(report.admissible))
        weight_in += float(np.sum(rho[report.admissible]))
        weight_all += float(np.sum(rho))
        if probes:
            chosen.append(points[report.admissible])

    divergences = []
    if probes:
        candidates = np.concatenate(chosen)
        for index in np.linspace(0, candidates.shape[0] - 1, probes + 2)[1:-1].astype(int):
            point = candidates[index]
            try:
                value = divergence(law, state, chart, point, signs)
            except QtrajError as e:
                logger.debug(f"Skipping divergence probe at {point}: {e}")
                continue
            divergences.append(
                {
                    "point": point.tolist(),
                    "divergence": value,
                    "density": float(field.value(point)) ** 2,
                }
            )

    report = FlowReport(
        law=law.get_law_name(),
        grid=grid,
        admissible_fraction=admitted / mesh.shape[0],
        weight_fraction=weight_in / weight_all if weight_all > 0.0 else 0.0,
        divergences=divergences,
    )
    logger.info(
        f"{report.law} coverage: area {report.admissible_fraction:.4f}, "
        f"weight {report.weight_fraction:.4f}"
    )
    return report


def marginal_density(state, t: float = 0.0, coordinate: int = 0, points: int = 64) -> Callable:
    """Density of one coordinate, integrating the others over the declared box."""
    if state.n == 1:
        return lambda x: density(state, np.asarray(x, dtype=float)[..., None], t)
    others = tuple(b for i, b in enumerate(state.box) if i != coordinate)
    mesh, weight = quadrature_grid(others, points)
    mesh, weight = mesh.reshape(-1, len(others)), weight.reshape(-1)
    rest = [i for i in range(state.n) if i != coordinate]

    def fn(x):
        x = np.asarray(x, dtype=float)
        full = np.empty(x.shape + (mesh.shape[0], state.n))
        full[..., rest] = mesh
        full[..., coordinate] = x[..., None]
        return np.sum(density(state, full, t) * weight, axis=-1)

    return fn


def sample_density(state: RealStationaryState, count: int, seed: int, batch: int = 65536) -> np.ndarray:
    """Rejection sampling of points from psi^2 over the declared box."""
    rng = np.random.default_rng(seed)
    lows = np.array([lo for lo, _ in state.box])
    widths = np.array([hi - lo for lo, hi in state.box])
    envelope = 1.05 * state.peak**2
    accepted, total = [], 0
    while total < count:
        x = lows + widths * rng.random((batch, state.n))
        keep = rng.random(batch) * envelope < state.psi(x) ** 2
        accepted.append(x[keep])
        total += int(np.count_nonzero(keep))
    return np.concatenate(accepted)[:count]


def law_member(job: Tuple) -> Tuple[Optional[Tuple[float, ...]], str]:
    """Integrate one ensemble member; the state is rebuilt from its spec."""
    law, spec, hbar, q0, signs, dt, t_max, refinement = job
    state = parse_state_spec(spec, hbar)
    trajectory = integrate(law, state, None, q0, signs, dt, t_max, refinement)
    if not trajectory.completed:
        return None, trajectory.reason
    return tuple(trajectory.points[-1].tolist()), trajectory.reason


def law_source(
    law: str,
    spec: str,
    hbar: float = 1.0,
    t_max: float = 1.0,
    dt: float = 1e-2,
    coordinate: int = 0,
    refinement: float = 0.25,
    mapper: Callable = map,
) -> Callable:
    """
    Ensemble source for a stationary-state law: starting points drawn from psi^2,
    random signs, each member integrated to t_max. Members that start or
    end outside the admissible domain count as lost.
    """

    def source(count: int, seed: int):
        state = parse_state_spec(spec, hbar)
        if not isinstance(state, RealStationaryState):
            raise ValueError(f"The {law} law needs a real stationary state, got '{spec}'")
        starts = sample_density(state, count, seed)
        rng = np.random.default_rng(seed + 1)
        signs = rng.choice([-1, 1], size=starts.shape)
        jobs = [
            (law, spec, hbar, tuple(q), tuple(s), dt, t_max, refinement)
            for q, s in zip(starts, signs)
        ]
        finals = [point for point, _ in mapper(law_member, jobs)]
        kept = np.array([p[coordinate] for p in finals if p is not None])
        return kept, len(finals) - kept.size

    return source


def holland_source(
    spec: str, hbar: float = 1.0, t0: float = 0.0, t_max: float = 1.0, dt: float = 5e-3, coordinate: int = 0
) -> Callable:
    """Ensemble source for the internal-angle model; halted members count as lost."""

    def source(count: int, seed: int):
        state = parse_state_spec(spec, hbar)
        if not isinstance(state, TwoVectorState):
            raise ValueError(f"The internal-angle model needs a two-vector state, got '{spec}'")
        x, angles = sample_initial(state, t0, count, seed)
        result = evolve_ensemble(state, x, angles, dt, t_max, t0)
        done = result.reasons == "completed"
        return result.points[done, coordinate], int(np.count_nonzero(~done))

    return source


def ensemble_compare(
    source: Callable,
    target: Callable,
    domain: Tuple[float, float],
    bins: int = 20,
    count: int = MIN_ENSEMBLE_SIZE,
    seed: int = 0,
    notes: Optional[str] = None,
) -> ChiSquareSummary:
    if count < MIN_ENSEMBLE_SIZE:
        raise ValueError(f"Ensembles need at least {MIN_ENSEMBLE_SIZE} members, got {count}")
    positions, lost = source(count, seed)
    summary = chi_square_summary(positions, target, domain, bins, lost=lost, notes=notes)
    logger.info(
        f"Ensemble of {count}: chi2 = {summary.statistic:.2f} on {summary.dof} dof, "
        f"z = {summary.z_score:.2f}, lost {summary.lost}"
    )
    return summary


def dbb_baseline(state: TwoVectorState, x, t: float = 0.0) -> np.ndarray:
    """Mean-flow velocity j / rho."""
    rho = density(state, x, t)
    if np.any(rho <= XI_THRESHOLD):
        raise NodeOfRho(f"rho = {float(np.min(rho)):.3e} is too small for j / rho")
    return current(state, x, t) / np.asarray(rho)[..., None]


def covariance_check(
    law,
    state,
    chart_a: Chart,
    chart_b: Chart,
    x,
    signs=None,
    connection: bool = True,
) -> float:
    """
    |J_A qdot_A - J_B qdot_B| at the reference Cartesian point x. Mode
    frames are matched after pushing both into Cartesian components.
    `connection=False` drops the Christoffel term in chart B.
    """
    law = get_law(law)
    x = np.asarray(x, dtype=float)
    signs = _signs(law, state, signs)
    qa, qb = chart_a.from_cartesian(x), chart_b.from_cartesian(x)
    modes_a = law.modes(state, chart_a, qa)
    modes_b = law.modes(state, chart_b, qb, connection=connection)
    directions_a = chart_a.jacobian(qa) @ modes_a.directions
    directions_b = chart_b.jacobian(qb) @ modes_b.directions
    radicands_b = modes_b.radicands

    if law.uses_frame():
        metric = chart_a.reference().metric(x)
        frame_a = PrincipalFrame(-modes_a.radicands, directions_a, x, metric)
        frame_b = PrincipalFrame(-radicands_b, directions_b, x, metric)
        order, flips = match_frames(frame_a, frame_b)
        radicands_b = radicands_b[order]
        directions_b = directions_b[:, order] * flips

    velocity_a = compose_velocity(ModeSet(modes_a.radicands, directions_a), signs, state.hbar)
    velocity_b = compose_velocity(ModeSet(radicands_b, directions_b), signs, state.hbar)
    discrepancy = float(np.linalg.norm(velocity_a - velocity_b))
    logger.debug(f"{law.get_law_name()} covariance discrepancy {discrepancy:.3e} at {x}")
    return discrepancy


def chart_agreement(state: RealStationaryState, chart_a: Chart, chart_b: Chart, x) -> Dict[str, float]:
    """Differences of the Laplacian and of the principal values of psi's Hessian between charts."""
    x = np.asarray(x, dtype=float)
    results = {}
    values = []
    laplacians = []
    for chart in (chart_a, chart_b):
        q = chart.from_cartesian(x)
        field = pullback(state.field, chart)
        laplacians.append(float(laplacian(field, chart, q)))
        eigenvalues, _, _ = spectrum(covariant_hessian(field, chart, q), chart.metric(q))
        values.append(np.sort(eigenvalues))
    results["laplacian"] = abs(laplacians[0] - laplacians[1])
    results["eigenvalues"] = float(np.max(np.abs(values[0] - values[1])))
    return results
