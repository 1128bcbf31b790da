"""Transfer-matrix mode solver for symmetric Bragg reflection waveguides.

The transverse state is (F, G) with G = F' / n^(2 rho), rho = 0 for TE and 1
for TM, so both components are continuous across interfaces. The reflectors
are treated as semi-infinite periodic claddings: a guided mode is a state at
the core edge that is the decaying Bloch eigenvector of the period matrix.
The ridge is reduced to a 2-D effective index by a lateral slab solve.
"""
import logging
import math
from typing import List, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import trapezoid
from scipy.optimize import brentq

from brw_source.exceptions import ModeNotFoundError, NoBandgapModeError
from brw_source.models.mode import GuidedMode, ModeClass, ModeProfile2D, Parity, Polarization, RidgeMode
from brw_source.models.stack import IndexProfile, Layer, LayerStack
from brw_source.services.materials import DEFAULT_MATERIAL, MaterialModel

logger = logging.getLogger(__name__)

StackLike = Union[LayerStack, IndexProfile]

# |trace| must clear 2 by this much to count as a bandgap.
GAP_MARGIN = 1e-9


class SolverSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    scan_points: int = Field(default=2000, ge=10)
    xtol: float = Field(default=1e-13, gt=0.0)
    residual_tol: float = Field(default=1e-9, gt=0.0)
    vertical_step_nm: float = Field(default=1.0, gt=0.0)
    lateral_step_nm: float = Field(default=10.0, gt=0.0)
    lateral_margin_um: float = Field(default=3.0, gt=0.0)
    bragg_search_depth: float = Field(default=0.5, gt=0.0)


DEFAULT_SETTINGS = SolverSettings()


def _rho(pol: Polarization) -> int:
    if pol == "TE":
        return 0
    if pol == "TM":
        return 1
    raise ValueError(f"Unknown polarization: {pol}")


def _k0(wavelength_um: float) -> float:
    return 2.0 * np.pi / wavelength_um


def _layer_entries(n: float, t_um, n_eff, k0: float, rho: int):
    """Entries (a, b, c, d) of the layer matrix, broadcast over thickness and n_eff."""
    t = np.asarray(t_um, dtype=float)
    ne = np.asarray(n_eff, dtype=float)
    w = n ** (2 * rho)
    kappa = k0 * np.sqrt((n * n - ne * ne).astype(complex))
    phase = kappa * t
    cos = np.cos(phase).real
    with np.errstate(divide="ignore", invalid="ignore"):
        sin_over_kappa = np.where(kappa == 0, t, np.sin(phase) / kappa).real
    kappa_sin = (kappa * np.sin(phase)).real
    return cos, w * sin_over_kappa, -kappa_sin / w, cos


def layer_matrix(n: float, t_nm: float, n_eff: float, wavelength_um: float, pol: Polarization) -> np.ndarray:
    """2x2 transfer matrix of one homogeneous layer (unimodular, real-valued)."""
    if t_nm < 0:
        raise ValueError(f"Layer thickness must be non-negative, got {t_nm}")
    a, b, c, d = _layer_entries(n, t_nm * 1e-3, n_eff, _k0(wavelength_um), _rho(pol))
    return np.array([[a, b], [c, d]], dtype=complex)


def _period_entries(indices, thicknesses_nm, n_eff, k0: float, rho: int):
    """Entries of M2 @ M1, layer 1 being the one next to the core."""
    a1, b1, c1, d1 = _layer_entries(indices[0], thicknesses_nm[0] * 1e-3, n_eff, k0, rho)
    a2, b2, c2, d2 = _layer_entries(indices[1], thicknesses_nm[1] * 1e-3, n_eff, k0, rho)
    return (
        a2 * a1 + b2 * c1,
        a2 * b1 + b2 * d1,
        c2 * a1 + d2 * c1,
        c2 * b1 + d2 * d1,
    )


def period_trace(bilayer: Tuple[Layer, Layer], n_eff, wavelength_um: float, pol: Polarization,
                 material: MaterialModel = DEFAULT_MATERIAL):
    """Trace of the per-period matrix; |trace| > 2 means a photonic bandgap."""
    indices = [layer.refractive_index(wavelength_um, material) for layer in bilayer]
    thicknesses = [layer.thickness_nm for layer in bilayer]
    m00, _, _, m11 = _period_entries(indices, thicknesses, n_eff, _k0(wavelength_um), _rho(pol))
    trace = m00 + m11
    return float(trace) if np.ndim(trace) == 0 else trace


def _core_edge_state(profile: IndexProfile, n_eff, k0: float, rho: int, parity: Parity):
    a, b, c, d = _layer_entries(profile.core_index, profile.core_thickness_nm * 0.5e-3, n_eff, k0, rho)
    if parity == "even":
        return a, c
    return b, d


def dispersion_residual(profile: IndexProfile, n_eff, wavelength_um: float, pol: Polarization,
                        parity: Parity = "even"):
    """Dimensionless det[v_c, M v_c]; zero when the core-edge state is a Bloch eigenvector.

    The residual is pole-free. Roots include growing eigenvectors, which the
    callers reject.
    """
    k0 = _k0(wavelength_um)
    rho = _rho(pol)
    f, g = _core_edge_state(profile, n_eff, k0, rho, parity)
    m00, m01, m10, m11 = _period_entries(
        profile.bilayer_indices, profile.bilayer_thicknesses_nm, n_eff, k0, rho
    )
    g = g / k0
    m01 = m01 * k0
    m10 = m10 / k0
    det = m10 * f * f + (m11 - m00) * f * g - m01 * g * g
    scale = (f * f + g * g) * np.sqrt(m00 ** 2 + m01 ** 2 + m10 ** 2 + m11 ** 2)
    residual = det / scale
    return float(residual) if np.ndim(residual) == 0 else residual


def _decaying_eigenvalue(profile: IndexProfile, n_eff: float, k0: float, rho: int):
    """Bloch eigenvalue with modulus < 1, or None outside a bandgap."""
    m00, _, _, m11 = _period_entries(profile.bilayer_indices, profile.bilayer_thicknesses_nm, n_eff, k0, rho)
    trace = float(m00 + m11)
    if abs(trace) <= 2.0 + GAP_MARGIN:
        return None, trace
    root = math.sqrt(trace * trace - 4.0)
    # 1 / growing eigenvalue; the difference form cancels for thick evanescent periods
    return 2.0 / (trace + math.copysign(root, trace)), trace


def _eigenvector(m00: float, m01: float, m10: float, m11: float, shift_0: float, shift_1: float):
    """Better conditioned of the two null vectors of M - lambda with shift_i = lambda - m_ii."""
    first = np.array([m01, shift_0])
    second = np.array([shift_1, m10])
    return first if np.linalg.norm(first) >= np.linalg.norm(second) else second


def _sine(u: np.ndarray, v: np.ndarray) -> float:
    return abs(u[0] * v[1] - u[1] * v[0]) / (np.linalg.norm(u) * np.linalg.norm(v))


def _is_decaying(profile: IndexProfile, n_eff: float, k0: float, rho: int, parity: Parity,
                 eigenvalue: float) -> bool:
    """True when the core-edge state lies closer to the decaying than to the growing Bloch vector.

    Both eigenvectors come from the matrix entries directly; M v itself loses
    the decaying component once the period gain exceeds 1 / machine epsilon.
    """
    f, g = _core_edge_state(profile, n_eff, k0, rho, parity)
    m00, m01, m10, m11 = (float(m) for m in _period_entries(
        profile.bilayer_indices, profile.bilayer_thicknesses_nm, n_eff, k0, rho
    ))
    # scaled coordinates (F, G / k0) keep both components comparable
    m01, m10 = m01 * k0, m10 / k0
    state = np.array([float(f), float(g) / k0])
    decaying = _eigenvector(m00, m01, m10, m11, eigenvalue - m00, eigenvalue - m11)
    # growing eigenvalue = trace - eigenvalue, written without the cancelling sum
    growing = _eigenvector(m00, m01, m10, m11, m11 - eigenvalue, m00 - eigenvalue)
    return _sine(state, decaying) < _sine(state, growing)


def _find_roots(profile: IndexProfile, wavelength_um: float, pol: Polarization,
                bracket: Tuple[float, float], settings: SolverSettings) -> List[Tuple[float, Parity, float]]:
    """All accepted (n_eff, parity, bloch eigenvalue) in the open bracket, descending."""
    lo, hi = bracket
    if not hi > lo:
        return []
    k0 = _k0(wavelength_um)
    rho = _rho(pol)
    grid = np.linspace(lo, hi, settings.scan_points + 2)[1:-1]
    roots = []
    for parity in ("even", "odd"):
        values = dispersion_residual(profile, grid, wavelength_um, pol, parity)

        def residual(n_eff, parity=parity):
            return dispersion_residual(profile, n_eff, wavelength_um, pol, parity)

        candidates = list(grid[values == 0.0])
        for i in np.nonzero(values[:-1] * values[1:] < 0.0)[0]:
            candidates.append(brentq(residual, grid[i], grid[i + 1], xtol=settings.xtol))

        for n_eff in candidates:
            n_eff = float(n_eff)
            if abs(residual(n_eff)) >= settings.residual_tol:
                logger.warning(
                    f"Dropped {pol} {parity} root {n_eff:.9f} at {wavelength_um:.6f} um: "
                    f"residual {residual(n_eff):.3e} above {settings.residual_tol:.1e}"
                )
                continue
            eigenvalue, trace = _decaying_eigenvalue(profile, n_eff, k0, rho)
            if eigenvalue is None or not _is_decaying(profile, n_eff, k0, rho, parity, eigenvalue):
                continue
            roots.append((n_eff, parity, eigenvalue))
    roots.sort(key=lambda root: -root[0])
    return roots


def _mode_profile(profile: IndexProfile, n_eff: float, wavelength_um: float, pol: Polarization,
                  parity: Parity, eigenvalue: float, spacing_nm: float):
    """Sample U(y) over core plus all reflector periods, normalized in um."""
    k0 = _k0(wavelength_um)
    rho = _rho(pol)
    half_core = profile.core_thickness_nm / 2.0
    count = int(math.floor(profile.half_extent_nm / spacing_nm + 1e-9))
    y = np.arange(count + 1) * spacing_nm
    f = np.zeros_like(y)
    n_local = np.full_like(y, profile.core_index)

    v0 = (1.0, 0.0) if parity == "even" else (0.0, 1.0)
    inside = y <= half_core
    a, b, _, _ = _layer_entries(profile.core_index, y[inside] * 1e-3, n_eff, k0, rho)
    f[inside] = a * v0[0] + b * v0[1]
    a, b, c, d = _layer_entries(profile.core_index, half_core * 1e-3, n_eff, k0, rho)
    edge_state = (float(a * v0[0] + b * v0[1]), float(c * v0[0] + d * v0[1]))

    # Each period is filled inward from its outer face, where the Bloch state is
    # known exactly; inward the decaying solution grows, so rounding cannot.
    layers = list(zip(profile.bilayer_indices, profile.bilayer_thicknesses_nm))
    for k in range(profile.periods):
        scale = eigenvalue ** (k + 1)
        state = (scale * edge_state[0], scale * edge_state[1])
        stop = half_core + (k + 1) * profile.period_nm
        for n, t in reversed(layers):
            start = stop - t
            mask = (y > start) & (y <= stop)
            a, b, _, _ = _layer_entries(n, (y[mask] - stop) * 1e-3, n_eff, k0, rho)
            f[mask] = a * state[0] + b * state[1]
            n_local[mask] = n
            a, b, c, d = _layer_entries(n, -t * 1e-3, n_eff, k0, rho)
            state = (float(a * state[0] + b * state[1]), float(c * state[0] + d * state[1]))
            stop = start

    u = f / n_local ** 2 if rho == 1 else f
    mirrored = u[:0:-1] if parity == "even" else -u[:0:-1]
    position = np.concatenate((-y[:0:-1], y))
    field = np.concatenate((mirrored, u))

    field = field / math.sqrt(trapezoid(field ** 2, position * 1e-3))
    if field[np.argmax(np.abs(field))] < 0:
        field = -field
    return position, field


def _resolve(stack: StackLike, wavelength_um: float, material: MaterialModel) -> IndexProfile:
    if isinstance(stack, IndexProfile):
        return stack
    return stack.index_profile(wavelength_um, material)


def _build_modes(profile, roots, wavelength_um, pol, mode_class, settings, with_profile, spacing_nm=None):
    spacing = spacing_nm or settings.vertical_step_nm
    modes = []
    for n_eff, parity, eigenvalue in roots:
        position = field = None
        if with_profile:
            position, field = _mode_profile(profile, n_eff, wavelength_um, pol, parity, eigenvalue, spacing)
        modes.append(GuidedMode(
            polarization=pol,
            mode_class=mode_class,
            n_eff=n_eff,
            wavelength_um=wavelength_um,
            parity=parity,
            bloch_eigenvalue=eigenvalue,
            sample_spacing_nm=spacing,
            position_nm=position,
            field=field,
        ))
    return modes


def find_tir_modes(stack: StackLike, wavelength_um: float, pol: Polarization,
                   material: MaterialModel = DEFAULT_MATERIAL, settings: SolverSettings = DEFAULT_SETTINGS,
                   with_profile: bool = True, spacing_nm: float = None) -> List[GuidedMode]:
    """All TIR modes, sorted by descending n_eff; empty when none is guided.

    The TIR bracket runs from the lowest reflector index up to the highest
    index anywhere in the stack.
    """
    profile = _resolve(stack, wavelength_um, material)
    bracket = (profile.reflector_min_index, profile.max_index)
    roots = _find_roots(profile, wavelength_um, pol, bracket, settings)
    logger.debug(f"Found {len(roots)} TIR {pol} modes at {wavelength_um:.6f} um")
    return _build_modes(profile, roots, wavelength_um, pol, "TIR", settings, with_profile, spacing_nm)


def find_bragg_mode(stack: StackLike, wavelength_um: float, pol: Polarization,
                    material: MaterialModel = DEFAULT_MATERIAL, settings: SolverSettings = DEFAULT_SETTINGS,
                    with_profile: bool = True) -> GuidedMode:
    """Lowest-order bandgap-confined mode (highest n_eff below every reflector index)."""
    profile = _resolve(stack, wavelength_um, material)
    upper = profile.reflector_min_index
    bracket = (max(upper - settings.bragg_search_depth, 1.0), upper)
    roots = _find_roots(profile, wavelength_um, pol, bracket, settings)
    if not roots:
        raise NoBandgapModeError(
            f"No bandgap-confined {pol} mode at {wavelength_um:.6f} um "
            f"for n_eff in ({bracket[0]:.4f}, {bracket[1]:.4f})"
        )
    return _build_modes(profile, roots[:1], wavelength_um, pol, "Bragg", settings, with_profile)[0]


def find_vertical_mode(stack: StackLike, wavelength_um: float, pol: Polarization, mode_class: ModeClass,
                       material: MaterialModel = DEFAULT_MATERIAL, settings: SolverSettings = DEFAULT_SETTINGS,
                       with_profile: bool = True) -> GuidedMode:
    """Fundamental vertical mode of the requested class."""
    if mode_class == "Bragg":
        return find_bragg_mode(stack, wavelength_um, pol, material, settings, with_profile)
    if mode_class != "TIR":
        raise ValueError(f"Unknown mode class: {mode_class}")
    modes = find_tir_modes(stack, wavelength_um, pol, material, settings, with_profile)
    if not modes:
        raise ModeNotFoundError(f"No TIR {pol} mode at {wavelength_um:.6f} um")
    return modes[0]


def solve_ridge_mode(stack: LayerStack, wavelength_um: float, pol: Polarization, mode_class: ModeClass,
                     material: MaterialModel = DEFAULT_MATERIAL, settings: SolverSettings = DEFAULT_SETTINGS,
                     with_profile: bool = False) -> RidgeMode:
    """Effective-index method: vertical solve, then a lateral slab with swapped polarization."""
    vertical = find_vertical_mode(stack, wavelength_um, pol, mode_class, material, settings, with_profile)
    if math.isinf(stack.ridge_width_nm):
        return RidgeMode(vertical=vertical, n_eff=vertical.n_eff)

    lateral_profile = IndexProfile.slab(
        core_index=vertical.n_eff,
        core_thickness_nm=stack.ridge_width_nm,
        cladding_index=vertical.n_eff - stack.lateral_index_contrast,
        cladding_extent_nm=settings.lateral_margin_um * 1000.0,
    )
    lateral_pol = "TM" if pol == "TE" else "TE"
    lateral_modes = [
        mode for mode in find_tir_modes(
            lateral_profile, wavelength_um, lateral_pol, material, settings,
            with_profile=with_profile, spacing_nm=settings.lateral_step_nm,
        )
        if mode.parity == "even"
    ]
    if not lateral_modes:
        logger.warning(
            f"Lateral cutoff for {pol} {mode_class} mode at {wavelength_um:.6f} um; "
            f"using the vertical effective index"
        )
        return RidgeMode(vertical=vertical, n_eff=vertical.n_eff, lateral_cutoff=True)
    lateral = lateral_modes[0]
    return RidgeMode(vertical=vertical, lateral=lateral, n_eff=lateral.n_eff)


def effective_index_2d(stack: LayerStack, wavelength_um: float, pol: Polarization, mode_class: ModeClass,
                       material: MaterialModel = DEFAULT_MATERIAL,
                       settings: SolverSettings = DEFAULT_SETTINGS) -> float:
    return solve_ridge_mode(stack, wavelength_um, pol, mode_class, material, settings).n_eff


def mode_profile_2d(vertical: GuidedMode, lateral: GuidedMode) -> ModeProfile2D:
    """Separable 2-D profile from the vertical and lateral 1-D solutions."""
    if not (vertical.has_profile and lateral.has_profile):
        raise ValueError("both 1-D modes need sampled profiles")
    return ModeProfile2D(
        x_um=lateral.position_nm * 1e-3,
        y_um=vertical.position_nm * 1e-3,
        x_field=lateral.field,
        y_field=vertical.field,
    )


def ridge_profile_2d(ridge: RidgeMode) -> ModeProfile2D:
    if ridge.lateral is None:
        raise ModeNotFoundError("ridge mode has no lateral solution (infinite width or cutoff)")
    return mode_profile_2d(ridge.vertical, ridge.lateral)
