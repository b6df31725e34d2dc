"""Brute-force position-grid wavefunctions.

Everything the closed forms in :mod:`qpathdim.gaussian_state` claim can be
checked here by direct quadrature: free propagation is done exactly in
momentum space, the meter operator is applied pointwise, and moments are
read off by trapezoid sums (spectrally accurate for smooth decaying
integrands) and FFT derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian_state import NATURAL, Constants, GaussianState

__all__ = [
    "GridError",
    "GridSpec",
    "GridWavefunction",
    "Observables",
    "abs_x_quadrature",
    "apply_meter",
    "fit_gaussian",
    "init_gaussian",
    "observables",
    "propagate_free",
]

BOUNDARY_TOL = 1e-8
DEFAULT_POINTS = 4096
DEFAULT_EXTENT_STD = 12.0


class GridError(ValueError):
    """The grid cannot faithfully represent the requested wavefunction."""


@dataclass(frozen=True)
class GridSpec:
    x0: float
    dx_grid: float
    n: int = DEFAULT_POINTS

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx_grid * np.arange(self.n)

    @property
    def x_max(self) -> float:
        return self.x0 + self.dx_grid * (self.n - 1)

    @classmethod
    def covering(
        cls,
        states,
        n: int = DEFAULT_POINTS,
        n_std: float = DEFAULT_EXTENT_STD,
        include=(),
    ) -> GridSpec:
        """Grid spanning ``n_std`` standard deviations of every state given.

        ``include`` lists extra points (e.g. meter outcomes) the grid must reach.
        """
        lo, hi = [], []
        for s in states:
            half = n_std * math.sqrt(s.delta / 2.0)
            lo.append(s.a - half)
            hi.append(s.a + half)
        lo.extend(include)
        hi.extend(include)
        left, right = min(lo), max(hi)
        dxg = (right - left) / (n - 1)
        return cls(x0=left, dx_grid=dxg, n=n)


@dataclass(frozen=True, eq=False)
class GridWavefunction:
    x0: float
    dx_grid: float
    amplitudes: np.ndarray

    @property
    def n(self) -> int:
        return self.amplitudes.size

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx_grid * np.arange(self.n)

    @property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx_grid)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.dx_grid)

    def replace(self, amplitudes: np.ndarray) -> GridWavefunction:
        return GridWavefunction(self.x0, self.dx_grid, amplitudes)


def _check_support(psi: GridWavefunction, what: str) -> None:
    dens = np.abs(psi.amplitudes) ** 2
    peak = dens.max()
    edge = max(dens[0], dens[-1])
    if edge > BOUNDARY_TOL * peak:
        raise GridError(f"{what}: boundary density {edge:.3e} exceeds {BOUNDARY_TOL:g} of peak {peak:.3e}")
    spec = np.abs(np.fft.fft(psi.amplitudes)) ** 2
    # Nyquist bin plus its neighbours must be empty, otherwise momenta alias
    h = psi.n // 2
    tail = spec[h - 1 : h + 2].max()
    if tail > BOUNDARY_TOL * spec.max():
        raise GridError(f"{what}: momentum content reaches the Nyquist limit; refine dx_grid")


def init_gaussian(state: GaussianState, grid: GridSpec, c: Constants = NATURAL) -> GridWavefunction:
    """Discretize ``state`` on ``grid`` and renormalize."""
    half = 8.0 * math.sqrt(state.delta / 2.0)
    if grid.x0 > state.a - half or grid.x_max < state.a + half:
        raise GridError(
            f"grid [{grid.x0:g}, {grid.x_max:g}] does not cover a +- 8 std = "
            f"[{state.a - half:g}, {state.a + half:g}]"
        )
    k_nyq = math.pi / grid.dx_grid
    p_reach = abs(state.b_mom) + 8.0 * math.sqrt(state.var_p(c))
    if p_reach / c.hbar > k_nyq:
        raise GridError(
            f"grid spacing {grid.dx_grid:g} resolves |p| < {c.hbar * k_nyq:g}; state reaches {p_reach:g}"
        )
    x = grid.x
    u = x - state.a
    phase = 0.5 * state.eps * u * u / state.delta + state.b_mom * x / c.hbar
    amp = np.exp(-0.5 * u * u / state.delta + 1j * phase)
    amp /= math.sqrt(np.sum(np.abs(amp) ** 2) * grid.dx_grid)
    psi = GridWavefunction(grid.x0, grid.dx_grid, amp)
    _check_support(psi, "init_gaussian")
    return psi


def propagate_free(psi: GridWavefunction, t: float, c: Constants = NATURAL) -> GridWavefunction:
    """Apply exp(-i p^2 t / (2 m hbar)) in momentum space."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    if t == 0:
        return psi
    k = psi.k
    kernel = np.exp(-0.5j * c.hbar * k * k * t / c.mass)
    out = psi.replace(np.fft.ifft(kernel * np.fft.fft(psi.amplitudes)))
    _check_support(out, "propagate_free")
    return out


def apply_meter(psi: GridWavefunction, outcome: float, sigma: float) -> tuple[GridWavefunction, float]:
    """Multiply by the meter operator and renormalize.

    Returns the posterior wavefunction and the outcome density at ``outcome``.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if math.isinf(sigma):
        return psi, 0.0
    x = psi.x
    meter = (math.pi * sigma) ** -0.25 * np.exp(-((outcome - x) ** 2) / (2.0 * sigma))
    new = meter * psi.amplitudes
    likelihood = float(np.sum(np.abs(new) ** 2) * psi.dx_grid)
    if not likelihood > np.finfo(float).tiny:
        raise GridError(f"outcome {outcome:g} has vanishing likelihood on this grid")
    return psi.replace(new / math.sqrt(likelihood)), likelihood


@dataclass(frozen=True)
class Observables:
    mean_x: float
    mean_p: float
    var_x: float
    var_p: float
    cov_xp: float
    abs_x: float


def _shift_to_node(psi: GridWavefunction, point: float) -> tuple[np.ndarray, int]:
    """Resample psi (band-limited interpolation) so that ``point`` is a grid node."""
    j = int(math.floor((point - psi.x0) / psi.dx_grid))
    theta = (point - psi.x0) / psi.dx_grid - j
    if theta == 0.0:
        return psi.amplitudes, j
    # psi(x + theta*h) sampled at the original nodes
    shifted = np.fft.ifft(np.fft.fft(psi.amplitudes) * np.exp(1j * psi.k * theta * psi.dx_grid))
    return shifted, j


def abs_x_quadrature(psi: GridWavefunction, corrected: bool = True) -> float:
    """Integral of ``|x| |psi|^2``.

    The integrand has a kink at the origin, so the plain trapezoid sum is only
    second order. With ``corrected`` the origin is made a node and the
    Euler-Maclaurin end terms at the kink are added, leaving an O(h^6) error.
    """
    h = psi.dx_grid
    if not corrected:
        return float(np.sum(np.abs(psi.x) * np.abs(psi.amplitudes) ** 2) * h)
    amps, j = _shift_to_node(psi, 0.0)
    x = h * (np.arange(psi.n) - j)
    rho = np.abs(amps) ** 2
    total = np.sum(np.abs(x) * rho) * h
    if not 2 <= j < psi.n - 2:
        return float(total)
    d1 = np.fft.ifft(1j * psi.k * np.fft.fft(amps))
    d2 = np.fft.ifft(-(psi.k**2) * np.fft.fft(amps))
    rho0 = rho[j]
    rho2 = 2.0 * (abs(d1[j]) ** 2 + (np.conj(amps[j]) * d2[j]).real)
    return float(total + h * h / 6.0 * rho0 - h**4 / 120.0 * rho2)


def observables(psi: GridWavefunction, c: Constants = NATURAL, corrected_abs_x: bool = True) -> Observables:
    """Position moments by quadrature and momentum moments spectrally."""
    h = psi.dx_grid
    x = psi.x
    amps = psi.amplitudes
    rho = np.abs(amps) ** 2
    norm = np.sum(rho) * h
    rho = rho / norm
    mean_x = float(np.sum(x * rho) * h)
    var_x = float(np.sum((x - mean_x) ** 2 * rho) * h)

    k = psi.k
    phi = np.fft.fft(amps)
    w = np.abs(phi) ** 2
    w = w / w.sum()
    mean_p = float(c.hbar * np.sum(k * w))
    var_p = float(c.hbar**2 * np.sum((k - mean_p / c.hbar) ** 2 * w))

    dpsi = np.fft.ifft(1j * k * phi)
    # Re <psi| x p |psi> is the symmetrized correlator
    xp = float((np.sum(np.conj(amps) * x * (-1j * c.hbar) * dpsi) * h).real / norm)
    cov_xp = xp - mean_x * mean_p

    abs_x = abs_x_quadrature(psi.replace(amps / math.sqrt(norm)), corrected=corrected_abs_x)
    return Observables(mean_x, mean_p, var_x, var_p, cov_xp, abs_x)


def fit_gaussian(psi: GridWavefunction, c: Constants = NATURAL) -> GaussianState:
    """Gaussian parameters whose moments equal those of ``psi``."""
    obs = observables(psi, c)
    delta = 2.0 * obs.var_x
    return GaussianState(a=obs.mean_x, b_mom=obs.mean_p, delta=delta, eps=2.0 * obs.cov_xp / c.hbar)
