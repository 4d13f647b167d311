"""
Core types and observables for the nonlinear Aubry-Andre (AA) lattice model.

The model lives on an open chain of L sites with the discrete
Gross-Pitaevskii-type equation of motion

    i hbar d(phi_j)/dt = J (phi_{j+1} + phi_{j-1}) + eps_j phi_j - U |phi_j|^2 phi_j,

where eps_j = Delta * cos(2 pi beta j + phi) is the quasiperiodic on-site
potential and beta defaults to the inverse golden ratio (sqrt(5)-1)/2.

Conventions used throughout the package:
- internal units: hbar = 1, energies in units of J, time in hbar/J;
  SI conversion happens only at the CLI boundary (see UnitSystem).
- sites are indexed j = 0..L-1 inside the cosine; any centered labeling
  is absorbed by the disorder phase phi and the `center` field of states.
- open (hard-wall) boundaries: phi_{-1} = phi_L = 0.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

# inverse golden ratio, the standard incommensurate choice for beta
BETA_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0

# interaction scale beyond which the mean-field state tends to self-trap;
# parameter sets past this are accepted but flagged
SELF_TRAPPING_RATIO = 1.5

# SI constants (CODATA-sized, for boundary conversions only)
HBAR_SI = 1.054571817e-34      # J s
H_SI = 6.62607015e-34          # J s
BOHR_RADIUS_SI = 5.29177210903e-11   # m
CS_MASS_SI = 2.2069e-25        # kg, caesium-133


# -------------------------
# Parameter containers
# -------------------------

@dataclass(frozen=True)
class ModelParams:
    """Full parameterization of the lattice model (internal units)."""
    L: int
    J: float = 1.0
    Delta: float = 0.0
    beta: float = BETA_GOLDEN
    phi: float = 0.0
    U: float = 0.0

    def __post_init__(self):
        if not isinstance(self.L, (int, np.integer)) or self.L < 2:
            raise ValueError(f"L must be an integer >= 2, got {self.L!r}")
        for name in ("J", "Delta", "beta", "phi", "U"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if not (0.0 < self.beta < 1.0):
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.self_trapping_guard:
            warnings.warn(
                f"|U/J| = {abs(self.U / self.J):.3g} exceeds {SELF_TRAPPING_RATIO}; "
                "the weak-interaction regime is left and self-trapping may occur",
                stacklevel=2,
            )

    @property
    def self_trapping_guard(self) -> bool:
        """True when |U/J| is beyond the weak-interaction regime."""
        return self.J != 0.0 and abs(self.U / self.J) > SELF_TRAPPING_RATIO

    def negated(self) -> "ModelParams":
        """Params with (J, Delta, U) -> (-J, -Delta, -U); same beta, phi.

        The highest excited state of the model is the ground state of the
        negated model, which is how the excited-state solver is built.
        """
        return ModelParams(L=self.L, J=-self.J, Delta=-self.Delta,
                           beta=self.beta, phi=self.phi, U=-self.U)

    def to_dict(self) -> dict:
        return {"L": self.L, "J": self.J, "Delta": self.Delta,
                "beta": self.beta, "phi": self.phi, "U": self.U,
                "units": "internal (hbar = J = 1)"}


class LatticeState:
    """Normalized complex amplitude vector phi_j with a reference center site.

    The constructor renormalizes; a zero vector is rejected. `center` is the
    reference site for width measurements and defaults to (L-1)//2.
    """

    def __init__(self, amplitudes, center=None):
        amps = np.asarray(amplitudes, dtype=complex).copy()
        if amps.ndim != 1 or amps.size < 2:
            raise ValueError("amplitudes must be a 1-d vector of length >= 2")
        norm = np.linalg.norm(amps)
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError("cannot normalize a zero or non-finite state")
        self.amplitudes = amps / norm
        self.center = int((amps.size - 1) // 2 if center is None else center)
        if not (0 <= self.center < amps.size):
            raise ValueError(f"center {self.center} outside 0..{amps.size - 1}")

    @property
    def L(self) -> int:
        return self.amplitudes.size

    @property
    def density(self) -> np.ndarray:
        """Site densities n_j = |phi_j|^2 (nonnegative, sums to 1)."""
        return np.abs(self.amplitudes) ** 2

    @classmethod
    def single_site(cls, L, j, center=None):
        """All population on site j."""
        amps = np.zeros(L, dtype=complex)
        amps[j] = 1.0
        return cls(amps, center=center)

    def to_dict(self) -> dict:
        return {
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
            "center": self.center,
        }

    @classmethod
    def from_dict(cls, d):
        amps = np.array([complex(re, im) for re, im in d["amplitudes"]])
        return cls(amps, center=d.get("center"))


# -------------------------
# Potential and Hamiltonian action
# -------------------------

def quasiperiodic_potential(params: ModelParams, j=None):
    """On-site energies eps_j = Delta cos(2 pi beta j + phi).

    With j=None the full length-L vector is returned; an integer j gives the
    single value (j must be in range).
    """
    if j is None:
        idx = np.arange(params.L)
    else:
        if not (0 <= j < params.L):
            raise IndexError(f"site index {j} outside 0..{params.L - 1}")
        idx = j
    return params.Delta * np.cos(2.0 * np.pi * params.beta * idx + params.phi)


def apply_hamiltonian(params: ModelParams, state):
    """Action of the (state-dependent) Hamiltonian on the amplitudes.

    Component j is J (phi_{j+1} + phi_{j-1}) + eps_j phi_j - U |phi_j|^2 phi_j
    with hard-wall boundaries. Accepts a LatticeState or a plain vector and
    returns a vector of the same length.
    """
    v = state.amplitudes if isinstance(state, LatticeState) else np.asarray(state)
    if v.shape != (params.L,):
        raise ValueError(f"state length {v.shape} does not match L={params.L}")
    eps = quasiperiodic_potential(params)
    out = (eps - params.U * np.abs(v) ** 2) * v
    out = out.astype(v.dtype if np.iscomplexobj(v) else float)
    out[:-1] += params.J * v[1:]
    out[1:] += params.J * v[:-1]
    return out


# -------------------------
# Scalar observables
# -------------------------

def participation_ratio(state) -> float:
    """r = (1/L) / sum_j n_j^2, between 1/L (one site) and 1 (uniform)."""
    n = state.density if isinstance(state, LatticeState) else np.abs(np.asarray(state)) ** 2
    total = n.sum()
    if total <= 0.0 or not np.isfinite(total):
        raise ValueError("zero-norm state has no participation ratio")
    n = n / total
    return float(1.0 / (n.size * np.sum(n ** 2)))


def momentum_width(state: LatticeState) -> float:
    """Mean displacement <d> = sum_j |j - center| n_j from the center site."""
    n = state.density
    j = np.arange(state.L)
    return float(np.sum(np.abs(j - state.center) * n))


def energy_functional(params: ModelParams, state) -> float:
    """E[phi] = sum_j [ J(phi_j* phi_{j+1} + c.c.) + eps_j n_j - (U/2) n_j^2 ].

    The equation of motion is the variational derivative of this functional,
    so it is the conserved energy of the dynamics.
    """
    v = state.amplitudes if isinstance(state, LatticeState) else np.asarray(state)
    n = np.abs(v) ** 2
    eps = quasiperiodic_potential(params)
    hop = 2.0 * params.J * np.real(np.sum(np.conj(v[:-1]) * v[1:]))
    return float(hop + np.sum(eps * n) - 0.5 * params.U * np.sum(n ** 2))


def chemical_potential(params: ModelParams, state) -> float:
    """mu = <phi| H[phi] phi>, the nonlinear eigenvalue of a stationary state.

    Computed directly as the expectation value of the state-dependent
    Hamiltonian; the identity mu = E[phi] - (U/2) sum_j n_j^2 holds to
    rounding for any normalized state.
    """
    v = state.amplitudes if isinstance(state, LatticeState) else np.asarray(state)
    hv = apply_hamiltonian(params, v)
    return float(np.real(np.vdot(v, hv)))


def density_fourier_coefficients(state, beta=BETA_GOLDEN, max_harmonic=2):
    """Cosine-projection coefficients of the density at harmonics of beta.

    Returns an array [c_0, c_1, ..., c_max] with the convention
        c_0 = (1/L) sum_j n_j          (the mean density),
        c_m = (2/L) sum_j n_j cos(2 pi beta m j)   for m >= 1.
    The 2/L normalization makes c_m the amplitude of a pure
    n_j = c_m cos(2 pi beta m j) modulation up to finite-size leakage.
    """
    if max_harmonic < 1:
        raise ValueError("max_harmonic must be >= 1")
    n = state.density if isinstance(state, LatticeState) else np.abs(np.asarray(state)) ** 2
    L = n.size
    j = np.arange(L)
    coeffs = [n.sum() / L]
    for m in range(1, max_harmonic + 1):
        coeffs.append(2.0 / L * np.sum(n * np.cos(2.0 * np.pi * beta * m * j)))
    return np.array(coeffs)


# -------------------------
# Physical-unit conversion
# -------------------------

@dataclass(frozen=True)
class UnitSystem:
    """Internal-unit bookkeeping with an optional SI anchor.

    Internally hbar = 1, energies are in units of J and time in hbar/J.
    When `j_rate_hz` is set (the hopping rate nu with J/hbar = 2 pi nu),
    the conversion maps are bijections used only at I/O boundaries.
    """
    hbar: float = 1.0
    energy_unit: float = 1.0
    j_rate_hz: float | None = None

    @property
    def time_unit(self) -> float:
        return self.hbar / self.energy_unit

    def time_si_to_internal(self, t_seconds: float) -> float:
        """t_internal = t * J/hbar = 2 pi nu t."""
        self._need_anchor()
        return 2.0 * np.pi * self.j_rate_hz * t_seconds

    def time_internal_to_si(self, t_internal: float) -> float:
        self._need_anchor()
        return t_internal / (2.0 * np.pi * self.j_rate_hz)

    def energy_si_to_internal(self, e_joule: float) -> float:
        """Energy in units of J, where J = hbar * 2 pi nu."""
        self._need_anchor()
        return e_joule / (HBAR_SI * 2.0 * np.pi * self.j_rate_hz)

    def energy_internal_to_si(self, e_internal: float) -> float:
        self._need_anchor()
        return e_internal * HBAR_SI * 2.0 * np.pi * self.j_rate_hz

    def _need_anchor(self):
        if self.j_rate_hz is None:
            raise ValueError("no SI anchor: construct UnitSystem with j_rate_hz")


@dataclass(frozen=True)
class InteractionConversion:
    """Mean-field interaction energy from scattering parameters.

    U = 4 pi hbar^2 a rho / m with a the s-wave scattering length, rho the
    mean density and m the atomic mass; sign(U) = sign(a).
    """
    scattering_length_a0: float          # in Bohr radii
    mass_kg: float = CS_MASS_SI
    density_per_cm3: float = 2.0e13

    def __post_init__(self):
        if self.mass_kg <= 0:
            raise ValueError("mass must be positive")
        if self.density_per_cm3 <= 0:
            raise ValueError("density must be positive")

    @property
    def scattering_length_m(self) -> float:
        return self.scattering_length_a0 * BOHR_RADIUS_SI


def scattering_length_to_U(conv: InteractionConversion) -> float:
    """U in Joules from U = 4 pi hbar^2 a rho / m."""
    rho_si = conv.density_per_cm3 * 1e6   # cm^-3 -> m^-3
    return 4.0 * np.pi * HBAR_SI ** 2 * conv.scattering_length_m * rho_si / conv.mass_kg


# -------------------------
# Bragg-lattice design helper
# -------------------------

@dataclass(frozen=True)
class BraggSchedule:
    """Two-photon detunings and phases realizing the model on a momentum ladder.

    detunings[i] is the angular frequency for the bond between paper-style
    sites j and j+1 with j = i - 10 (the 21-site convention j = -10..9);
    phases are 0 for J > 0 and pi to realize a negative hopping.
    """
    detunings: np.ndarray      # rad/s, length L-1
    phases: np.ndarray         # radians, length L-1
    recoil: float              # E_R in Joules
    wavenumber: float          # k in 1/m (from E_R = hbar^2 k^2 / 2m)
    site_offset: int = -10     # paper-style index of internal site 0


def bragg_detunings(params: ModelParams, recoil_joule: float,
                    j_energy_joule: float = 0.0, mass_kg: float = CS_MASS_SI) -> BraggSchedule:
    """Design detunings hbar*dw_j = 4(2j+1) E_R - (eps_{j+1} - eps_j).

    The j in the design formula is the centered site label j = -10..9, so a
    21-site chain yields 20 detunings. eps is the on-site potential in SI,
    obtained by scaling the internal eps with `j_energy_joule` (the SI value
    of the energy unit J); with Delta = 0 the schedule is interaction-free
    and j_energy_joule is irrelevant.
    """
    if params.L != 21:
        raise ValueError(f"the 21-site schedule convention requires L=21, got L={params.L}")
    if recoil_joule <= 0:
        raise ValueError("recoil energy must be positive")
    eps_int = quasiperiodic_potential(params)
    eps_si = eps_int * j_energy_joule
    offset = -10
    jj = np.arange(params.L - 1) + offset      # centered bond labels -10..9
    hbar_domega = 4.0 * (2 * jj + 1) * recoil_joule - np.diff(eps_si)
    detunings = hbar_domega / HBAR_SI
    phase = 0.0 if params.J >= 0 else np.pi
    phases = np.full(params.L - 1, phase)
    k = np.sqrt(2.0 * mass_kg * recoil_joule) / HBAR_SI
    return BraggSchedule(detunings=detunings, phases=phases,
                         recoil=recoil_joule, wavenumber=k, site_offset=offset)
