"""
Simultaneous autoregressive fields, common-driver triples and planted hotspots.

Gaussian innovations come from numpy's Generator(PCG64) via
`standard_normal` (ziggurat), seeded with SeedSequence([seed, stream]).
"""
import time
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
import structlog

from lattice_assoc.config import settings
from lattice_assoc.errors import InvalidSpec, LengthMismatch, SingularSystem
from lattice_assoc.lattice.models import Lattice
from lattice_assoc.observability import record
from lattice_assoc.synthetic.models import CommonDriverSpec, SarSpec
from lattice_assoc.weights.models import Standardization, WeightMatrix

logger = structlog.get_logger()

# innovation streams
DRIVER_STREAM = 0
NOISE_I_STREAM = 1
NOISE_J_STREAM = 2


def spectral_radius(w: WeightMatrix) -> float:
    """Largest absolute eigenvalue of W."""
    if w.nnz == 0:
        return 0.0
    if w.n <= settings.dense_solver_max_n:
        return float(np.max(np.abs(scipy.linalg.eigvals(w.dense()))))
    values = spla.eigs(w.sparse, k=1, which='LM', return_eigenvectors=False)
    return float(np.abs(values[0]))


def check_rho(w: WeightMatrix, rho: float) -> float:
    """
    Raise unless |rho| < 1 / spectral radius of W.

    Returns:
        The spectral radius
    """
    radius = spectral_radius(w)
    if radius > 0 and not abs(rho) * radius < 1.0:
        raise InvalidSpec(
            f"|rho| = {abs(rho)} must be below 1/{radius:.6g}",
            {'rho': rho, 'spectral_radius': radius}
        )
    return radius


def _check_inputs(lattice: Lattice, w: WeightMatrix):
    if lattice.n != w.n:
        raise LengthMismatch(
            f"Lattice has {lattice.n} sites, weight matrix {w.n}",
            {'lattice': lattice.n, 'weights': w.n}
        )
    if w.standardization != Standardization.ROW:
        raise InvalidSpec("SAR simulation expects a row-standardized weight matrix")


def innovations(seed: int, stream: int, n: int, sd: float) -> np.ndarray:
    rng = np.random.default_rng([seed, stream])
    return sd * rng.standard_normal(n)


def sar_solve(w: WeightMatrix, rho: float, eps: np.ndarray) -> np.ndarray:
    """
    Solve (I - rho W) x = eps.

    Dense LU up to settings.dense_solver_max_n sites, GMRES above.

    Raises:
        SingularSystem: factorization failed or the residual check does not hold
    """
    if rho == 0.0:
        return eps.copy()

    n = w.n
    system = (sp.identity(n, format='csr') - rho * w.sparse).tocsr()
    started = time.perf_counter()
    if n <= settings.dense_solver_max_n:
        solver = 'dense'
        try:
            x = scipy.linalg.solve(system.toarray(), eps)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
            raise SingularSystem(f"I - rho W is singular: {e}", {'rho': rho, 'n': n}) from None
    else:
        solver = 'gmres'
        x, info = spla.gmres(system, eps, rtol=settings.solver_tolerance, atol=0.0)
        if info != 0:
            raise SingularSystem("GMRES did not converge", {'rho': rho, 'n': n, 'info': int(info)})
    elapsed = time.perf_counter() - started

    residual = np.linalg.norm(system @ x - eps)
    if not residual <= 1e-8 * max(np.linalg.norm(eps), np.finfo(float).tiny):
        raise SingularSystem(
            "SAR solve residual check failed",
            {'rho': rho, 'n': n, 'residual': float(residual)}
        )
    record(lambda m: m.sar_solve_duration.labels(solver=solver).observe(elapsed))
    logger.debug("SAR solve", solver=solver, n=n, rho=rho, seconds=round(elapsed, 4))
    return x


def simulate_sar(lattice: Lattice, w: WeightMatrix, spec: SarSpec, stream: int = DRIVER_STREAM) -> np.ndarray:
    """Draw x = (I - rho W)^-1 eps; identical output for identical (spec, stream)."""
    _check_inputs(lattice, w)
    check_rho(w, spec.rho)
    eps = innovations(spec.seed, stream, w.n, spec.noise_sd)
    return sar_solve(w, spec.rho, eps)


def plant_hotspot(x, sites: Sequence[int], shift: float) -> np.ndarray:
    """Copy of x with `shift` added at the given site indices."""
    out = np.array(x, dtype=float, copy=True)
    sites = np.asarray(sites, dtype=np.intp)
    if sites.size and (sites.min() < 0 or sites.max() >= out.shape[0]):
        raise LengthMismatch("Hotspot site index out of range", {'n': int(out.shape[0])})
    out[sites] += shift
    return out


def simulate_common_driver(
    lattice: Lattice,
    w: WeightMatrix,
    spec: CommonDriverSpec,
    hotspot: Optional[Sequence[int]] = None,
    hotspot_shift: float = 0.0,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Triple (xi, xj, z) where xi and xj share only the driver z.

    An optional hotspot is planted in z before mixing, so both xi and xj are
    elevated there through the driver alone.
    """
    _check_inputs(lattice, w)
    check_rho(w, spec.rho)
    n = w.n
    z = sar_solve(w, spec.rho, innovations(spec.seed, DRIVER_STREAM, n, spec.driver_sd))
    if hotspot is not None:
        z = plant_hotspot(z, hotspot, hotspot_shift)
    xi = spec.a * z + innovations(spec.seed, NOISE_I_STREAM, n, spec.noise_sd)
    xj = spec.b * z + innovations(spec.seed, NOISE_J_STREAM, n, spec.noise_sd)
    logger.debug("Common-driver triple simulated", n=n, rho=spec.rho, a=spec.a, b=spec.b)
    return xi, xj, z
