"""Cat-state fidelity scans over array size and missing-atom fraction.

The defect scan is deterministic for a given master seed regardless of the
number of worker threads: realizations are computed in fixed-size batches,
each with a seed derived from (master seed, fraction index, realization
index), and the stopping rule is applied sequentially afterwards.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
import json
import logging
import math
import os

import numpy as np
from threadpoolctl import threadpool_limits

from . import coupled_dipole as cd
from .errors import ConvergenceFailure, InvalidArgument, QmsError
from .geometry import apply_defects, build_square_lattice, defect_count
from .green import COUPLING, green_matrix
from .io import config_digest, write_csv
from .photonic import (TwoModeCoherent, cat_fidelity_from_response, conditional_scatter,
                       state_overlap)

log = logging.getLogger(__name__)

BATCH = 8


@dataclass(frozen=True)
class ScanResult:
    abscissa: list
    fidelity_mean: list
    fidelity_stderr: list
    realizations_used: list
    config_digest: str
    config: dict = field(default_factory=dict)
    details: list = field(default_factory=list)

    def __post_init__(self):
        n = len(self.abscissa)
        if not all(len(x) == n for x in (self.fidelity_mean, self.fidelity_stderr,
                                          self.realizations_used)):
            raise InvalidArgument("ScanResult lists must have equal length")
        if any(s < 0 for s in self.fidelity_stderr):
            raise InvalidArgument("stderr must be non-negative")

    def rows(self):
        return list(zip(self.abscissa, self.fidelity_mean, self.fidelity_stderr,
                        self.realizations_used))

    def to_csv(self, path, abscissa_unit="lambda"):
        return write_csv(path, ["abscissa", "mean", "stderr", "n"], self.rows(),
                         units={"abscissa": abscissa_unit, "fidelity": "1"})

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=_jsonable)


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(type(x))


def _gaussian_drive(waist, detuning=0.0):
    return cd.DriveField(kind="gaussian", waist=waist, detuning=detuning)


def _projector(geom, drive, method):
    if method == "kspace":
        return cd.kspace_projector(geom, drive)
    if method == "plane-sampling":
        return cd.plane_sampling_projector(geom, drive)
    raise InvalidArgument(f"unknown projector method {method!r}")


def fidelity_vs_size(sizes, spacing=0.2, waist=1.56, alpha=3.0, projector="kspace",
                     odd=False):
    """Cat fidelity of the uniform array at its own resonance, per array size.

    The abscissa is the array side nx·a in λ; the stderr column carries the
    relative non-Gaussian power in the reflected field as a quality proxy.
    """
    sizes = [(int(s), int(s)) if np.ndim(s) == 0 else tuple(int(v) for v in s) for s in sizes]
    if not sizes:
        raise InvalidArgument("sizes must be non-empty")
    config = {"scan": "size", "sizes": sizes, "spacing": spacing, "waist": waist,
              "alpha": complex(alpha), "projector": projector, "odd": odd}
    abscissa, means, errs, counts, details = [], [], [], [], []
    with threadpool_limits(limits=1):
        for nx, ny in sizes:
            try:
                geom = build_square_lattice(nx, ny, spacing)
                drive = _gaussian_drive(waist)
                proj = _projector(geom, drive, projector)
                G = green_matrix(geom).entries
                d0 = cd.locate_resonance(geom, drive, green=G, projector=proj)
                dr = drive.with_detuning(d0)
                P = cd.solve_polarizability(geom, cd.single_atom_polarizability(d0), dr, green=G)
                resp = cd.response_from_dipoles(P, proj, mask=geom.active, detuning=d0)
                resid = cd._reflected_residual(geom, P, dr)
            except QmsError as exc:
                raise type(exc)(f"size {nx}x{ny}: {exc}") from exc
            rep = cat_fidelity_from_response(resp.r, resp.t, alpha, odd=odd)
            abscissa.append(nx * spacing)
            means.append(rep.fidelity)
            errs.append(resid)
            counts.append(1)
            details.append({"nx": nx, "ny": ny, "detuning": d0, "r": resp.r, "t": resp.t,
                            "scattered_weight": resp.scattered_weight})
    return ScanResult(abscissa, means, errs, counts, config_digest(config), config, details)


def realization_seed(master_seed, fraction_index, k):
    """Counter-based seed for realization ``k`` of fraction ``fraction_index``."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(fraction_index), int(k)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class _DefectModel:
    """Full-lattice quantities shared by all realizations of a scan."""

    def __init__(self, nx, ny, spacing, waist, projector):
        self.geom = build_square_lattice(nx, ny, spacing)
        drive = _gaussian_drive(waist)
        self.proj = _projector(self.geom, drive, projector)
        self.G = green_matrix(self.geom).entries
        self.detuning = cd.locate_resonance(self.geom, drive, green=self.G, projector=self.proj)
        self.drive = drive.with_detuning(self.detuning)
        self.alpha = cd.single_atom_polarizability(self.detuning)
        self.E0 = cd.incident_field(self.drive, self.geom.positions)

    def response(self, active):
        idx = np.flatnonzero(active)
        G = self.G[np.ix_(idx, idx)]
        M = np.eye(len(idx), dtype=complex) - COUPLING * self.alpha * G
        p, cond = cd._solve(M, self.alpha * self.E0[idx])
        P = cd.PolarizationVector(p=p, drive=self.drive, condition=cond)
        return cd.response_from_dipoles(P, self.proj, mask=active, detuning=self.detuning)


def _stderr(values):
    n = len(values)
    if n < 2:
        return 0.0
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return math.sqrt(var / n)


def _resolve_threads(threads):
    if threads is None:
        threads = int(os.environ.get("QMS_THREADS", "1"))
    if threads < 1:
        raise InvalidArgument("threads must be >= 1")
    return threads


def fidelity_vs_defects(nx=23, ny=23, spacing=0.2, waist=1.56, alpha=3.0,
                        fractions=(0.0, 0.02, 0.05, 0.1), seed=0, stderr_tol=0.002,
                        min_real=50, max_real=10000, threads=None, projector="kspace",
                        odd=False, reference="defect-free"):
    """Mean light-state fidelity over random missing-atom patterns.

    ``reference="defect-free"`` scores each realization by its overlap with
    the state produced by the complete array; ``reference="ideal"`` scores
    it against the ideal cat. The drive detuning is fixed at the defect-free
    resonance. For each fraction, realizations accumulate until count ≥
    ``min_real`` and the standard error drops below ``stderr_tol``.
    """
    fractions = [float(f) for f in fractions]
    if not fractions or any(not 0.0 <= f <= 1.0 for f in fractions):
        raise InvalidArgument("fractions must lie in [0, 1]")
    if min_real < 2:
        raise InvalidArgument("min_real must be >= 2")
    if max_real < min_real:
        raise InvalidArgument("max_real must be >= min_real")
    if not stderr_tol > 0:
        raise InvalidArgument("stderr_tol must be positive")
    if reference not in ("defect-free", "ideal"):
        raise InvalidArgument(f"unknown reference {reference!r}")
    threads = _resolve_threads(threads)
    config = {"reference": reference, "scan": "defects", "nx": nx, "ny": ny, "spacing": spacing, "waist": waist,
              "alpha": complex(alpha), "fractions": fractions, "seed": int(seed),
              "stderr_tol": stderr_tol, "min_real": min_real, "max_real": max_real,
              "projector": projector, "odd": odd}

    with threadpool_limits(limits=1):
        model = _DefectModel(nx, ny, spacing, waist, projector)
        resp0 = model.response(model.geom.active)
        cond0 = _light_state(resp0, alpha)

        def score(resp):
            if reference == "ideal":
                return cat_fidelity_from_response(resp.r, resp.t, alpha, odd=odd).fidelity
            return state_overlap(cond0, _light_state(resp, alpha), alpha)

        def one(fi, frac, k):
            s = realization_seed(seed, fi, k)
            with threadpool_limits(limits=1):
                g = apply_defects(model.geom, frac, s)
                return score(model.response(g.active))

        means, errs, counts, details = [], [], [], []
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for fi, frac in enumerate(fractions):
                if defect_count(model.geom.n_sites, frac) == 0:
                    means.append(score(resp0))
                    errs.append(0.0)
                    counts.append(1)
                    details.append({"fraction": frac, "detuning": model.detuning})
                    continue
                vals, used = [], None
                while used is None and len(vals) < max_real:
                    start = len(vals)
                    stop = min(start + BATCH, max_real)
                    vals.extend(pool.map(lambda k: one(fi, frac, k), range(start, stop)))
                    for n in range(max(start + 1, min_real), len(vals) + 1):
                        if _stderr(vals[:n]) < stderr_tol:
                            used = n
                            break
                if used is None:
                    partial = ScanResult(fractions[:fi + 1], means + [math.fsum(vals) / len(vals)],
                                         errs + [_stderr(vals)], counts + [len(vals)],
                                         config_digest(config), config, details)
                    raise ConvergenceFailure(
                        f"fraction {frac}: stderr {_stderr(vals):.4g} above {stderr_tol} "
                        f"after {len(vals)} realizations",
                        estimate=_stderr(vals), partial=partial)
                vals = vals[:used]
                means.append(math.fsum(vals) / used)
                errs.append(_stderr(vals))
                counts.append(used)
                details.append({"fraction": frac, "detuning": model.detuning})
                log.info("fraction %.3f: F=%.5f +- %.5f (n=%d)", frac, means[-1], errs[-1], used)
    return ScanResult(fractions, means, errs, counts, config_digest(config), config, details)


def _light_state(resp, alpha):
    return conditional_scatter(0.0, 1.0, resp.r, resp.t, TwoModeCoherent(alpha, 0.0))


def depolarization_fidelity(epsilon, n_atoms, light_fid):
    """Light fidelity degraded by independent per-atom depolarization: (1−ε)^N·F."""
    if not 0.0 <= epsilon <= 1.0:
        raise InvalidArgument("epsilon must lie in [0, 1]")
    if n_atoms < 0 or int(n_atoms) != n_atoms:
        raise InvalidArgument("n_atoms must be a non-negative integer")
    if not 0.0 <= light_fid <= 1.0:
        raise InvalidArgument("light_fid must lie in [0, 1]")
    return (1.0 - epsilon) ** int(n_atoms) * light_fid
