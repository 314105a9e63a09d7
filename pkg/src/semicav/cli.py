"""Scenario runner: configures models, drives the solvers, writes CSV/JSON.

One JSON config document describes a scenario; presets are expanded to
explicit matrices before validation so that every emitted report contains
the matrices actually used. Verbs:

* ``rabi``        side-by-side oracle / SWE run with a time-series CSV
* ``phasespace``  evolve to a time and dump one field on the grid
* ``sample``      draw classical field values at a fixed time
* ``verify``      run the identity suite at config scale, exit 0 iff clean
"""

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from semicav import fockspace, phasespace, swe, unitary

_DEFAULT_CONFIG = {
    "model": {"preset": "two-level", "g": 1.0, "detuning": 0.0, "omega": 1.0},
    "fock": {"n_max": 8},
    "grid": {"L": 5.0, "M": 128},
    "time": {"t_end": 2 * np.pi, "dt": 1e-3, "sample_stride": 785},
    "swe_backend": "bargmann",
    "sampling": {"count": 100000, "seed": 20210527},
    "output_dir": "semicav_out",
}


def _format_float(x: float) -> str:
    return format(float(x), ".17g")


def dumps_17g(obj, indent: int = 0) -> str:
    """JSON with floats rendered at 17 significant digits (bit-stable output)."""
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{pad}  {json.dumps(str(k))}: {dumps_17g(v, indent + 2)}' for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + ", ".join(dumps_17g(v, indent) for v in obj) + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(obj)
    if obj is None:
        return "null"
    return json.dumps(obj)


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, complex)]


def _matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


@dataclass
class ScenarioConfig:
    """Validated scenario description; the model is always explicit matrices."""

    model: unitary.AtomFieldModel
    n_max: int
    L: float
    M: int
    t_end: float
    dt: float
    sample_stride: int
    swe_backend: str = "bargmann"
    sample_count: int | None = None
    sample_seed: int | None = None
    output_dir: str = "semicav_out"

    def __post_init__(self):
        if self.swe_backend not in ("bargmann", "grid"):
            raise ValueError(f"unknown backend {self.swe_backend!r}")
        for name in ("t_end", "dt", "L"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        model_doc = dict(doc["model"])
        if model_doc.get("preset") == "two-level":
            model = unitary.two_level_model(
                g=float(model_doc["g"]),
                detuning=float(model_doc.get("detuning", 0.0)),
                omega=float(model_doc.get("omega", 1.0)),
            )
        else:
            model = unitary.AtomFieldModel(
                atom_dim=int(model_doc["atom_dim"]),
                h_ato=_matrix_from_json(model_doc["h_ato"]),
                j=_matrix_from_json(model_doc["j"]),
                omega=float(model_doc["omega"]),
            )
        sampling = doc.get("sampling") or {}
        return cls(
            model=model,
            n_max=int(doc["fock"]["n_max"]),
            L=float(doc["grid"]["L"]),
            M=int(doc["grid"]["M"]),
            t_end=float(doc["time"]["t_end"]),
            dt=float(doc["time"]["dt"]),
            sample_stride=int(doc["time"].get("sample_stride", 1)),
            swe_backend=doc.get("swe_backend", "bargmann"),
            sample_count=int(sampling["count"]) if "count" in sampling else None,
            sample_seed=int(sampling["seed"]) if "seed" in sampling else None,
            output_dir=doc.get("output_dir", "semicav_out"),
        )

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        doc = {
            "model": {
                "atom_dim": self.model.atom_dim,
                "h_ato": _matrix_to_json(self.model.h_ato),
                "j": _matrix_to_json(self.model.j),
                "omega": self.model.omega,
            },
            "fock": {"n_max": self.n_max},
            "grid": {"L": self.L, "M": self.M},
            "time": {"t_end": self.t_end, "dt": self.dt, "sample_stride": self.sample_stride},
            "swe_backend": self.swe_backend,
            "output_dir": self.output_dir,
        }
        if self.sample_count is not None:
            doc["sampling"] = {"count": self.sample_count, "seed": self.sample_seed}
        return doc

    def fock_basis(self) -> fockspace.FockBasis:
        return fockspace.FockBasis(self.n_max)

    def phase_grid(self) -> phasespace.PhaseGrid:
        return phasespace.PhaseGrid(self.L, self.M)

    def composite_space(self) -> fockspace.CompositeSpace:
        return fockspace.CompositeSpace(self.model.atom_dim, self.fock_basis())

    def time_grid(self) -> unitary.TimeGrid:
        return unitary.TimeGrid(0.0, self.t_end, self.dt, self.sample_stride)

    def initial_atom(self) -> np.ndarray:
        vec = np.zeros(self.model.atom_dim, dtype=complex)
        vec[0] = 1.0
        return vec


@dataclass
class RunReport:
    """Per-sample-time records plus the expanded config that produced them."""

    config: ScenarioConfig
    rows: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        times = [row["t"] for row in self.rows]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ValueError("report times are not strictly increasing")
        return {"config": self.config.to_dict(), "rows": self.rows}


def _write_csv(path: Path, header_meta: dict, columns: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        meta = " ".join(f"{k}={v}" for k, v in header_meta.items())
        fh.write(f"# {meta}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                             for v in row])


def _initial_composite(config: ScenarioConfig) -> unitary.CompositeState:
    space = config.composite_space()
    vac = np.zeros(space.fock.dim, dtype=complex)
    vac[0] = 1.0
    return unitary.product_initial_state(config.initial_atom(), vac, space)


def _run_swe(config: ScenarioConfig, tgrid: unitary.TimeGrid) -> list[swe.SemiclassicalWave]:
    psi_ato = config.initial_atom()
    if config.swe_backend == "bargmann":
        wave0 = swe.initial_wave(psi_ato, config.fock_basis())
    else:
        wave0 = swe.initial_wave(psi_ato, config.phase_grid())
    return swe.evolve_swe(config.model, wave0, tgrid)


def cmd_rabi(config: ScenarioConfig) -> RunReport:
    """Run oracle and SWE side by side; emit rabi_timeseries.csv and report.json."""
    grid = config.phase_grid()
    tgrid = config.time_grid()
    trajectory = unitary.evolve_unitary(config.model, _initial_composite(config), tgrid)
    waves = _run_swe(config, tgrid)
    if len(waves) != len(trajectory.states):
        raise RuntimeError("oracle and SWE sampling misaligned")

    space = config.composite_space()
    number_op = space.field_operator(fockspace.number_operator(space.fock))
    abs_sq = phasespace.SemiclassicalObservable.abs_square()
    report = RunReport(config=config)
    d = config.model.atom_dim
    projectors = [
        phasespace.SemiclassicalObservable.constant(
            1.0, atom_op=np.diag((np.arange(d) == i).astype(complex)), name=f"P_{i}")
        for i in range(d)
    ]
    for t, state, wave in zip(trajectory.times, trajectory.states, waves):
        amp = state.as_matrix()
        populations = [float(np.sum(np.abs(amp[i]) ** 2)) for i in range(d)]
        n_oracle = float(np.real(state.amplitudes.conj() @ (number_op @ state.amplitudes)))
        comparison = swe.compare_to_oracle(wave, state, grid)
        gwave = swe.evaluate_on_grid(wave, grid) if wave.representation == "bargmann" else wave
        p_swe = [swe.swe_expectation(gwave, proj) for proj in projectors]
        n_swe = swe.swe_expectation(gwave, abs_sq) - 1.0
        report.rows.append({
            "t": float(t),
            "P_atomic_levels_oracle": populations,
            "P_atomic_levels_swe": p_swe,
            "n_oracle": n_oracle,
            "n_swe_via_noise_subtraction": n_swe,
            "comparison": comparison.to_json_dict(),
        })

    out = Path(config.output_dir)
    _write_csv(
        out / "rabi_timeseries.csv",
        {"scenario": "rabi", "L": config.L, "M": config.M, "n_max": config.n_max,
         "backend": config.swe_backend},
        ["t", "P_e_oracle", "P_e_swe", "n_oracle", "n_swe_via_noise_subtraction",
         "linf_husimi"],
        [(row["t"], row["P_atomic_levels_oracle"][0], row["P_atomic_levels_swe"][0],
          row["n_oracle"], row["n_swe_via_noise_subtraction"],
          row["comparison"]["linf"]) for row in report.rows],
    )
    with open(out / "report.json", "w") as fh:
        fh.write(dumps_17g(report.to_dict()) + "\n")
    return report


def _field_csv_rows(grid: phasespace.PhaseGrid, arrays: dict[str, np.ndarray]):
    x = grid.axis()
    for ix in range(grid.M):
        for iy in range(grid.M):
            row = [repr(float(x[ix])), repr(float(x[iy]))]
            for arr in arrays.values():
                row.append(repr(float(np.real(arr[ix, iy]))))
            yield row


def write_field_csv(field, path) -> Path:
    """Serialize a scalar or operator phase-space field, row-major over the grid.

    Scalar fields emit one ``value`` column; operator fields emit Re/Im
    columns for every matrix entry.
    """
    path = Path(path)
    grid = field.grid
    x = grid.axis()
    if isinstance(field, phasespace.PhaseFunction):
        meta = {"kind": field.kind, "L": grid.L, "M": grid.M}
        columns = ["x", "y", "value"]

        def rows():
            for ix in range(grid.M):
                for iy in range(grid.M):
                    yield [repr(float(x[ix])), repr(float(x[iy])),
                           repr(float(np.real(field.values[ix, iy])))]
    elif isinstance(field, phasespace.OperatorPhaseField):
        d = field.atom_dim
        meta = {"kind": field.kind, "L": grid.L, "M": grid.M, "atom_dim": d}
        columns = ["x", "y"] + [f"{part}_m{i}{j}" for i in range(d) for j in range(d)
                                for part in ("re", "im")]

        def rows():
            for ix in range(grid.M):
                for iy in range(grid.M):
                    row = [repr(float(x[ix])), repr(float(x[iy]))]
                    for i in range(d):
                        for j in range(d):
                            z = field.values[ix, iy, i, j]
                            row.extend((repr(float(z.real)), repr(float(z.imag))))
                    yield row
    else:
        raise TypeError(f"cannot serialize {type(field).__name__}")
    _write_csv(path, meta, columns, rows())
    return path


def read_field_csv(path) -> tuple[dict, np.ndarray]:
    """Re-load a field CSV from its header metadata alone.

    Returns the metadata dict and the value array: (M, M) for scalar
    fields, (M, M, d, d) complex for operator fields.
    """
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("# "):
            raise ValueError("missing metadata header")
        meta = {}
        for token in header[2:].split():
            key, raw = token.split("=", 1)
            try:
                meta[key] = int(raw) if raw.lstrip("-").isdigit() else float(raw)
            except ValueError:
                meta[key] = raw
        reader = csv.reader(fh)
        columns = next(reader)
        data = np.array([[float(v) for v in row[2:]] for row in reader])
    M = int(meta["M"])
    if "atom_dim" in meta:
        d = int(meta["atom_dim"])
        values = (data[:, 0::2] + 1j * data[:, 1::2]).reshape(M, M, d, d)
    else:
        if len(columns) != 3:
            raise ValueError("unexpected column layout for a scalar field")
        values = data[:, 0].reshape(M, M)
    return meta, values


def write_wave_csv(wave, path) -> Path:
    """Serialize a grid-representation wave: x, y, Re/Im of each component."""
    path = Path(path)
    if wave.representation != "grid":
        raise ValueError("wave snapshots require the grid representation")
    grid = wave.grid
    d = wave.atom_dim
    x = grid.axis()
    columns = ["x", "y"] + [f"{part}_psi{i}" for i in range(d) for part in ("re", "im")]

    def rows():
        for ix in range(grid.M):
            for iy in range(grid.M):
                row = [repr(float(x[ix])), repr(float(x[iy]))]
                for i in range(d):
                    z = wave.values[ix, iy, i]
                    row.extend((repr(float(z.real)), repr(float(z.imag))))
                yield row

    _write_csv(path, {"kind": "wave", "L": grid.L, "M": grid.M, "atom_dim": d,
                      "time": wave.time}, columns, rows())
    return path


def _steps_for(config: ScenarioConfig, t: float) -> int:
    steps = t / config.dt
    if abs(steps - round(steps)) > 1e-9 * max(1.0, abs(steps)):
        raise ValueError("t must be a multiple of dt")
    return int(round(steps))


def cmd_phasespace(config: ScenarioConfig, t: float, kind: str) -> Path:
    """Evolve to time ``t`` and dump the requested field as CSV."""
    if kind not in ("wigner", "husimi", "swe-density"):
        raise ValueError(f"unknown field kind {kind!r}")
    grid = config.phase_grid()
    space = config.composite_space()
    n_steps = _steps_for(config, t)
    columns: dict[str, np.ndarray] = {}
    meta = {"kind": kind, "L": config.L, "M": config.M, "time": t, "n_max": config.n_max}
    if kind == "swe-density":
        if n_steps == 0:
            rep = config.fock_basis() if config.swe_backend == "bargmann" else grid
            wave = swe.initial_wave(config.initial_atom(), rep)
        else:
            tgrid = unitary.TimeGrid(0.0, t, config.dt, n_steps)
            wave = _run_swe(config, tgrid)[-1]
        columns["density"] = swe.field_density(wave, grid).values
    else:
        psi0 = _initial_composite(config)
        if n_steps == 0:
            state = psi0
        else:
            tgrid = unitary.TimeGrid(0.0, t, config.dt, n_steps)
            state = unitary.evolve_unitary(config.model, psi0, tgrid).states[-1]
        rho_field = fockspace.partial_trace_atom(unitary.density_operator(state), space)
        if kind == "wigner":
            columns["value"] = phasespace.wigner(rho_field, grid).values
        else:
            columns["value"] = phasespace.husimi_function(rho_field, grid).values
    path = Path(config.output_dir) / f"field_{kind}_t{t:g}.csv"
    _write_csv(path, meta, ["x", "y", *columns.keys()], _field_csv_rows(grid, columns))
    return path


def cmd_sample(config: ScenarioConfig, t: float, count: int | None = None,
               seed: int | None = None) -> Path:
    """Draw classical field samples at time ``t`` and write them as CSV."""
    count = count if count is not None else (config.sample_count or 10000)
    seed = seed if seed is not None else (config.sample_seed or 0)
    grid = config.phase_grid()
    n_steps = _steps_for(config, t)
    if n_steps == 0:
        wave = swe.initial_wave(config.initial_atom(), grid)
    else:
        tgrid = unitary.TimeGrid(0.0, t, config.dt, n_steps)
        wave = _run_swe(config, tgrid)[-1]
        if wave.representation == "bargmann":
            wave = swe.evaluate_on_grid(wave, grid)
    samples = swe.sample_field(wave, count, seed)
    d = wave.atom_dim
    path = Path(config.output_dir) / f"samples_t{t:g}.csv"
    state_cols = [f"{part}_psi{i}" for i in range(d) for part in ("re", "im")]
    rows = (
        [repr(s.a.real), repr(s.a.imag)]
        + [repr(float(part(s.conditional_state[i])))
           for i in range(d) for part in (np.real, np.imag)]
        for s in samples
    )
    _write_csv(path, {"kind": "samples", "time": t, "count": count, "seed": seed,
                      "L": config.L, "M": config.M},
               ["a_re", "a_im", *state_cols], rows)
    return path


def _verify_identities(config: ScenarioConfig, kernel_width_scale: float = 1.0) -> list[dict]:
    """Measured error and threshold for each cross-picture identity."""
    rng = np.random.default_rng(11)
    space = config.composite_space()
    grid = config.phase_grid()
    checks: list[dict] = []

    def record(name: str, error: float, threshold: float) -> None:
        checks.append({"name": name, "error": float(error), "threshold": float(threshold),
                       "pass": bool(error <= threshold)})

    # ladder superoperators commute on operators supported below the edge
    basis = config.fock_basis()
    a = fockspace.annihilation(basis)
    ad = a.conj().T
    worst = 0.0
    keep = basis.dim - 2
    for _ in range(20):
        op = np.zeros((basis.dim, basis.dim), complex)
        op[:keep, :keep] = rng.normal(size=(keep, keep)) + 1j * rng.normal(size=(keep, keep))
        comm = (fockspace.symmetric_product(a, fockspace.symmetric_product(ad, op))
                - fockspace.symmetric_product(ad, fockspace.symmetric_product(a, op)))
        worst = max(worst, float(np.max(np.abs(comm))))
    record("superop_commutativity", worst, 1e-10)

    # characteristic function: product-form route equals direct displacement.
    # The identity needs headroom between state support and truncation edge,
    # so this check floors the mode dimension independently of the config.
    chi_basis = fockspace.FockBasis(max(24, basis.n_max))
    worst = 0.0
    supp = chi_basis.dim // 2 - 2
    for _ in range(10):
        v = np.zeros(chi_basis.dim, complex)
        v[:supp] = rng.normal(size=supp) + 1j * rng.normal(size=supp)
        v /= np.linalg.norm(v)
        rho = np.outer(v, v.conj())
        lam = rng.uniform(0.1, 1.0) * np.exp(2j * np.pi * rng.random())
        two = phasespace.superop_characteristic_function(rho, lam, chi_basis).value
        one = phasespace.characteristic_function(rho, lam).value
        worst = max(worst, abs(two - one))
    record("characteristic_two_routes", worst, 1e-8)

    # shared random composite state, supported below the truncation edge
    d, nf = space.atom_dim, space.fock.dim
    v = np.zeros(space.total_dim, complex)
    low = (rng.normal(size=(d, nf - 2)) + 1j * rng.normal(size=(d, nf - 2)))
    v = np.concatenate([np.pad(low[i], (0, 2)) for i in range(d)])
    v /= np.linalg.norm(v)
    rho = np.outer(v, v.conj())

    # smoothing a sharp density must reproduce the coherent-state diagonal
    kernel = phasespace.GaussianKernel.vacuum(grid, width_scale=kernel_width_scale,
                                              validate=kernel_width_scale == 1.0)
    direct = phasespace.husimi_density(rho, space, grid)
    sharp = phasespace.sharp_density(rho, space, grid)
    smoothed = phasespace._convolve_with_kernel(sharp.values, grid, kernel)
    record("husimi_two_routes", float(np.max(np.abs(smoothed - direct.values))),
           5.0 * grid.tol)

    # sharp and coarse moment identities, monomials up to degree 2
    worst_sharp = 0.0
    worst_coarse = 0.0
    monomials = [{(0, 0): 1.0}, {(1, 0): 1.0}, {(0, 1): 1.0},
                 {(1, 1): 1.0}, {(2, 0): 1.0}, {(0, 2): 1.0}]
    for poly in monomials:
        obs = phasespace.SemiclassicalObservable.from_poly(poly)
        op_side = phasespace.symmetric_moment_oracle(obs, rho, basis)
        (j, k), = poly.keys()
        ps_side = phasespace.phase_space_moment(sharp, j, k)
        worst_sharp = max(worst_sharp, abs(op_side - ps_side))
        coarse_obs = obs.coarse_grained()
        op_coarse = phasespace.symmetric_moment_oracle(coarse_obs, rho, basis)
        ps_coarse = phasespace.phase_space_moment(direct, j, k)
        worst_coarse = max(worst_coarse, abs(op_coarse - ps_coarse))
    record("sharp_moment_identity", worst_sharp, 1e-5)
    record("coarse_moment_identity", worst_coarse, 1e-5)

    # shifted number operator against the second moment of the Q-function
    shifted = phasespace.symmetric_moment_oracle(
        phasespace.SemiclassicalObservable.from_poly({(1, 1): 1.0, (0, 0): 0.5}), rho, basis)
    q_moment = phasespace.phase_space_moment(direct, 1, 1)
    record("number_shift_identity", abs(shifted - q_moment), 1e-5)

    # photon number by noise subtraction
    number_op = space.field_operator(fockspace.number_operator(basis))
    exact_n = float(np.real(np.trace(number_op @ rho)))
    q_fn = direct.atomic_trace()
    record("photon_number_identity",
           abs(phasespace.photon_number_from_husimi(q_fn) - exact_n), 1e-4)

    # swe against the oracle on a quarter Rabi period
    quarter = np.pi / 4.0
    n_steps = max(1, int(round(quarter / config.dt)))
    tgrid = unitary.TimeGrid(0.0, n_steps * config.dt, config.dt, n_steps)
    state = unitary.evolve_unitary(config.model, _initial_composite(config), tgrid).states[-1]
    wave = _run_swe(config, tgrid)[-1]
    comparison = swe.compare_to_oracle(wave, state, grid)
    if config.swe_backend == "bargmann":
        swe_threshold = 1e-7
    else:
        oracle_max = float(np.max(np.abs(
            phasespace.husimi_density(unitary.density_operator(state), space, grid).values)))
        swe_threshold = 1e-3 * oracle_max
    record("swe_density_equivalence", comparison.linf, swe_threshold)

    gwave = swe.evaluate_on_grid(wave, grid) if wave.representation == "bargmann" else wave
    record("total_probability", abs(gwave.total_probability() - 1.0),
           max(1e-9, grid.tol) if config.swe_backend == "grid" else grid.tol)

    # quadrature expectation against the coarse-grained operator route
    abs_sq = phasespace.SemiclassicalObservable.abs_square()
    op_value = phasespace.symmetric_moment_oracle(
        abs_sq.coarse_grained(), unitary.density_operator(state), basis)
    record("swe_expectation_match",
           abs(swe.swe_expectation(gwave, abs_sq) - float(np.real(op_value))), 1e-5)

    return checks


def cmd_verify(config: ScenarioConfig, kernel_width_scale: float = 1.0) -> tuple[int, dict]:
    """Run the identity suite; exit status 0 iff every check passes."""
    checks = _verify_identities(config, kernel_width_scale=kernel_width_scale)
    report = {"all_pass": all(c["pass"] for c in checks), "checks": checks}
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "verify.json", "w") as fh:
        fh.write(dumps_17g(report) + "\n")
    return (0 if report["all_pass"] else 1), report


def _load_config(args) -> ScenarioConfig:
    if args.config:
        config = ScenarioConfig.from_file(args.config)
    else:
        config = ScenarioConfig.from_dict(_DEFAULT_CONFIG)
    if args.backend:
        config.swe_backend = args.backend
    if args.out:
        config.output_dir = args.out
    if args.seed is not None:
        config.sample_seed = args.seed
    return config


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="semicav",
                                     description="cavity-QED semiclassical simulator")
    parser.add_argument("--config", help="path to a scenario JSON document")
    parser.add_argument("--backend", choices=["bargmann", "grid"],
                        help="override the SWE backend")
    parser.add_argument("--out", help="override the output directory")
    parser.add_argument("--seed", type=int, help="override the sampling seed")
    sub = parser.add_subparsers(dest="verb", required=True)
    sub.add_parser("rabi", help="oracle vs SWE time series")
    p_field = sub.add_parser("phasespace", help="dump one phase-space field")
    p_field.add_argument("--time", type=float, default=0.0)
    p_field.add_argument("--kind", choices=["wigner", "husimi", "swe-density"],
                         default="husimi")
    p_sample = sub.add_parser("sample", help="draw classical field samples")
    p_sample.add_argument("--time", type=float, default=0.0)
    p_sample.add_argument("--count", type=int)
    sub.add_parser("verify", help="run the identity suite")
    args = parser.parse_args(argv)
    config = _load_config(args)

    if args.verb == "rabi":
        report = cmd_rabi(config)
        print(f"wrote {Path(config.output_dir) / 'rabi_timeseries.csv'} "
              f"({len(report.rows)} samples)")
        return 0
    if args.verb == "phasespace":
        path = cmd_phasespace(config, args.time, args.kind)
        print(f"wrote {path}")
        return 0
    if args.verb == "sample":
        path = cmd_sample(config, args.time, count=args.count, seed=config.sample_seed)
        print(f"wrote {path}")
        return 0
    if args.verb == "verify":
        status, report = cmd_verify(config)
        for check in report["checks"]:
            state = "pass" if check["pass"] else "FAIL"
            print(f"{check['name']}: error {check['error']:.3e} "
                  f"(threshold {check['threshold']:.1e}) {state}")
        return status
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
