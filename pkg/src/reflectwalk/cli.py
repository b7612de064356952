"""Command-line interface.

One binary, subcommand per capability::

    reflectwalk simulate   --config cfg.yaml --out results/
    reflectwalk invariant  --config cfg.yaml
    reflectwalk criteria   --config cfg.yaml
    reflectwalk ladder     --config cfg.yaml --out results/
    reflectwalk classes    --config cfg.yaml --out results/
    reflectwalk witness    --config cfg.yaml
    reflectwalk backward   --config cfg.yaml --out results/
    reflectwalk experiment --config cfg.yaml --out results/
    reflectwalk validate   --config cfg.yaml

Configs are YAML mappings (see the schema dicts below and the demos
directory).  Every run writes a ``metadata.json`` echoing the fully resolved
configuration, including the master seed and all defaults, so any artifact
can be regenerated from its metadata file alone:
``reflectwalk <sub> --config metadata.json`` reproduces it bit for bit.

Batch experiment files may list several experiments; ``--threads`` caps the
worker pool that runs batch entries in parallel.  Each entry draws its seed
from the master seed by the fixed splitmix64 derivation, so results do not
depend on scheduling.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import yaml

from . import __version__, diagnostics, exact_1d, lattice_structure, measures
from . import reflect_core
from .measures import MeasureError
from .rng import child_seed, make_rng

SCHEMA_VERSION = 1

DEFAULTS = {
    "simulate": {"steps": 1000, "start": None, "seed": 0},
    "invariant": {"seed": 0},
    "criteria": {"truncation": 1 << 22, "seed": 0},
    "ladder": {"method": "auto", "samples": 100_000, "step_cap": 10_000_000,
               "seed": 0},
    "classes": {"window": 20, "margin": None, "seed": 0},
    "witness": {"verified_range": 50, "seed": 0},
    "backward": {"horizon": 500, "samples": 1000, "parity": None, "seed": 0},
    "experiment": {"seed": 0},
}


def _fmt(x) -> str:
    """Full binary64 round-trip formatting."""
    return repr(float(x))


def _load_config(path):
    with open(path, "r") as fh:
        if str(path).endswith(".json"):
            cfg = json.load(fh)
        else:
            cfg = yaml.safe_load(fh)
    if isinstance(cfg, dict) and "config" in cfg and "subcommand" in cfg:
        cfg = cfg["config"]          # accept metadata.json files directly
    return cfg or {}


def _resolve(sub: str, cfg: dict, args) -> dict:
    out = dict(DEFAULTS.get(sub, {}))
    out.update(cfg)
    if args.seed is not None:
        out["seed"] = args.seed
    if args.threads is not None:
        out["threads"] = args.threads
    out.setdefault("threads", 1)
    return out


def _write_metadata(outdir: Path, sub: str, cfg: dict, extra=None):
    meta = {"tool": "reflectwalk", "version": __version__,
            "schema_version": SCHEMA_VERSION, "subcommand": sub, "config": cfg}
    if extra:
        meta.update(extra)
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "metadata.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=str)
    return meta


def _joint_of(cfg: dict) -> measures.JointMeasure:
    if "joint" in cfg:
        return measures.joint_from_config(cfg["joint"])
    if "measure" in cfg:
        m = measures.measure_from_config(cfg["measure"])
        dims = (1, 0, 0, 0) if m.is_lattice else (0, 1, 0, 0)
        return measures.JointMeasure.product(dims, [m])
    raise MeasureError("config needs a 'measure' or 'joint' section")


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------

def _cmd_simulate(cfg, outdir):
    spec = reflect_core.WalkSpec(_joint_of(cfg))
    start = cfg.get("start") or [0.0] * spec.dim
    traj = reflect_core.simulate(spec, start, int(cfg["steps"]),
                                 make_rng(int(cfg["seed"])))
    outdir.mkdir(parents=True, exist_ok=True)
    traj.to_csv(outdir / "trajectory.csv")
    print(f"wrote {outdir / 'trajectory.csv'} ({cfg['steps']} steps)")
    return {}


def _cmd_invariant(cfg, outdir):
    m = measures.measure_from_config(cfg["measure"])
    nu = exact_1d.invariant_measure_nonneg(m)
    lines = ["x,mass"]
    if nu.kind == "lattice":
        for x, mass in zip(nu.support, nu.masses):
            lines.append(f"{int(x)},{_fmt(mass)}")
    else:
        grid = cfg.get("grid", [i / 20 for i in range(21)])
        for x in grid:
            lines.append(f"{_fmt(x)},{_fmt(nu.density(float(x)))}")
    lines.append(f"total_mass,{_fmt(nu.total_mass)}")
    text = "\n".join(lines)
    print(text)
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "invariant.csv").write_text(text + "\n")
    return {}


def _cmd_criteria(cfg, outdir):
    m = measures.measure_from_config(cfg["measure"])
    rep = exact_1d.recurrence_criteria(m, int(cfg["truncation"]))
    payload = {
        "schema_version": SCHEMA_VERSION,
        "sqrt_moment": rep.cond_sqrt_moment,
        "tail_square": rep.cond_tail_square,
        "tail_product": rep.cond_tail_product,
        "truncation": rep.truncation,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "criteria.json").write_text(json.dumps(payload, indent=2,
                                                         sort_keys=True) + "\n")
    return {}


def _cmd_ladder(cfg, outdir):
    m = measures.measure_from_config(cfg["measure"])
    method = cfg["method"]
    if method == "auto":
        method = "exact" if (m.has_atoms and m.min_support() >= -1
                             and abs(m.mean()) < 1e-12 or
                             (m.has_atoms and m.min_support() >= 0)) else "monte_carlo"
    if method == "exact":
        lad = exact_1d.ladder_exact_skip_free(m)
    else:
        lad = exact_1d.ladder_monte_carlo(m, int(cfg["samples"]),
                                          make_rng(int(cfg["seed"])),
                                          step_cap=int(cfg["step_cap"]))
    lines = ["height,prob"]
    for x, p in lad.ladder.atoms_dict().items():
        lines.append(f"{x},{_fmt(p)}")
    text = "\n".join(lines)
    print(text)
    print(f"method,{lad.method}")
    if lad.capped_excursions:
        print(f"capped_excursions,{lad.capped_excursions}")
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "ladder.csv").write_text(text + "\n")
    return {"method": lad.method, "capped_excursions": lad.capped_excursions}


def _cmd_classes(cfg, outdir):
    j = _joint_of(cfg)
    margin = cfg.get("margin")
    reports = lattice_structure.essential_classes(
        j, int(cfg["window"]), None if margin is None else int(margin))
    dec = lattice_structure.parity_group(j)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "parity_group": [list(map(int, g)) for g in dec.group],
        "n_cosets": dec.n_cosets,
        "cosets": [[list(map(int, e)) for e in cs] for cs in dec.cosets],
        "classes": [
            {
                "coset_index": r.coset_index,
                "certificate": r.certificate,
                "window": r.window,
                "margin": r.margin,
                "members": [list(map(int, mm)) for mm in r.members],
                "transient_classes": [[list(map(int, p)) for p in cls]
                                      for cls in r.transient_classes],
            }
            for r in reports
        ],
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "classes.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return {}


def _cmd_witness(cfg, outdir):
    m = measures.measure_from_config(cfg["measure"])
    w = lattice_structure.constant_map_witness(m, int(cfg["verified_range"]))
    print("generators:", w.generators)
    for y, word in zip(w.generators, w.generator_words):
        print(f"  word[{y}]: {word.to_text()}")
    print("gcd chain:", w.gcd_chain)
    print("parity map word:", w.parity_map.to_text())
    print(f"verification table (k <= {w.verified_k}): "
          f"{'PASS' if w.checks_passed else 'FAIL'}")
    for kk in (1, 2, w.verified_k):
        row = w.table[kk][: 2 * kk]
        print(f"  h^{kk} on 0..{2 * kk - 1}: {row.tolist()}")
    payload = {
        "schema_version": SCHEMA_VERSION,
        "generators": w.generators,
        "generator_words": [wd.letters.ravel().tolist() for wd in w.generator_words],
        "gcd_chain": w.gcd_chain,
        "parity_map": w.parity_map.letters.ravel().tolist(),
        "verified_k": w.verified_k,
        "checks_passed": w.checks_passed,
        "table": w.table.tolist(),
    }
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "witness.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n")
    if not w.checks_passed:
        raise MeasureError("witness verification failed")
    return {"checks_passed": w.checks_passed}


def _cmd_backward(cfg, outdir):
    spec = reflect_core.WalkSpec(_joint_of(cfg))
    parity = cfg.get("parity") or [0] * spec.r1
    res = reflect_core.backward_sample(spec, parity, int(cfg["horizon"]),
                                       make_rng(int(cfg["seed"])),
                                       n_samples=int(cfg["samples"]))
    lines = ["sample," + ",".join(f"x{i}" for i in range(res.values.shape[1]))
             + ",converged,blocks"]
    for i, (v, c, b) in enumerate(zip(res.values, res.converged, res.blocks_used)):
        lines.append(f"{i}," + ",".join(_fmt(x) for x in v)
                     + f",{int(c)},{int(b)}")
    text = "\n".join(lines)
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "backward.csv").write_text(text + "\n")
    conv = float(res.converged.mean())
    print(f"samples: {len(res.values)}, converged fraction: {conv}")
    return {"converged_fraction": conv}


PROBES = {
    "occupation", "return_time", "symmetrization", "cesaro",
    "reflected_plus_free", "null_probe", "dimension", "subordinated_exponent",
}


def _run_one_experiment(entry: dict, outdir: Path, master_seed: int, index: int):
    probe = entry.get("probe")
    if probe not in PROBES:
        raise MeasureError(f"unknown probe {probe!r}; choose from {sorted(PROBES)}")
    seed = int(entry.get("seed", child_seed(master_seed, index)))
    rng = make_rng(seed)
    name = entry.get("name", f"{probe}_{index}")
    result: dict = {"schema_version": SCHEMA_VERSION, "probe": probe,
                    "name": name, "seed": seed,
                    "thresholds": dict(diagnostics.THRESHOLDS)}
    raw_rows: list[str] = []
    if probe == "occupation":
        spec = reflect_core.WalkSpec(_joint_of(entry))
        m = spec.law.marginal(0)
        nu = exact_1d.invariant_measure_nonneg(m)
        tv, occ = diagnostics.occupation_vs_invariant(
            spec, nu, int(entry.get("steps", 1_000_000)),
            int(entry.get("burn_in", 10_000)), rng)
        result["tv_distance"] = tv
        raw_rows = ["state,visits"] + [f"\"{k}\",{v}" for k, v in sorted(occ.items())]
    elif probe == "return_time":
        spec = reflect_core.WalkSpec(_joint_of(entry))
        center = entry.get("window_center", [0.0] * spec.r)
        radius = float(entry.get("window_radius", 0.0))
        stats, ev = diagnostics.return_time_stats(
            spec, entry.get("start", [0.0] * spec.dim), (center, radius),
            int(entry.get("budget", 100_000)), int(entry.get("replicas", 32)), rng)
        result["evidence"] = ev.__dict__
        raw_rows = ["return_time"] + [str(t) for t in stats.return_times[:10000]]
    elif probe == "symmetrization":
        j = _joint_of(entry)
        mode = entry.get("mode", "exact_enumeration")
        out = diagnostics.symmetrization_check(
            j, entry.get("start", [0.0] * j.dim), int(entry.get("horizon", 4)),
            mode, rng, samples=int(entry.get("samples", 100_000)))
        if mode == "exact_enumeration":
            result["max_discrepancy"] = out
        else:
            result["tv_estimate"], result["tv_se"] = out
    elif probe == "cesaro":
        spec = reflect_core.WalkSpec(_joint_of(entry))
        nu1 = exact_1d.invariant_measure_nonneg(spec.law.marginal(0))
        nu2 = exact_1d.invariant_measure_nonneg(spec.law.marginal(1))
        result["cesaro"] = diagnostics.cesaro_lower_bound(
            nu1, nu2, set(entry["set1"]), set(entry["set2"]), spec,
            int(entry.get("steps", 1_000_000)), rng)
    elif probe == "reflected_plus_free":
        spec = reflect_core.WalkSpec(_joint_of(entry))
        ev, wald = diagnostics.reflected_plus_free_experiment(
            spec, int(entry.get("budget", 200_000)),
            int(entry.get("replicas", 32)), rng,
            wald_cycles=int(entry.get("wald_cycles", 100_000)))
        result["evidence"] = ev.__dict__
        result["wald"] = wald
    elif probe == "null_probe":
        factors = [measures.measure_from_config(c) for c in entry["factors"]]
        out = diagnostics.product_null_recurrence_probe(
            factors, entry.get("target", [0] * len(factors)),
            entry.get("grid", [2 ** k for k in range(6, 15)]),
            int(entry.get("replicas", 100_000)), rng)
        result["probe_result"] = out
        raw_rows = ["n,phat"] + [f"{n},{_fmt(p)}" for n, p in
                                 zip(out["grid"], out["factors"][0]["phat"])]
    elif probe == "dimension":
        j = _joint_of(entry)
        out = diagnostics.dimension_transience_probe(
            j, int(entry.get("budget", 1_000_000)),
            int(entry.get("replicas", 128)), rng,
            window_radius=float(entry.get("window_radius", 2.0)),
            burn_in=entry.get("burn_in"))
        dists = out.pop("min_distance_after_burn_in")
        result["probe_result"] = out
        raw_rows = ["replica,min_distance_after_burn_in"] + [
            f"{i},{_fmt(v)}" for i, v in enumerate(dists)]
    elif probe == "subordinated_exponent":
        out = diagnostics.subordinated_return_exponent(
            float(entry["alpha"]), rng,
            n_max=int(entry.get("n_max", 1 << 14)),
            replicas=int(entry.get("replicas", 1_000_000)))
        result["probe_result"] = out
        raw_rows = ["n,phat"] + [f"{n},{_fmt(p)}" for n, p in
                                 zip(out["grid"], out["phat"])]
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / f"{name}.json", "w") as fh:
        json.dump(result, fh, indent=2, sort_keys=True, default=str)
    if raw_rows:
        (outdir / f"{name}.csv").write_text("\n".join(raw_rows) + "\n")
    return name, result


def _cmd_experiment(cfg, outdir):
    if outdir is None:
        raise MeasureError("experiment needs --out")
    entries = cfg.get("experiments") or [cfg]
    master = int(cfg["seed"])
    threads = int(cfg.get("threads", 1))
    results = {}
    if threads > 1 and len(entries) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = [pool.submit(_run_one_experiment, e, outdir, master, i)
                    for i, e in enumerate(entries)]
            for fut in futs:
                name, res = fut.result()
                results[name] = res
    else:
        for i, e in enumerate(entries):
            name, res = _run_one_experiment(e, outdir, master, i)
            results[name] = res
    for name, res in results.items():
        summary = res.get("evidence", {}).get("category") or \
            res.get("probe_result", {}).get("slope") or \
            res.get("tv_distance") or res.get("max_discrepancy")
        print(f"{name}: {summary}")
    return {"experiments": sorted(results)}


def _cmd_validate(cfg, outdir):
    checks = []

    def check(name, ok, message):
        checks.append({"check": name, "status": "ok" if ok else "failed",
                       "message": message})

    try:
        j = _joint_of(cfg)
        r1, r2, s1, s2 = j.dims
        check("dims_free", s1 + s2 <= 2,
              f"s={s1 + s2}: only 0, 1 or 2 free coordinates are meaningful "
              "(more makes the free part transient outright)")
        check("dims_reflected", r1 + r2 >= 1,
              f"r={r1 + r2}: at least one reflected coordinate required")
        for i in range(r1 + r2):
            m = j.marginal(i)
            check(f"nontrivial_{i}", m.is_nontrivial_positive(),
                  f"reflecting marginal {i} must put mass on (0, inf)")
            if m.is_lattice and m.has_atoms and not m.has_analytic_tail:
                _, kappa = measures.gcd_normalize(m)
                check(f"normalized_{i}", kappa == 1,
                      f"support gcd is {kappa}; auto-normalization would "
                      f"divide the lattice by {kappa}" if kappa != 1 else
                      "support gcd is 1")
    except MeasureError as e:
        check("construct", False, str(e))
    report = {"schema_version": SCHEMA_VERSION,
              "ok": all(c["status"] == "ok" for c in checks),
              "checks": checks}
    print(json.dumps(report, indent=2, sort_keys=True))
    return report


COMMANDS = {
    "simulate": _cmd_simulate,
    "invariant": _cmd_invariant,
    "criteria": _cmd_criteria,
    "ladder": _cmd_ladder,
    "classes": _cmd_classes,
    "witness": _cmd_witness,
    "backward": _cmd_backward,
    "experiment": _cmd_experiment,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="reflectwalk",
        description="Exact analysis and Monte Carlo simulation of reflected "
                    "random walks.")
    parser.add_argument("subcommand", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=str, default=None,
                        help="YAML (or metadata JSON) configuration file")
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed override")
    parser.add_argument("--out", type=str, default=None,
                        help="output directory for artifacts")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker cap for batch experiments")
    args = parser.parse_args(argv)
    cfg = _load_config(args.config) if args.config else {}
    cfg = _resolve(args.subcommand, cfg, args)
    outdir = Path(args.out) if args.out else None
    try:
        extra = COMMANDS[args.subcommand](cfg, outdir)
    except MeasureError as e:
        json.dump({"error": type(e).__name__, "message": str(e)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    if outdir is not None:
        _write_metadata(outdir, args.subcommand, cfg, extra)
    return 0


if __name__ == "__main__":
    sys.exit(main())
