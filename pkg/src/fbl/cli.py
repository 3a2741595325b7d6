"""Command-line front end: parse expressions, dispatch, emit JSON/CSV reports.

Every emitted lower bound ships with its certificate; ``--verify`` re-checks
admissibility and the bound from the certificate alone on an independent
code path. Exit codes: 0 success, 2 usage or parse error, 3 assertion or
invariant failure. Identical flags and seed produce an identical numeric
payload (the timestamp field aside).
"""

from __future__ import annotations

import csv
import datetime
import io
import json
import math
import sys
from dataclasses import dataclass

import click
import numpy as np

from .errors import (
    CapExceeded,
    DimensionMismatch,
    FBLError,
    ParseError,
    SpaceMismatch,
)
from .extension import LinOp, extend, hom_lower_bound, op_norm, riesz_kantorovich
from .grammar import parse_term, print_term
from .hfunc import DyadicBlockSum, FMu, GPhi, Harmonic, HFunc, MinSup, TermFunc
from .majorant import DiscreteMeasure, find_majorant, verify_fmu_contraction
from .nakano import (
    DirectedFamily,
    directed_sup,
    g_phi_norm,
    maximality_check,
    strong_nakano_bound,
)
from .norm import exact_norm_l1, search_lower, sup_norm, upper_bound
from .constructions import (
    DyadicGrid,
    fatou_suite,
    harmonic_certificate,
    interval_spread,
    nonmember_distance,
    rademacher_embedding,
)
from .spaces import Space
from .verify import verify_certificate
from . import terms as _terms

_USAGE_ERRORS = (
    ParseError,
    DimensionMismatch,
    SpaceMismatch,
    CapExceeded,
    ValueError,
    json.JSONDecodeError,
)


@dataclass
class RunConfig:
    space: Space | None
    seed: int
    m_max: int
    restarts: int
    tol: float
    workers: int
    out: str | None
    fmt: str
    verify: bool

    def params(self) -> dict:
        return {
            "space": None if self.space is None else self.space.tag(),
            "seed": self.seed,
            "mmax": self.m_max,
            "restarts": self.restarts,
            "tol": self.tol,
            "workers": self.workers,
        }


def _config(space, seed, mmax, restarts, tol, workers, out, fmt, verify) -> RunConfig:
    return RunConfig(
        space=None if space is None else Space.from_tag(space),
        seed=seed,
        m_max=mmax,
        restarts=restarts,
        tol=tol,
        workers=workers,
        out=out,
        fmt=fmt,
        verify=verify,
    )


def parse_function(text: str, space: Space | None) -> HFunc:
    """A term in the grammar, or a closed-form tag like ``gphi:[1,1]``."""
    if ":" in text:
        tag, _, rest = text.partition(":")
        if tag == "gphi":
            if space is None:
                raise click.UsageError("gphi needs --space")
            return GPhi(space, json.loads(rest))
        if tag == "harmonic":
            f = Harmonic(int(rest))
            _check_space(space, f.space)
            return f
        if tag == "minsup":
            f = MinSup(int(rest))
            _check_space(space, f.space)
            return f
        if tag == "dyadic":
            n, N = (int(x) for x in rest.split(","))
            f = DyadicBlockSum(n, N)
            _check_space(space, f.space)
            return f
        if tag == "fmu":
            if space is None:
                raise click.UsageError("fmu needs --space")
            payload = json.loads(rest)
            return DiscreteMeasure.from_json(space, payload).hfunc()
    if space is None:
        raise click.UsageError("term expressions need --space")
    return TermFunc(parse_term(text, space), space)


def _check_space(declared: Space | None, implied: Space):
    if declared is not None and declared != implied:
        raise click.UsageError(
            f"--space {declared.tag()} conflicts with the implied space "
            f"{implied.tag()}"
        )


def _emit(cfg: RunConfig, report: dict, table=None):
    report = dict(report)
    report["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    if cfg.fmt == "csv":
        text = _to_csv(report, table)
    else:
        text = json.dumps(report, sort_keys=True, indent=2, default=_jsonable)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return None
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _flatten(prefix, value, rows):
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else k, value[k], rows)
    elif isinstance(value, (list, tuple)):
        rows.append((prefix, json.dumps(value, default=_jsonable)))
    else:
        rows.append((prefix, value))


def _to_csv(report: dict, table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    if table:
        keys = list(table[0].keys())
        writer.writerow(keys)
        for row in table:
            writer.writerow([row.get(k) for k in keys])
    else:
        writer.writerow(["key", "value"])
        rows = []
        _flatten("", report, rows)
        for key, value in rows:
            writer.writerow([key, value])
    return buf.getvalue().rstrip("\n")


def _run(body):
    try:
        body()
    except click.ClickException:
        raise
    except _USAGE_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except FBLError as exc:
        click.echo(f"invariant failure: {exc}", err=True)
        sys.exit(3)


def _common_options(fn):
    fn = click.option("--space", default=None, help="space tag p:n, e.g. 1:3 or inf:2")(fn)
    fn = click.option("--seed", default=0, show_default=True, type=int)(fn)
    fn = click.option("--mmax", default=4, show_default=True, type=int,
                      help="largest certificate tuple size searched")(fn)
    fn = click.option("--restarts", default=6, show_default=True, type=int)(fn)
    fn = click.option("--tol", default=1e-6, show_default=True, type=float)(fn)
    fn = click.option("--workers", default=1, show_default=True, type=int)(fn)
    fn = click.option("--out", default=None, help="write the report to a file")(fn)
    fn = click.option("--format", "fmt", default="json", show_default=True,
                      type=click.Choice(["json", "csv"]))(fn)
    fn = click.option("--verify", is_flag=True,
                      help="re-check certificates on an independent code path")(fn)
    return fn


@click.group()
def main():
    """Certified computation in free Banach lattices over l_p^n."""


@main.command("eval")
@click.argument("expr")
@click.option("--at", required=True, help="functional coordinates as JSON")
@_common_options
def cmd_eval(expr, at, space, seed, mmax, restarts, tol, workers, out, fmt, verify):
    """Evaluate a term at a dual point."""

    def body():
        cfg = _config(space, seed, mmax, restarts, tol, workers, out, fmt, verify)
        if cfg.space is None:
            raise click.UsageError("eval needs --space")
        term = parse_term(expr, cfg.space)
        point = np.asarray(json.loads(at), dtype=float)
        value = _terms.eval_term(term, point)
        report = {
            "command": "eval",
            "params": {**cfg.params(), "expr": expr, "at": point.tolist()},
            "value": value,
        }
        if cfg.verify:
            from .verify import reevaluate

            recomputed = reevaluate(
                {"kind": "term", "expr": print_term(term)}, cfg.space, point
            )
            report["verification"] = {
                "recomputed": recomputed,
                "ok": abs(recomputed - value) <= 1e-9 * max(1.0, abs(value)),
            }
            if not report["verification"]["ok"]:
                raise FBLError("independent evaluation disagreed")
        _emit(cfg, report)

    _run(body)


@main.command("norm")
@click.argument("expr")
@click.option("--exact-l1", "exact_l1", is_flag=True,
              help="exact LP norm over l1^n (nonnegative functions)")
@_common_options
def cmd_norm(expr, exact_l1, space, seed, mmax, restarts, tol, workers, out, fmt, verify):
    """Norm estimate with a certificate, or the exact l1 LP value."""

    def body():
        cfg = _config(space, seed, mmax, restarts, tol, workers, out, fmt, verify)
        f = parse_function(expr, cfg.space)
        fspace = f.space
        report = {
            "command": "norm",
            "params": {**cfg.params(), "expr": expr, "exact_l1": exact_l1,
                       "space": fspace.tag()},
        }
        if exact_l1:
            res = exact_norm_l1(
                f, fspace, tol=cfg.tol, seed=cfg.seed,
                search_kwargs={"m_max": cfg.m_max, "restarts": cfg.restarts,
                               "workers": cfg.workers},
            )
            report["result"] = res.to_json()
            claimed = res.lower
            certificate = res.certificate
        else:
            est = search_lower(
                f, fspace, m_max=cfg.m_max, restarts=cfg.restarts,
                seed=cfg.seed, workers=cfg.workers,
            )
            report["result"] = est.to_json()
            report["result"]["sup_norm"] = sup_norm(f, fspace, seed=cfg.seed)
            claimed = est.lower
            certificate = est.certificate
        if cfg.verify:
            ver = verify_certificate(
                fspace, f.describe(),
                [fn.coords.tolist() for fn in certificate.functionals],
                claimed,
            )
            report["verification"] = ver.to_json()
            if not ver.ok:
                raise FBLError("certificate failed independent verification")
        _emit(cfg, report)

    _run(body)


@main.command("extend")
@click.argument("expr")
@click.option("--matrix", required=True, help="row-major JSON matrix")
@click.option("--codomain", required=True, help="codomain space tag")
@_common_options
def cmd_extend(expr, matrix, codomain, space, seed, mmax, restarts, tol, workers,
               out, fmt, verify):
    """Apply the lattice-homomorphism extension of a linear operator."""

    def body():
        cfg = _config(space, seed, mmax, restarts, tol, workers, out, fmt, verify)
        if cfg.space is None:
            raise click.UsageError("extend needs --space (the operator domain)")
        cod = Space.from_tag(codomain)
        T = LinOp(np.asarray(json.loads(matrix), dtype=float), cfg.space, cod)
        term = parse_term(expr, cfg.space)
        ext = extend(T, term)
        bounds = op_norm(T)
        report = {
            "command": "extend",
            "params": {**cfg.params(), "expr": expr, "matrix": T.matrix.tolist(),
                       "codomain": cod.tag()},
            "result": {
                "values": ext.values.tolist(),
                "via": ext.via,
                "op_norm": {"lower": bounds.lower, "upper": bounds.upper},
                "hom_lower_bound": hom_lower_bound(term, T),
            },
        }
        if cfg.verify:
            from .extension import _direct_lattice_eval

            direct = _direct_lattice_eval(T, term)
            ok = bool(np.allclose(direct, ext.values, atol=1e-9))
            report["verification"] = {"direct": direct.tolist(), "ok": ok}
            if not ok:
                raise FBLError("extension routes disagreed")
        _emit(cfg, report)

    _run(body)


@main.command("rk")
@click.option("--ystar", required=True, help="nonnegative functional as JSON")
@click.option("--us", required=True, help="JSON list of lattice vectors")
@_common_options
def cmd_rk(ystar, us, space, seed, mmax, restarts, tol, workers, out, fmt, verify):
    """Value of y* on a finite join, via positive decompositions."""

    def body():
        cfg = _config(space, seed, mmax, restarts, tol, workers, out, fmt, verify)
        y = np.asarray(json.loads(ystar), dtype=float)
        vectors = [np.asarray(u, dtype=float) for u in json.loads(us)]
        value = riesz_kantorovich(y, vectors)
        report = {
            "command": "rk",
            "params": {**cfg.params(), "ystar": y.tolist(),
                       "us": [u.tolist() for u in vectors]},
            "value": value,
            "routes": "closed form and decomposition LP agreed to 1e-9",
        }
        _emit(cfg, report)

    _run(body)


@main.command("majorant")
@click.argument("expr")
@click.option("--proxy", default=None, type=float,
              help="norm lower bound used on the right-hand side")
@click.option("--atoms", default=64, show_default=True, type=int)
@_common_options
def cmd_majorant(expr, proxy, atoms, space, seed, mmax, restarts, tol, workers,
                 out, fmt, verify):
    """Dominating norm-one measure average for a nonnegative function."""

    def body():
        cfg = _config(space, seed, mmax, restarts, tol, workers, out, fmt, verify)
        f = parse_function(expr, cfg.space)
        res = find_majorant(
            f, f.space, proxy=proxy, atom_grid_size=atoms,
            tol=max(cfg.tol, 1e-6), seed=cfg.seed,
        )
        report = {
            "command": "majorant",
            "params": {**cfg.params(), "expr": expr, "atoms": atoms,
                       "space": f.space.tag()},
            "result": res.to_json(),
        }
        if cfg.verify:
            from .verify import reevaluate

            rng = np.random.default_rng(cfg.seed + 1)
            from .spaces import sample_dual_sphere

            pts = sample_dual_sphere(f.space, 512, rng)
            mu_fn = res.measure.hfunc()
            worst = 0.0
            for row in pts:
                lhs = reevaluate(f.describe(), f.space, row)
                rhs = res.proxy * reevaluate(mu_fn.describe(), f.space, row)
                worst = max(worst, lhs - rhs)
            ok = worst <= max(cfg.tol, 1e-6) * 10
            report["verification"] = {"fresh_violation": worst, "ok": ok}
            if not ok:
                raise FBLError("majorant failed independent domination check")
        _emit(cfg, report)

    _run(body)


@main.command("nakano")
@click.option("--family", default=None, help="JSON list of expressions")
@click.option("--check", default=None, help="expression for maximality diagnostics")
@click.option("--gphi", "gphi_arr", default=None, help="JSON weights for the norm identity")
@_common_options
def cmd_nakano(family, check, gphi_arr, space, seed, mmax, restarts, tol, workers,
               out, fmt, verify):
    """Directed-family least upper bounds, maximality diagnostics, g_phi norms."""

    def body():
        cfg = _config(space, seed, mmax, restarts, tol, workers, out, fmt, verify)
        report = {"command": "nakano", "params": dict(cfg.params())}
        if gphi_arr is not None:
            phi = np.asarray(json.loads(gphi_arr), dtype=float)
            report["params"]["gphi"] = phi.tolist()
            report["result"] = {
                "norm": g_phi_norm(phi, verify=cfg.verify, seed=cfg.seed)
            }
        elif check is not None:
            f = parse_function(check, cfg.space)
            rep = maximality_check(f, f.space, seed=cfg.seed)
            report["params"]["check"] = check
            report["result"] = rep.to_json()
        elif family is not None:
            exprs = json.loads(family)
            members = [parse_function(e, cfg.space) for e in exprs]
            fam = DirectedFamily(members, space=members[0].space, seed=cfg.seed)
            bound = strong_nakano_bound(fam, tol=max(cfg.tol, 1e-6), seed=cfg.seed)
            report["params"]["family"] = exprs
            report["result"] = bound.to_json()
            if cfg.verify:
                from .verify import reevaluate

                from .spaces import sample_dual_sphere

                rng = np.random.default_rng(cfg.seed + 1)
                pts = sample_dual_sphere(members[0].space, 512, rng)
                sup_fn = directed_sup(fam)
                worst = 0.0
                for row in pts:
                    lhs = reevaluate(sup_fn.describe(), members[0].space, row)
                    rhs = reevaluate(
                        {"kind": "gphi", "phi": bound.phi.tolist()},
                        members[0].space, row,
                    )
                    worst = max(worst, lhs - rhs)
                ok = worst <= max(cfg.tol, 1e-6) * 10
                report["verification"] = {"fresh_violation": worst, "ok": ok}
                if not ok:
                    raise FBLError("dominating weights failed the fresh check")
        else:
            raise click.UsageError("nakano needs --family, --check, or --gphi")
        _emit(cfg, report)

    _run(body)


@main.group("example")
def example():
    """Deterministic desk-scale constructions."""


@example.command("harmonic")
@click.option("--N", "n_terms", required=True, type=int)
@_common_options
def example_harmonic(n_terms, space, seed, mmax, restarts, tol, workers, out, fmt, verify):
    """Coordinate certificates growing like the harmonic series."""

    def body():
        cfg = _config(space, seed, mmax, restarts, tol, workers, out, fmt, verify)
        growth = []
        for k in range(1, n_terms + 1):
            res_k = harmonic_certificate(k)
            growth.append({"N": k, "lower": res_k.lower,
                           "expected": str(res_k.expected)})
        res = harmonic_certificate(n_terms)
        report = {
            "command": "example harmonic",
            "params": {**cfg.params(), "N": n_terms},
            "result": res.to_json(),
            "growth": growth,
        }
        if cfg.verify:
            ver = verify_certificate(
                res.certificate.space,
                {"kind": "harmonic", "N": n_terms},
                [fn.coords.tolist() for fn in res.certificate.functionals],
                res.lower,
            )
            report["verification"] = ver.to_json()
            if not ver.ok:
                raise FBLError("harmonic certificate failed verification")
        _emit(cfg, report, table=growth)

    _run(body)


@example.command("distance")
@click.option("--n", "n_gens", required=True, type=int)
@click.option("--g", "g_expr", default=None,
              help="term over the first n generators (default 0)")
@_common_options
def example_distance(n_gens, g_expr, space, seed, mmax, restarts, tol, workers,
                     out, fmt, verify):
    """Distance of the capped coordinate function from a lattice term."""

    def body():
        cfg = _config(space, seed, mmax, restarts, tol, workers, out, fmt, verify)
        ambient = Space(2 * n_gens, 1)
        g = None if g_expr is None else parse_term(g_expr, ambient)
        res = nonmember_distance(n_gens, g)
        report = {
            "command": "example distance",
            "params": {**cfg.params(), "n": n_gens, "g": g_expr,
                       "space": ambient.tag()},
            "result": res.to_json(),
        }
        if cfg.verify:
            from .verify import recheck_admissibility

            adm_x = recheck_admissibility(ambient, res.to_json()["x_tuple"]["functionals"])
            adm_y = recheck_admissibility(ambient, res.to_json()["y_tuple"]["functionals"])
            ok = adm_x <= 1 + 1e-9 and adm_y <= 1 + 1e-9
            report["verification"] = {"adm_x": adm_x, "adm_y": adm_y, "ok": ok}
            if not ok:
                raise FBLError("distance tuples failed admissibility recheck")
        _emit(cfg, report)

    _run(body)


@example.command("fatou")
@click.option("--grid", "grid_n", required=True, type=int)
@click.option("--gscale", default=1.5, show_default=True, type=float)
@click.option("--samples", default=1000, show_default=True, type=int)
@_common_options
def example_fatou(grid_n, gscale, samples, space, seed, mmax, restarts, tol,
                  workers, out, fmt, verify):
    """Monotone block sums capped at a taller generator: the norm gap."""

    def body():
        cfg = _config(space, seed, mmax, restarts, tol, workers, out, fmt, verify)
        grid = DyadicGrid(grid_n)
        rep = fatou_suite(grid, gscale, samples=samples, seed=cfg.seed)
        table = [
            {"n": row["n"], "norm_lower": row["lower"], "norm_upper": row["upper"],
             "capped_lower": rep.fn_lowers[row["n"] - 1]}
            for row in rep.fn_norms
        ]
        report = {
            "command": "example fatou",
            "params": {**cfg.params(), "grid": grid_n, "gscale": gscale,
                       "samples": samples},
            "result": rep.to_json(),
        }
        _emit(cfg, report, table=table)

    _run(body)


@example.command("rademacher")
@click.option("--gamma", required=True, type=int)
@click.option("--p", default="2", show_default=True)
@click.option("--A", "a_set", default="", help="comma-separated subset of 1..gamma")
@click.option("--a", "coeffs", default=None, help="comma-separated coefficients")
@click.option("--grid", "grid_n", required=True, type=int)
@_common_options
def example_rademacher(gamma, p, a_set, coeffs, grid_n, space, seed, mmax,
                       restarts, tol, workers, out, fmt, verify):
    """The 0/1 pairing dichotomy and the sum|a|/2 certified bound."""

    def body():
        cfg = _config(space, seed, mmax, restarts, tol, workers, out, fmt, verify)
        grid = DyadicGrid(grid_n)
        subset = [int(x) for x in a_set.split(",") if x.strip()]
        arr = None
        if coeffs is not None:
            arr = [float(x) for x in coeffs.split(",")]
        res = rademacher_embedding(
            gamma, p, grid, A=subset, coeffs=arr, seed=cfg.seed,
            search_kwargs={"m_max": cfg.m_max, "restarts": cfg.restarts},
        )
        report = {
            "command": "example rademacher",
            "params": {**cfg.params(), "gamma": gamma, "p": p, "A": subset,
                       "a": arr, "grid": grid_n},
            "result": res.to_json(),
        }
        if cfg.verify and res.certificate is not None:
            from .verify import recheck_admissibility

            adm = recheck_admissibility(
                Space(gamma, Space(gamma, p).p),
                res.to_json()["certificate"]["functionals"],
            )
            ok = adm <= 1 + 1e-9
            report["verification"] = {"admissibility": adm, "ok": ok}
            if not ok:
                raise FBLError("pattern tuple failed admissibility recheck")
        table = [{"gamma": g + 1, "pairing": v} for g, v in enumerate(res.pairings)]
        _emit(cfg, report, table=table)

    _run(body)


@example.command("interval")
@click.option("--f", "f_expr", required=True)
@click.option("--g", "g_expr", required=True)
@click.option("--us", required=True, help="JSON list of vectors")
@_common_options
def example_interval(f_expr, g_expr, us, space, seed, mmax, restarts, tol,
                     workers, out, fmt, verify):
    """Pairwise separation of interval elements pinned at chosen vectors."""

    def body():
        cfg = _config(space, seed, mmax, restarts, tol, workers, out, fmt, verify)
        if cfg.space is None:
            raise click.UsageError("interval needs --space")
        f = parse_term(f_expr, cfg.space)
        g = parse_term(g_expr, cfg.space)
        vectors = json.loads(us)
        res = interval_spread(
            f, g, vectors, seed=cfg.seed,
            search_kwargs={"m_max": cfg.m_max, "restarts": cfg.restarts},
        )
        report = {
            "command": "example interval",
            "params": {**cfg.params(), "f": f_expr, "g": g_expr, "us": vectors},
            "result": res.to_json(),
        }
        _emit(cfg, report)

    _run(body)


if __name__ == "__main__":
    main()
