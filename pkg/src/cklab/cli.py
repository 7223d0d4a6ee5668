"""``cklab`` command line.

Exit codes: 0 when every contract holds, 2 when the tool ran but a
mathematical contract failed, 1 on usage or input errors. Reports are JSON,
written to ``--out`` (resolved against ``$CKLAB_REPORT_DIR`` when relative)
or to standard output; a short summary goes to standard error unless
``--quiet``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import af_core as af
from . import crossed_product as cp
from . import fd_bimodule as fd
from . import matrix_subshift as ms
from . import path_rep as pr
from . import uniqueness_lab as ul
from .errors import CKLabError, InputError
from .reports import Contract, RunManifest, at_most, digest, dumps, holds

EXIT_OK, EXIT_INPUT, EXIT_CONTRACT = 0, 1, 2


class BadInput(InputError):
    pass


class UnknownCommand(InputError):
    pass


def _load_json(path: str) -> tuple:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise BadInput(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise BadInput(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return data, raw


def _load_matrix(path: str) -> tuple:
    data, raw = _load_json(path)
    if not isinstance(data, dict) or "rows" not in data:
        raise BadInput(f"{path}: expected an object with field 'rows'")
    try:
        return ms.matrix_from_dict(data), raw
    except InputError as exc:
        raise BadInput(f"{path}: field 'rows': {exc}") from exc


# subcommands return (result, contracts, anchors, seed)

def cmd_validate(A, args):
    result = {
        "matrix": A,
        "n": A.n,
        "n_vector": list(af.n_vector(A)),
        "out_degrees": [A.out_degree(i) for i in range(1, A.n + 1)],
    }
    return result, [], ["cuntz-krieger-relations"], None


def cmd_condition_i(A, args):
    depth = args.oracle_depth if args.oracle_depth is not None else min(2 * A.n + 1, ms.MAX_ORACLE_DEPTH)
    verdict = ms.check_condition_I(A)
    oracle = ms.brute_force_condition_I(A, depth)
    periodic = {p: ms.periodic_interior_check(A, p) for p in range(1, 2 * A.n + 1)}
    result = {
        "verdict": verdict,
        "oracle": {"depth": depth, "certified": depth >= A.n + 2, "verdict": oracle},
        "forced_states": sorted(ms.forced_states(A)),
        "periodic_interior_empty": [{"period": p, "empty": v} for p, v in periodic.items()],
    }
    contracts = [holds("shift topologically free iff condition (I)", verdict.holds == all(periodic.values()))]
    if depth >= A.n + 2:
        contracts.append(holds("oracle agrees", oracle.holds == verdict.holds))
    return result, contracts, ["condition-I", "topological-freeness"], None


def cmd_bratteli(A, args):
    dims = af.bratteli_dims(A, args.levels)
    enumerated = []
    for k in range(1, args.levels + 1):
        counts = [0] * A.n
        for w in ms.admissible_words(A, k):
            counts[w[-1] - 1] += 1
        enumerated.append(tuple(counts))
    return (
        {"dims": dims},
        [holds("recursion matches path enumeration", tuple(enumerated) == dims.levels)],
        ["af-core", "bratteli-diagram"],
        None,
    )


def cmd_states(A, args):
    try:
        prefix = tuple(int(s) for s in args.prefix.split(","))
    except ValueError as exc:
        raise BadInput(f"--prefix: expected comma-separated symbols, got {args.prefix!r}") from exc
    x = af.ProductStatePrefix(A, prefix)
    if len(prefix) < args.level + 2:
        raise BadInput(f"--prefix must have length >= level + 2 = {args.level + 2}")
    rows, worst = [], 0.0
    for k in range(1, args.level + 1):
        residual = max(
            af.state_pullback_check(x, af.LevelElement(k, {g: 1.0})) for g in af.level_generators(A, k)
        )
        worst = max(worst, residual)
        rows.append({
            "level": k,
            "support": list(prefix[:k]),
            "value_at_identity": af.product_state_eval(x, af.identity_at_level(A, k)),
            "pullback_residual": residual,
        })
    return (
        {"prefix": list(prefix), "levels": rows},
        [at_most("omega_x(alpha(a)) = omega_{shift x}(a)/n_{x_2}", worst, af.COEFF_TOL)],
        ["product-states", "af-core-endomorphism"],
        None,
    )


def cmd_relations(A, args):
    rep = pr.build_truncated_rep(A, args.trunc)
    records = pr.relation_residuals(rep)
    contracts = []
    for r in records:
        contracts.append(at_most(f"interior: {r.relation}", r.interior_residual, pr.RESIDUAL_TOL))
        contracts.append(at_most(f"boundary: {r.relation}", r.boundary_residual, 1.0 + pr.RESIDUAL_TOL))
    result = {"L": rep.L, "dimension": rep.dim, "residuals": records, "divergence_flags": list(cp.DIVERGENCE_FLAGS)}
    return result, contracts, ["cuntz-krieger-relations"], None


def cmd_crossed(A, args):
    L = args.trunc
    rep = pr.build_truncated_rep(A, L)
    S = cp.build_isometry_S(rep)
    top = max(1, L - 3)
    covariance, worst_cov = [], 0.0
    for k in range(1, top + 1):
        level_worst = 0.0
        for g in af.level_generators(A, k):
            report = cp.covariance_check(rep, af.LevelElement(k, {g: 1.0}), S)
            level_worst = max(level_worst, report.covariance.interior_residual)
        covariance.append({"level": k, "max_interior_residual": level_worst})
        worst_cov = max(worst_cov, level_worst)
    sample = cp.covariance_check(rep, af.identity_at_level(A, 1), S)
    recovery = cp.recovery_residuals(rep, cp.recover_generators(rep, S))
    compression = max(
        (cp.star_compression_check(rep, af.LevelElement(2, {g: 1.0}), S) for g in af.level_generators(A, 2)),
        default=0.0,
    )
    hereditary = [af.hereditary_range_check(A, k) for k in range(1, top + 1)]
    injective = [dict(zip(("rank", "generators"), af.alpha_rank(A, k)), level=k) for k in range(1, top + 1)]
    degree_S = pr.pure_degree(S, rep)
    semi = {
        "cuntz_krieger": cp.semi_saturation_check(cp.GradedGeneratorSet.cuntz_krieger(A.n)),
        "crossed_product": cp.semi_saturation_check(cp.GradedGeneratorSet.crossed_product()),
    }
    range_proj = cp.range_projection_residual(rep, S)
    alpha_one = cp.alpha_one_is_SSstar(rep, S)
    result = {
        "L": L,
        "dimension": rep.dim,
        "isometry": sample.isometry,
        "covariance_by_level": covariance,
        "covariance_example": sample,
        "generator_recovery": recovery,
        "star_compression_level2": compression,
        "range_projection_residual": range_proj,
        "alpha_one_minus_SSstar": alpha_one,
        "hereditary_range": hereditary,
        "alpha_injectivity": injective,
        "degree_of_S": degree_S,
        "semi_saturation": semi,
        "divergence_flags": list(cp.DIVERGENCE_FLAGS),
    }
    contracts = [
        at_most("S*S = 1 on lengths 1..L-1", sample.isometry.interior_residual, cp.COVARIANCE_TOL),
        at_most("S a S* = alpha(a) on interior", worst_cov, cp.COVARIANCE_TOL),
        at_most("generator recovery on interior", max(r.interior_residual for r in recovery), cp.COVARIANCE_TOL),
        at_most("S* a S in the level algebras", compression, 1e-8),
        at_most("SS* is a projection", range_proj, pr.RESIDUAL_TOL),
        at_most("alpha(1) = SS*", alpha_one, pr.RESIDUAL_TOL),
        holds("hereditary range at every level", all(h["equal"] for h in hereditary)),
        holds("alpha injective at every level", all(i["rank"] == i["generators"] for i in injective)),
        holds("S has gauge degree 1", degree_S == 1),
        holds("generators semi-saturated", all(v.semi_saturated for v in semi.values())),
    ]
    return result, contracts, ["covariance-relations", "af-core-endomorphism", "generator-recovery", "semi-saturation"], None


def cmd_bimodule(M, args):
    right, left, full = fd.ideal_supports(M)
    dual = fd.dual_partial_map(M)
    residual = fd.imprimitivity_check(M, args.trials, seed=args.seed)
    freeness = fd.topological_freeness_finite(dual, M.base.r)
    result = {
        "blocks": list(M.base.blocks),
        "map": {str(k): v for k, v in M.h.items()},
        "supports": {"right": right, "left": left, "morita_equivalence": full},
        "dual_map": dual,
        "imprimitivity_residual": residual,
        "topological_freeness": freeness,
    }
    contracts = [
        at_most("a<b,c>_R = _L<a,b>c", residual, 1e-12),
        holds("dual map recovers the defining injection", dict(dual.mapping) == dict(M.h)),
    ]
    return result, contracts, ["imprimitivity-condition", "dual-partial-homeomorphism", "topological-freeness"], args.seed


def _trunc_values(text: str) -> list:
    try:
        values = [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise BadInput(f"--trunc: expected integers, got {text!r}") from exc
    if len(values) == 1:
        top = values[0]
        values = sorted(set(range(4, top + 1, 2)) | {top})
    return values


def cmd_uniqueness(A, args):
    Ls = _trunc_values(args.trunc)
    report = ul.agreement_experiment(A, Ls, args.samples, args.seed)
    violation = ul.expectation_contractivity(A, Ls[-1], args.samples, args.seed)
    result = {
        "report": report,
        "gap_table": ul.gap_table(report),
        "expectation_contractivity": {"L": Ls[-1], "max_violation": violation, "tolerance": ul.CONTRACTIVITY_TOL},
    }
    contracts = [at_most("||E_0(b)|| <= ||b||", violation, ul.CONTRACTIVITY_TOL)]
    return result, contracts, ["uniqueness-theorem", "spectral-projections", "condition-I"], args.seed


def cmd_gap_witness(A, args):
    report = ul.norm_gap_witness(A)
    rec = report.experiments[0]
    defect = max(r["relation_defect"] for r in rec["representations"])
    contracts = [
        at_most("both assignments satisfy the relations", defect, 1e-12),
        holds("norms differ", rec["gap"] > 1e-12),
    ]
    return {"report": report}, contracts, ["uniqueness-property", "condition-I"], None


COMMANDS = {
    "validate": cmd_validate,
    "condition-i": cmd_condition_i,
    "bratteli": cmd_bratteli,
    "states": cmd_states,
    "relations": cmd_relations,
    "crossed": cmd_crossed,
    "bimodule": cmd_bimodule,
    "uniqueness": cmd_uniqueness,
    "gap-witness": cmd_gap_witness,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cklab", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="report path (default: standard output)")
    common.add_argument("--quiet", action="store_true", help="suppress the summary on stderr")
    common.add_argument("--timing", action="store_true", help="record wall time (breaks byte-for-byte reproducibility)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(name, help_text, input_help="matrix JSON file"):
        p = sub.add_parser(name, help=help_text, parents=[common])
        p.add_argument("input", help=input_help)
        return p

    add("validate", "check a transition matrix")
    add("condition-i", "decide condition (I)").add_argument("--oracle-depth", type=int)
    add("bratteli", "Bratteli dimensions").add_argument("--levels", type=int, required=True)
    p = add("states", "product-state pullback")
    p.add_argument("--prefix", required=True)
    p.add_argument("--level", type=int, required=True)
    add("relations", "relation residuals").add_argument("--trunc", type=int, required=True)
    add("crossed", "crossed-product checks").add_argument("--trunc", type=int, required=True)
    p = add("bimodule", "Hilbert bimodule checks", "bimodule JSON file")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p = add("uniqueness", "cross-model norm agreement")
    p.add_argument("--trunc", required=True, help="largest L, or a comma-separated list")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, required=True)
    add("gap-witness", "non-uniqueness witness")
    return parser


def _parameters(args) -> dict:
    skip = {"command", "input", "out", "quiet", "timing", "seed"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(text: str, out, quiet: bool, summary: str):
    if out:
        path = Path(out)
        base = os.environ.get("CKLAB_REPORT_DIR")
        if base and not path.is_absolute():
            path = Path(base) / path
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    elif os.environ.get("CKLAB_REPORT_DIR"):
        path = Path(os.environ["CKLAB_REPORT_DIR"])
        path.mkdir(parents=True, exist_ok=True)
        (path / "report.json").write_text(text)
    else:
        sys.stdout.write(text)
    if not quiet:
        print(summary, file=sys.stderr)


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("cklab: error: " + str(UnknownCommand("no command given")), file=sys.stderr)
        return EXIT_INPUT

    start = time.perf_counter()
    raw = b""
    try:
        if args.command == "bimodule":
            data, raw = _load_json(args.input)
            try:
                subject = fd.bimodule_from_dict(data)
            except CKLabError:
                raise
            except (KeyError, TypeError, ValueError) as exc:
                raise BadInput(f"{args.input}: {exc}") from exc
        else:
            subject, raw = _load_matrix(args.input)
        result, contracts, anchors, seed = COMMANDS[args.command](subject, args)
    except CKLabError as exc:
        manifest = RunManifest(args.command, digest(raw), _parameters(args), getattr(args, "seed", None))
        report = {
            "manifest": manifest,
            "status": "input-error",
            "error": {"type": type(exc).__name__, "message": str(exc)},
        }
        _emit(dumps(report), args.out, args.quiet, f"cklab {args.command}: {type(exc).__name__}: {exc}")
        return EXIT_INPUT

    manifest = RunManifest(
        args.command,
        digest(raw),
        _parameters(args),
        seed,
        paper_anchors=anchors,
        wall_time=round(time.perf_counter() - start, 3) if args.timing else None,
    )
    failed = [c for c in contracts if not c.passed]
    report = {
        "manifest": manifest,
        "status": "contract-violation" if failed else "ok",
        "contracts": contracts,
        "result": result,
    }
    summary = f"cklab {args.command}: {len(contracts) - len(failed)}/{len(contracts)} contracts hold"
    if failed:
        summary += "; failed: " + ", ".join(c.name for c in failed)
    _emit(dumps(report), args.out, args.quiet, summary)
    return EXIT_CONTRACT if failed else EXIT_OK


def main(argv=None):
    sys.exit(run(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
