import argparse
import json
import logging
import sys
import time
from datetime import datetime
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

from pydantic import BaseModel, ValidationError

from .cohomology.cohomology import LocalFamily, cohomology_engine
from .cohomology.modules import GModule, module_from_payload, multiplication_module, sign_module, trivial_module
from .config.settings import settings
from .cyclotomic.lab import CyclotomicLab
from .cyclotomic.scenarios import scenario_catalog, scenario_names
from .cyclotomic.sieve import PrimeSieve
from .density.densities import (
    ClassSet, basechange_density, induced_character, pm_partition, pullback_density,
)
from .errors import CapExceededError, InputError, StableLabError
from .groups.core import FiniteGroup, Subgroup, quotient, subgroup_generated, subgroups
from .groups.presets import build_group, unit_modulus
from .stability.stability import (
    TowerFamily, dagger_membership, orbit_set_scenario, persistence_verdict, stability_witness,
    uniform_lower_bound,
)
from .storage.io import DataIO, DataPaths
from .storage.schemas import (
    ClassSetPayload, ComparisonReport, EmpiricalEstimate, GroupSpec, ModulePayload, RationalPayload,
    RunMetadata, SubgroupSpec, SweepReport, VerdictPayload, WitnessPayload,
)
from .verifier.claims import CLAIM_IDS, DEFAULT_CLAIMS
from .verifier.sweep import catalog_for, default_catalog, sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VIOLATIONS = 2
EXIT_CAPS = 3


class UsageExit(Exception):
    pass


class StableLabParser(argparse.ArgumentParser):
    """Usage errors exit with code 1 instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise UsageExit(message)


# Argument parsing helpers

def _int_list(text: Optional[str]) -> List[int]:
    if not text:
        return []
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {text!r}")


LABEL_PREFIX = "label:"


def _element(G: FiniteGroup, token: Optional[str]) -> int:
    """An element index, or a label written as `label:<name>`."""
    if token is None:
        raise InputError("an element is required: pass --sigma")
    token = token.strip()
    if token.startswith(LABEL_PREFIX):
        label = token[len(LABEL_PREFIX):]
        if label not in G.labels:
            raise InputError(f"{label!r} is not a label of {G.describe()}")
        return G.labels.index(label)
    try:
        index = int(token)
    except ValueError:
        raise InputError(f"{token!r} is not an element index; write labels as {LABEL_PREFIX}<name>")
    return G.check_element(index)


def _elements(G: FiniteGroup, text: Optional[str]) -> List[int]:
    if not text:
        return []
    return [_element(G, part) for part in text.split(",") if part.strip()]


def load_group(args) -> FiniteGroup:
    if getattr(args, "group_file", None):
        return build_group(DataIO.load_model(args.group_file, GroupSpec))
    if getattr(args, "group", None):
        return build_group(args.group)
    raise InputError("a group is required: pass --group or --group-file")


def load_subgroup(G: FiniteGroup, args, required: bool = True) -> Optional[Subgroup]:
    if getattr(args, "subgroup_file", None):
        data = DataIO.load_json(args.subgroup_file)
        spec = SubgroupSpec(generators=data) if isinstance(data, list) else SubgroupSpec(**data)
        return subgroup_generated(G, [G.check_element(g) for g in spec.generators])
    if getattr(args, "subgroup", None) is not None:
        return subgroup_generated(G, _elements(G, args.subgroup))
    if required:
        raise InputError("a subgroup is required: pass --subgroup or --subgroup-file")
    return None


def load_normal(G: FiniteGroup, args) -> Subgroup:
    if args.normal is None:
        raise InputError("a normal subgroup is required: pass --normal")
    return subgroup_generated(G, _elements(G, args.normal))


def load_classes(G: FiniteGroup, args) -> ClassSet:
    if getattr(args, "classes_file", None):
        payload = DataIO.load_model(args.classes_file, ClassSetPayload)
        if build_group(payload.ambient) != G:
            raise InputError("class set file describes a different ambient group")
        return ClassSet.of(G, payload.classes, label=payload.label or "S")
    if args.classes is None:
        raise InputError("a class set is required: pass --classes or --classes-file")
    return ClassSet.of(G, _int_list(args.classes), label="S")


def load_module(args) -> GModule:
    if args.module_file:
        return module_from_payload(DataIO.load_model(args.module_file, ModulePayload))
    G = load_group(args)
    orders = _int_list(args.orders)
    if args.module_action == "multiplication":
        n = orders[0] if orders else unit_modulus(G)
        if n is None:
            raise InputError("multiplication action needs --orders n or a (Z/n)* group")
        return multiplication_module(G, n)
    if not orders:
        raise InputError("a module is required: pass --module-file or --orders")
    if args.module_action == "sign":
        kernels = [K for K in subgroups(G, "all") if K.index == 2]
        if args.kernel:
            return sign_module(G, orders, subgroup_generated(G, _elements(G, args.kernel)))
        if not kernels:
            raise InputError(f"{G.describe()} has no index-2 subgroup for a sign action")
        return sign_module(G, orders, kernels[0])
    return trivial_module(G, orders)


def load_family(G: FiniteGroup, args) -> TowerFamily:
    if args.family == "two-step":
        return TowerFamily.two_step(G)
    if args.family == "above":
        return TowerFamily.above(G, subgroup_generated(G, _elements(G, args.top)))
    return TowerFamily.all_subgroups(G)


def _rational(value: Optional[Fraction]) -> Optional[Dict[str, int]]:
    return None if value is None else RationalPayload.from_fraction(value).model_dump()


# Subcommand handlers

def run_group(args) -> Dict[str, Any]:
    G = load_group(args)
    result = {
        "name": G.describe(),
        "order": G.order,
        "abelian": G.is_abelian,
        "labels": list(G.labels),
        "element_orders": list(G.element_orders),
        "classes": [
            {"representative": c.representative, "size": c.size, "members": list(c.members)}
            for c in G.conjugacy_classes
        ],
    }
    if args.subgroups:
        found = subgroups(G, args.subgroups, args.p)
        result["subgroups"] = [list(H.members) for H in found]
    return result


def run_density(args) -> Any:
    G = load_group(args)
    if args.action == "mh":
        H = load_subgroup(G, args)
        return {"values": list(induced_character(G, H).values)}
    if args.action == "pm":
        H = load_subgroup(G, args)
        return {str(m): _rational(v) for m, v in pm_partition(G, H).items()}
    if args.action == "pullback":
        return _rational(pullback_density(load_classes(G, args), load_subgroup(G, args)))
    return _rational(basechange_density(G, _element(G, args.sigma), load_subgroup(G, args)))


def run_stability(args) -> Any:
    G = load_group(args)
    if args.action == "persistent":
        verdict = persistence_verdict(G, _element(G, args.sigma), load_subgroup(G, args))
        return VerdictPayload(
            persistent=verdict.persistent,
            constant_density=RationalPayload.from_fraction(verdict.constant_density),
            witness_subgroup=list(verdict.witness_subgroup.members),
        )
    if args.action == "dagger":
        return {"member": dagger_membership(G, _element(G, args.sigma), load_subgroup(G, args))}
    if args.action == "orbit":
        return orbit_set_scenario(G, load_normal(G, args), _element(G, args.sigma))

    S = load_classes(G, args)
    family = load_family(G, args)
    if args.action == "bound":
        return {"bound": _rational(uniform_lower_bound(S, family))}

    try:
        lam = Fraction(args.lam)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"lambda must be a rational number, got {args.lam!r}")
    at_layer = load_subgroup(G, args, required=False)
    witness = stability_witness(S, family, lam, powerset=args.powerset, at_layer=at_layer)
    if witness is None:
        return {"witness": None}
    return {
        "witness": WitnessPayload(
            subset=list(witness.subset.classes),
            subset_label=witness.subset.label,
            stabilizing_layer=list(witness.stabilizing_layer.members),
            bound_a=RationalPayload.from_fraction(witness.bound_a),
            lam=RationalPayload.from_fraction(witness.lam),
        ).model_dump()
    }


def run_cohom(args) -> Any:
    A = load_module(args)
    G = A.group
    engine = cohomology_engine
    if args.action == "h0":
        return engine.h0(A).to_payload()
    if args.action == "h1":
        return engine.h1(A).to_payload()
    if args.action == "h2":
        return engine.h2(A).to_payload()
    if args.action == "h1star":
        return engine.h1_star(A).to_payload()
    if args.action in ("sha1", "coker1"):
        T = LocalFamily.from_classes(G, load_classes(G, args), multiplicity=args.multiplicity)
        if args.action == "sha1":
            return engine.sha1(A, T).to_payload()
        return engine.coker1(A, T).to_payload()

    # map: pick the source class by its H^1 coordinates
    coords = _int_list(args.coords)
    if args.kind == "res":
        source = engine.h1(A)
        image = engine.map_h1("res", source.cocycle_of(coords), subgroup=load_subgroup(G, args))
    elif args.kind == "cores":
        H = load_subgroup(G, args)
        source = engine.h1(engine.restricted(A, H))
        image = engine.map_h1("cores", source.cocycle_of(coords), subgroup=H, module=A)
    else:
        q = quotient(G, load_normal(G, args))
        source = engine.h1(A.descend(q))
        image = engine.map_h1("inf", source.cocycle_of(coords), quotient_map=q, module=A)
    return {"target": image.target.to_payload(), "coordinates": image.coordinates}


def run_verify(args) -> SweepReport:
    claims = [c.strip() for c in args.claims.split(",")] if args.claims else list(DEFAULT_CLAIMS)
    options = {}
    if args.primes:
        options["primes"] = _int_list(args.primes)
    if args.exponents:
        options["exponents"] = _int_list(args.exponents)
    if args.family_policy:
        options["family_policy"] = args.family_policy
    if args.groups:
        catalog = catalog_for(args.groups, **options)
    else:
        catalog = default_catalog(args.max_order).model_copy(update=options)
    return sweep(catalog, claims, jobs=args.jobs)


def run_cyclo(args) -> Any:
    lab = CyclotomicLab(PrimeSieve(workers=args.jobs))
    if args.action == "scenario":
        return scenario_catalog(args.name, args.bound)
    if args.action == "estimate":
        subgroup = _int_list(args.subgroup) if args.subgroup is not None else None
        weighting = "induced" if subgroup is not None else "uniform"
        return lab.empirical_density(args.modulus, _int_list(args.residues), args.bound, weighting, subgroup)
    return lab.compare_theoretical(args.modulus, _int_list(args.subgroup), _int_list(args.residues), args.bound)


HANDLERS = {
    "group": run_group,
    "density": run_density,
    "stability": run_stability,
    "cohom": run_cohom,
    "verify": run_verify,
    "cyclo": run_cyclo,
}


# Output

def csv_rows(result: Any) -> List[Dict[str, Any]]:
    """Flatten a result into summary rows for CSV output."""
    if isinstance(result, SweepReport):
        return [{"claim": claim, **summary.model_dump()} for claim, summary in result.per_claim.items()]
    if isinstance(result, EmpiricalEstimate):
        theoretical = result.theoretical.to_fraction() if result.theoretical else None
        return [{
            "modulus": result.modulus,
            "bound": result.bound,
            "weighting": result.weighting,
            "total": result.total,
            "empirical": result.estimate,
            "exact": str(theoretical) if theoretical is not None else "",
            "exact_float": float(theoretical) if theoretical is not None else None,
            "abs_error": result.abs_error,
        }]
    if isinstance(result, ComparisonReport):
        return [
            {
                "m": int(m),
                "pm_exact": str(exact.to_fraction()),
                "pm_empirical": result.pm_empirical.get(m, 0.0),
                "exact": str(result.exact.to_fraction()),
                "empirical": result.empirical,
                "abs_error": result.abs_error,
            }
            for m, exact in result.pm_exact.items()
        ]
    if isinstance(result, BaseModel):
        result = result.model_dump()
    if isinstance(result, list):
        return [row if isinstance(row, dict) else {"value": row} for row in result]
    if isinstance(result, dict):
        return [{k: v if isinstance(v, (int, float, str, bool)) or v is None else json.dumps(v, sort_keys=True)
                 for k, v in result.items()}]
    return [{"value": result}]


def default_out(result: Any) -> Optional[str]:
    if isinstance(result, SweepReport):
        return DataPaths.sweep_report(result.catalog_hash)
    if isinstance(result, (EmpiricalEstimate, ComparisonReport)):
        return DataPaths.estimate_report(result.modulus, result.bound)
    return None


def emit_report(result: Any, fmt: str = "json", out: Optional[str] = None) -> str:
    """Write the result to `out` or stdout; the body is byte-deterministic."""
    body = result.body() if isinstance(result, SweepReport) else result
    if fmt == "csv":
        text = DataIO.to_csv(csv_rows(result))
    else:
        text = DataIO.dumps(body)
    if out:
        try:
            if fmt == "csv":
                DataIO.save_csv(csv_rows(result), out)
            else:
                DataIO.save_json(body, out)
        except OSError as e:
            raise InputError(f"cannot write {out}: {e}")
    else:
        sys.stdout.write(text)
    return text


def _add_common(parser: argparse.ArgumentParser, top_level: bool) -> None:
    def default(value):
        # Subparsers suppress defaults so values given before the subcommand survive
        return value if top_level else argparse.SUPPRESS

    parser.add_argument('--out', default=default(None), help='Write the report here instead of stdout')
    parser.add_argument('--save', action='store_true', default=default(False),
                        help='Without --out, write sweeps and estimates under the reports directory')
    parser.add_argument('--format', choices=['json', 'csv'], default=default('json'), help='Report format')
    parser.add_argument('--jobs', type=int, default=default(settings.JOBS), help='Worker cap for sweeps and the sieve')
    parser.add_argument('--seed', type=int, default=default(None), help='Recorded in run metadata; runs are deterministic')
    parser.add_argument('--log-level', default=default(settings.LOG_LEVEL), help='Logging level on stderr')


def _add_group_inputs(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--group', help="Group preset, e.g. 'S3', '(Z/8)*', 'Z/2 x S3'")
    parser.add_argument('--group-file', help='Group spec JSON file')


def _add_subgroup_inputs(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--subgroup', help='Comma-separated generator indices (labels as label:<name>)')
    parser.add_argument('--subgroup-file', help='JSON list of generators or {"generators": [...]}')


def _add_module_inputs(parser: argparse.ArgumentParser) -> None:
    _add_group_inputs(parser)
    parser.add_argument('--module-file', help='Module payload JSON file')
    parser.add_argument('--orders', help='Comma-separated cyclic factor orders of A')
    parser.add_argument('--module-action', choices=['trivial', 'sign', 'multiplication'], default='trivial',
                        help='Action for --orders modules')
    parser.add_argument('--kernel', help='Generators of the index-2 kernel of a sign action')


def create_cli() -> argparse.ArgumentParser:
    parser = StableLabParser(
        prog="stablelab",
        description="Chebotarev densities, stable prime sets and finite Galois cohomology",
    )
    _add_common(parser, top_level=True)
    commands = parser.add_subparsers(dest='command', required=True, parser_class=StableLabParser)

    group = commands.add_parser('group', help='Describe a group')
    _add_common(group, top_level=False)
    _add_group_inputs(group)
    group.add_argument('--subgroups', choices=['all', 'cyclic', 'cyclic-p'], help='Also list subgroups')
    group.add_argument('--p', type=int, help='Prime for cyclic-p')

    density = commands.add_parser('density', help='Induced characters and densities')
    _add_common(density, top_level=False)
    density.add_argument('action', choices=['mh', 'pm', 'pullback', 'basechange'])
    _add_group_inputs(density)
    _add_subgroup_inputs(density)
    density.add_argument('--classes', help='Comma-separated conjugacy class indices')
    density.add_argument('--classes-file', help='ClassSetPayload JSON file')
    density.add_argument('--sigma', help='Element index (label as label:<name>)')

    stability = commands.add_parser('stability', help='Stability and persistence predicates')
    _add_common(stability, top_level=False)
    stability.add_argument('action', choices=['persistent', 'witness', 'bound', 'dagger', 'orbit'])
    _add_group_inputs(stability)
    _add_subgroup_inputs(stability)
    stability.add_argument('--classes', help='Comma-separated conjugacy class indices')
    stability.add_argument('--classes-file', help='ClassSetPayload JSON file')
    stability.add_argument('--sigma', help='Element index (label as label:<name>)')
    stability.add_argument('--normal', help='Generators of a normal subgroup')
    stability.add_argument('--lam', default='2', help='Window factor lambda, e.g. 2 or 5/2')
    stability.add_argument('--family', choices=['all', 'two-step', 'above'], default='all', help='Tower family')
    stability.add_argument('--top', help="Generators of the tower's top subgroup for --family above")
    stability.add_argument('--powerset', action='store_true', help='Search every subset of the classes')

    cohom = commands.add_parser('cohom', help='Cohomology of finite modules')
    _add_common(cohom, top_level=False)
    cohom.add_argument('action', choices=['h0', 'h1', 'h2', 'h1star', 'sha1', 'coker1', 'map'])
    _add_module_inputs(cohom)
    _add_subgroup_inputs(cohom)
    cohom.add_argument('--classes', help='Class indices of T for sha1/coker1')
    cohom.add_argument('--classes-file', help='ClassSetPayload JSON file')
    cohom.add_argument('--multiplicity', type=int, default=1, help='Primes per cyclic local subgroup')
    cohom.add_argument('--kind', choices=['res', 'inf', 'cores'], default='res', help='Map for cohom map')
    cohom.add_argument('--normal', help='Generators of N for inflation from G/N')
    cohom.add_argument('--coords', help='H^1 coordinates of the source class')

    verify = commands.add_parser('verify', help='Sweep the claim catalog')
    _add_common(verify, top_level=False)
    verify.add_argument('--claims', help=f"Comma-separated claim ids out of {', '.join(CLAIM_IDS)}")
    verify.add_argument('--max-order', type=int, help='Largest preset order in the default catalog')
    verify.add_argument('--groups', nargs='+', help='Preset names instead of the default catalog')
    verify.add_argument('--primes', help='Comma-separated primes')
    verify.add_argument('--exponents', help='Comma-separated exponents m')
    verify.add_argument('--family-policy', choices=['all-subgroups', 'chain'])

    cyclo = commands.add_parser('cyclo', help='Cyclotomic Frobenius statistics')
    _add_common(cyclo, top_level=False)
    cyclo.add_argument('action', choices=['estimate', 'compare', 'scenario'])
    cyclo.add_argument('name', nargs='?', help=f"Scenario name: {', '.join(scenario_names())}")
    cyclo.add_argument('--modulus', type=int, help='Modulus n')
    cyclo.add_argument('--residues', help='Comma-separated target residues')
    cyclo.add_argument('--subgroup', help='Comma-separated residues generating U')
    cyclo.add_argument('--bound', type=int, default=1_000_000, help='Sieve bound X')

    return parser


def _check_cyclo_args(args) -> None:
    if args.command != "cyclo":
        return
    if args.action == "scenario" and not args.name:
        raise InputError("cyclo scenario needs a scenario name")
    if args.action != "scenario" and (args.modulus is None or args.residues is None):
        raise InputError(f"cyclo {args.action} needs --modulus and --residues")


def _fail(error: Exception) -> None:
    sys.stderr.write(json.dumps({"error": type(error).__name__, "message": str(error)}, sort_keys=True) + "\n")


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = create_cli()
    try:
        args = parser.parse_args(argv)
    except UsageExit:
        return EXIT_USAGE
    except SystemExit as e:
        return int(e.code or 0)

    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    problems = settings.validate()
    if problems:
        _fail(StableLabError("; ".join(problems)))
        return EXIT_USAGE

    started_at = datetime.now().isoformat(timespec="seconds")
    start = time.perf_counter()
    try:
        _check_cyclo_args(args)
        result = HANDLERS[args.command](args)
        out = args.out or (default_out(result) if args.save else None)
        emit_report(result, args.format, out)
    except CapExceededError as e:
        _fail(e)
        return EXIT_CAPS
    except (StableLabError, ValidationError, json.JSONDecodeError) as e:
        _fail(e)
        return EXIT_USAGE

    if out:
        DataIO.save_metadata(
            RunMetadata(
                command=argv,
                seed=args.seed,
                jobs=args.jobs,
                started_at=started_at,
                runtime_seconds=round(time.perf_counter() - start, 3),
            ),
            out,
        )
    if isinstance(result, SweepReport) and result.violations:
        return EXIT_VIOLATIONS
    return EXIT_OK


def main():
    sys.exit(dispatch())


if __name__ == '__main__':
    main()
