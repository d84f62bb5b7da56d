import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, List, Optional, Sequence

from tqdm import tqdm

from .claims import (
    CLAIM_IDS, DEFAULT_CLAIMS, Outcome, ReportBuilder, basechange_outcomes, canonical_hash, class_sets,
    containment_outcome, cyclic_decomposition_outcome, density_identity_outcomes, h1_oracle_outcomes,
    induced_vanishing_outcome, inflation_restriction_outcome, persistence_outcomes, res_cores_outcomes,
    sha_bound_outcome, smallest_prime,
)
from ..cohomology.modules import GModule, multiplication_module, sign_module, trivial_module
from ..config.settings import settings
from ..errors import CapExceededError, InputError
from ..groups.core import FiniteGroup, Subgroup, full_subgroup, subgroups, trivial_subgroup
from ..groups.presets import build_group, preset_names, unit_modulus
from ..stability.stability import TowerFamily
from ..storage.io import DataIO
from ..storage.schemas import ModuleRecipe, SweepCatalog, SweepReport

logger = logging.getLogger(__name__)


def default_recipes() -> List[ModuleRecipe]:
    recipes = [ModuleRecipe(action="trivial", orders=orders)
               for orders in ([2], [3], [4], [2, 2], [8], [2, 2, 2], [9], [3, 3])]
    recipes += [ModuleRecipe(action="sign", orders=orders) for orders in ([3], [4], [8], [9])]
    recipes.append(ModuleRecipe(action="multiplication"))
    return recipes


def default_catalog(max_order: Optional[int] = None) -> SweepCatalog:
    max_order = max_order or settings.SWEEP_MAX_ORDER
    return SweepCatalog(
        groups=preset_names(max_order),
        module_recipes=default_recipes(),
        max_class_sets=settings.MAX_CLASS_SETS,
    )


def catalog_hash(catalog: SweepCatalog) -> str:
    return canonical_hash(catalog.canonical())


def modules_for(G: FiniteGroup, recipe: ModuleRecipe, max_size: int) -> List[GModule]:
    """Realize a recipe on G; recipes that do not apply (no index-2 subgroup, not a unit group) give nothing."""
    if recipe.action == "trivial":
        modules = [trivial_module(G, recipe.orders)]
    elif recipe.action == "sign":
        modules = [sign_module(G, recipe.orders, K) for K in subgroups(G, "all") if K.index == 2]
    else:
        n = unit_modulus(G)
        modules = [multiplication_module(G, n)] if n else []
    return [A for A in modules if A.size <= max_size]


def tower_family(G: FiniteGroup, policy: str) -> TowerFamily:
    if policy == "all-subgroups":
        return TowerFamily.all_subgroups(G)
    return TowerFamily.of(G, descending_chain(G), top=trivial_subgroup(G))


def descending_chain(G: FiniteGroup) -> List[Subgroup]:
    """G > H_1 > ... > 1, each step a largest proper subgroup (smallest members first)."""
    all_subgroups = subgroups(G, "all")
    chain = [full_subgroup(G)]
    while chain[-1].order > 1:
        current = chain[-1]
        below = [H for H in all_subgroups if H.order < current.order and H.is_subgroup_of(current)]
        chain.append(min(below, key=lambda H: (-H.order, H.members)))
    return chain


def check_caps(catalog: SweepCatalog) -> None:
    """Refuse a catalog before starting when an instance would exceed a size cap."""
    for name in catalog.groups:
        G = build_group(name)
        if G.order > settings.SUBGROUP_CAP:
            raise CapExceededError(f"{name}: order {G.order} exceeds subgroup cap {settings.SUBGROUP_CAP}")
        for recipe in catalog.module_recipes:
            dim = 1 if recipe.action == "multiplication" else len(recipe.orders)
            if G.order * dim > settings.H1_CAP:
                raise CapExceededError(f"{name}: |G| * dim A = {G.order * dim} exceeds H1 cap {settings.H1_CAP}")


def run_group(name: str, catalog: SweepCatalog, claims: Sequence[str]) -> List[Outcome]:
    """Every selected claim on one catalog group, in a fixed order."""
    G = build_group(name)
    wanted = set(claims)
    outcomes: List[Outcome] = []

    if "density-identities" in wanted:
        outcomes += density_identity_outcomes(G)
    if "basechange" in wanted:
        outcomes += basechange_outcomes(G)
    if "persistence-equivalence" in wanted:
        outcomes += persistence_outcomes(G)

    modules: List[GModule] = []
    for recipe in catalog.module_recipes:
        modules += modules_for(G, recipe, catalog.max_module_size)
    T_sets = class_sets(G, catalog.max_class_sets)
    family = tower_family(G, catalog.family_policy)

    if "h1-oracle" in wanted:
        for A in modules:
            outcomes += h1_oracle_outcomes(A)
    if "cyclic-decomposition" in wanted:
        for T in T_sets:
            for p in catalog.primes:
                outcomes.append(cyclic_decomposition_outcome(G, T, p))
    if "containment" in wanted:
        for A in modules:
            for T in T_sets:
                outcomes.append(containment_outcome(G, A, T))
    if "sha-bound" in wanted:
        for T in T_sets:
            for p in catalog.primes:
                for m in catalog.exponents:
                    outcomes.append(sha_bound_outcome(family, T, p, m))
    if "res-cores" in wanted:
        steps = [H for H in family.layers if H.order < G.order]
        for A in modules:
            p = smallest_prime(A.size)
            for H in steps:
                outcomes += res_cores_outcomes(A, H, p)
    if "inflation-restriction" in wanted:
        for A in modules:
            for N in family.layers:
                if N.is_normal and N.is_subgroup_of(A.acting_kernel):
                    outcomes.append(inflation_restriction_outcome(A, N))
    if "induced-vanishing" in wanted:
        for p in catalog.primes:
            outcomes.append(induced_vanishing_outcome(G, p))

    logger.info("%s: %d instances", name, len(outcomes))
    return outcomes


def _run_group_job(args) -> List[Outcome]:
    name, catalog_data, claims = args
    return run_group(name, SweepCatalog(**catalog_data), claims)


class SweepRunner:

    def __init__(self, jobs: Optional[int] = None, show_progress: Optional[bool] = None):
        self.jobs = jobs or settings.JOBS
        self.show_progress = settings.SHOW_PROGRESS if show_progress is None else show_progress

    def run(
        self,
        catalog: SweepCatalog,
        claims: Optional[Sequence[str]] = None,
        out: Optional[str] = None,
    ) -> SweepReport:
        claims = list(claims or DEFAULT_CLAIMS)
        unknown = [c for c in claims if c not in CLAIM_IDS]
        if unknown:
            raise InputError(f"unknown claim ids: {unknown}; known: {list(CLAIM_IDS)}")
        check_caps(catalog)

        start = time.perf_counter()
        builder = ReportBuilder(claims, catalog_hash(catalog))
        jobs = [(name, catalog.canonical(), claims) for name in catalog.groups]
        logger.info("sweeping %d groups for %s with %d worker(s)", len(jobs), claims, self.jobs)

        for outcomes in self._outcomes(jobs):
            builder.extend(outcomes)

        report = builder.build(runtime_seconds=round(time.perf_counter() - start, 3))
        logger.info(
            "sweep done: %d checked, %d vacuous, %d sharp, %d violations",
            report.checked, report.vacuous, len(report.sharp), len(report.violations),
        )
        if out:
            DataIO.save_json(report.body(), out)
        return report

    def _outcomes(self, jobs: List[tuple]) -> Iterable[List[Outcome]]:
        progress = dict(total=len(jobs), desc="sweep", disable=not self.show_progress, ascii=True)
        if self.jobs > 1 and len(jobs) > 1:
            # map() keeps catalog order whatever order the workers finish in
            with ProcessPoolExecutor(max_workers=self.jobs) as executor:
                yield from tqdm(executor.map(_run_group_job, jobs), **progress)
        else:
            for job in tqdm(jobs, **progress):
                yield _run_group_job(job)


# Global instances
sweep_runner = SweepRunner()


# Convenience functions
def sweep(
    catalog: SweepCatalog,
    claims: Optional[Sequence[str]] = None,
    jobs: Optional[int] = None,
    out: Optional[str] = None,
) -> SweepReport:
    runner = sweep_runner if jobs is None else SweepRunner(jobs=jobs)
    return runner.run(catalog, claims, out)


def catalog_for(groups: Sequence[str], recipes: Optional[Sequence[ModuleRecipe]] = None, **options) -> SweepCatalog:
    return SweepCatalog(groups=list(groups), module_recipes=list(recipes or default_recipes()), **options)

