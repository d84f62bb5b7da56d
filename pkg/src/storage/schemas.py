from fractions import Fraction
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator


class PermSpec(BaseModel):

    degree: int = Field(..., ge=1, description="Number of points permuted (0-based)")
    gens: List[List[int]] = Field(..., description="Generators in array form: gens[k][i] is the image of i")


class GroupSpec(BaseModel):

    preset: Optional[str] = Field(None, description="Preset name, e.g. 'S3', '(Z/8)*' or 'Z/2 x S3'")
    cayley: Optional[List[List[int]]] = Field(None, description="Full multiplication table, row g column h holds g*h")
    perm: Optional[PermSpec] = Field(None, description="Permutation generators with degree")
    labels: Optional[List[str]] = Field(None, description="Element labels for a Cayley table")

    @model_validator(mode="after")
    def exactly_one_source(self) -> "GroupSpec":
        given = [name for name in ("preset", "cayley", "perm") if getattr(self, name) is not None]
        if len(given) != 1:
            raise ValueError(f"group spec needs exactly one of preset/cayley/perm, got {given or 'none'}")
        return self

    def canonical(self) -> Dict[str, Any]:
        return self.model_dump(exclude_none=True)


class RationalPayload(BaseModel):

    num: int = Field(..., description="Numerator")
    den: int = Field(..., gt=0, description="Denominator (positive, reduced)")

    @classmethod
    def from_fraction(cls, value: Fraction) -> "RationalPayload":
        value = Fraction(value)
        return cls(num=value.numerator, den=value.denominator)

    def to_fraction(self) -> Fraction:
        return Fraction(self.num, self.den)


class ClassSetPayload(BaseModel):

    ambient: GroupSpec = Field(..., description="Ambient group")
    classes: List[int] = Field(default_factory=list, description="Conjugacy class indices")
    label: str = Field(default="", description="Free-form name of the prime set")


class SubgroupSpec(BaseModel):

    generators: List[int] = Field(default_factory=list, description="Element indices generating the subgroup")


class ActionSpec(BaseModel):

    kind: Optional[str] = Field(
        None, description="trivial | gens | all | sign | multiplication (inferred from gens when omitted)"
    )
    gens: Optional[Dict[str, List[List[int]]]] = Field(
        None, description="Action matrices keyed by element index (as text)"
    )
    kernel: Optional[List[int]] = Field(
        None, description="Generators of the index-2 kernel of a sign action"
    )

    @model_validator(mode="after")
    def infer_kind(self) -> "ActionSpec":
        if self.kind is None:
            self.kind = "gens" if self.gens is not None else "trivial"
        if self.kind not in ("trivial", "gens", "all", "sign", "multiplication"):
            raise ValueError(f"unknown action kind: {self.kind}")
        if self.kind in ("gens", "all") and self.gens is None:
            raise ValueError(f"action kind '{self.kind}' needs matrices under 'gens'")
        if self.kind == "sign" and self.kernel is None:
            raise ValueError("sign action needs 'kernel'")
        return self


class ModulePayload(BaseModel):

    group: GroupSpec = Field(..., description="Acting group")
    orders: List[int] = Field(..., description="Cyclic factor orders of A")
    action: ActionSpec = Field(default_factory=ActionSpec, description="How the group acts")


class H1Payload(BaseModel):

    factors: List[int] = Field(..., description="Invariant factors")
    order: int = Field(..., description="Product of the invariant factors")
    generators: List[List[List[int]]] = Field(
        default_factory=list, description="Representative cocycles, one vector per group element"
    )


class AbelianGroupPayload(BaseModel):

    factors: List[int] = Field(..., description="Invariant factors")
    order: int = Field(..., description="Group order")
    generators: List[List[int]] = Field(default_factory=list, description="Generators as coordinate vectors")


class WitnessPayload(BaseModel):

    subset: List[int] = Field(..., description="Class indices of S0")
    subset_label: str = Field(default="", description="Name of S0")
    stabilizing_layer: List[int] = Field(..., description="Members of the stabilizing layer L0")
    bound_a: RationalPayload = Field(..., description="Lower bound a")
    lam: RationalPayload = Field(..., description="Window factor lambda")


class VerdictPayload(BaseModel):

    persistent: bool = Field(..., description="Whether the set is persistent")
    constant_density: RationalPayload = Field(..., description="Density from the persisting layer on")
    witness_subgroup: List[int] = Field(..., description="Members of the subgroup W")


class OrbitReport(BaseModel):

    sigma: int = Field(..., description="Element of the normal subgroup")
    orbit: List[int] = Field(..., description="Indices of N-classes in the orbit of C(sigma; N)")
    orbit_classes: List[List[int]] = Field(..., description="Members of each class in the orbit")
    orbit_length: int = Field(..., description="Number of classes in the orbit")
    stabilizer_order: int = Field(..., description="Order of the stabilizer in G/N")
    stabilizer_index: int = Field(..., description="Index of the stabilizer in G/N")
    nontrivial_orbit: bool = Field(..., description="True when the orbit has more than one class")


class ModuleRecipe(BaseModel):

    action: str = Field(..., description="trivial | sign | multiplication")
    orders: List[int] = Field(default_factory=list, description="Cyclic factor orders (unused for multiplication)")

    @model_validator(mode="after")
    def check_action(self) -> "ModuleRecipe":
        if self.action not in ("trivial", "sign", "multiplication"):
            raise ValueError(f"unknown module recipe action: {self.action}")
        if self.action != "multiplication" and not self.orders:
            raise ValueError(f"recipe '{self.action}' needs orders")
        return self


class SweepCatalog(BaseModel):

    groups: List[str] = Field(default_factory=list, description="Preset names, in sweep order")
    module_recipes: List[ModuleRecipe] = Field(default_factory=list, description="Coefficient modules per group")
    family_policy: str = Field(default="all-subgroups", description="all-subgroups | chain")
    primes: List[int] = Field(default_factory=lambda: [2, 3], description="Primes p for stability hypotheses")
    exponents: List[int] = Field(default_factory=lambda: [1, 2], description="m for the p^m bound on Sha")
    max_class_sets: int = Field(default=32, description="Cap on class subsets T tried per group")
    max_module_size: int = Field(default=16, description="Cap on |A|")

    @model_validator(mode="after")
    def check_policy(self) -> "SweepCatalog":
        if self.family_policy not in ("all-subgroups", "chain"):
            raise ValueError(f"unknown family policy: {self.family_policy}")
        return self

    def canonical(self) -> Dict[str, Any]:
        return self.model_dump()


class Violation(BaseModel):

    instance_id: str = Field(..., description="Hash of the canonical instance JSON")
    claim: str = Field(..., description="Claim id")
    data: Dict[str, Any] = Field(default_factory=dict, description="Witness data for the failure")


class ClaimSummary(BaseModel):

    checked: int = Field(default=0, description="Instances whose hypothesis held")
    vacuous: int = Field(default=0, description="Instances whose hypothesis failed")
    sharp: int = Field(default=0, description="Vacuous instances whose conclusion also failed")
    violations: int = Field(default=0, description="Instances where the conclusion failed")


class SweepReport(BaseModel):

    catalog_hash: str = Field(..., description="Hash of the canonical catalog JSON")
    claims: List[str] = Field(..., description="Claim ids that were run")
    checked: int = Field(default=0, description="Non-vacuous instances checked")
    vacuous: int = Field(default=0, description="Instances skipped because the hypothesis failed")
    sharp: List[Violation] = Field(default_factory=list, description="Vacuous instances whose conclusion fails")
    violations: List[Violation] = Field(default_factory=list, description="Failures among checked instances")
    per_claim: Dict[str, ClaimSummary] = Field(default_factory=dict, description="Breakdown per claim")
    passed: bool = Field(default=True, description="True exactly when there are no violations")
    runtime_seconds: float = Field(default=0.0, description="Wall-clock time, excluded from the report body")

    def body(self) -> Dict[str, Any]:
        return self.model_dump(exclude={"runtime_seconds"})


class EmpiricalEstimate(BaseModel):

    modulus: int = Field(..., description="Modulus n")
    bound: int = Field(..., description="Sieve bound X")
    weighting: str = Field(..., description="uniform or induced")
    target: List[int] = Field(..., description="Target residues")
    subgroup: Optional[List[int]] = Field(None, description="Residues of U for induced weighting")
    counts: Dict[str, int] = Field(..., description="Prime counts per unit residue")
    total: int = Field(..., description="Primes <= X not dividing n")
    frequencies: Dict[str, float] = Field(..., description="Per-residue frequencies")
    estimate: float = Field(..., description="Empirical density of the target")
    theoretical: Optional[RationalPayload] = Field(None, description="Exact density from the group model")
    abs_error: Optional[float] = Field(None, description="|estimate - theoretical|")


class ComparisonReport(BaseModel):

    modulus: int = Field(..., description="Modulus n")
    bound: int = Field(..., description="Sieve bound X")
    subgroup: List[int] = Field(..., description="Residues of U")
    classes: List[int] = Field(..., description="Residues of S")
    exact: RationalPayload = Field(..., description="pullback_density(S, U)")
    empirical: float = Field(..., description="Weighted empirical estimate")
    abs_error: float = Field(..., description="|empirical - exact|")
    pm_exact: Dict[str, RationalPayload] = Field(..., description="Exact P_m densities keyed by m")
    pm_empirical: Dict[str, float] = Field(..., description="Empirical P_m frequencies keyed by m")


class ScenarioBundle(BaseModel):

    name: str = Field(..., description="Scenario name")
    description: str = Field(..., description="What the scenario realizes")
    groups: Dict[str, GroupSpec] = Field(..., description="Named groups used by the scenario")
    sigma: int = Field(..., description="Element sigma of Gbar")
    witness_subgroup: List[int] = Field(..., description="Members of W")
    class_sets: Dict[str, List[int]] = Field(default_factory=dict, description="Named class sets")
    expected: Dict[str, Any] = Field(default_factory=dict, description="Expected verdicts")
    computed: Dict[str, Any] = Field(default_factory=dict, description="Verdicts computed at group level")
    assumptions: List[str] = Field(default_factory=list, description="Arithmetic hypotheses taken on trust")
    arithmetic: Optional[Dict[str, Any]] = Field(None, description="Cyclotomic realization, when abelian")


class RunMetadata(BaseModel):

    command: List[str] = Field(..., description="argv of the run")
    seed: Optional[int] = Field(None, description="Recorded --seed value")
    jobs: int = Field(default=1, description="Worker cap")
    started_at: str = Field(..., description="ISO timestamp")
    runtime_seconds: float = Field(..., description="Wall-clock time")
