from fractions import Fraction

import numpy as np
import pytest
from sympy import primerange, totient

from src.cyclotomic.lab import (
    CyclotomicContext, CyclotomicLab, compare_theoretical, empirical_density, frobenius_cyclotomic,
    pm_frequencies, relative_density,
)
from src.cyclotomic.scenarios import scenario_catalog, scenario_names
from src.cyclotomic.sieve import PrimeSieve, prime_counts, primes_upto, residue_counts, simple_sieve
from src.errors import InputError, RamifiedPrimeError, UnknownScenarioError

X = 10 ** 6


def test_prime_counting():
    assert prime_counts(10) == 4
    assert prime_counts(2) == 1
    assert prime_counts(1) == 0
    assert prime_counts(X) == 78498


def test_simple_sieve():
    assert simple_sieve(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


@pytest.mark.parametrize("segment_size, workers", [(7, 1), (50, 3), (1 << 18, 1)])
def test_segments_match_trial_division(segment_size, workers):
    sieve = PrimeSieve(segment_size=segment_size, workers=workers)
    assert sieve.primes(10_000).tolist() == list(primerange(2, 10_001))


def test_residue_counts_do_not_depend_on_segmentation():
    small = PrimeSieve(segment_size=1000, workers=4).residue_counts(12, 100_000)
    large = PrimeSieve(segment_size=100_000, workers=1).residue_counts(12, 100_000)
    assert np.array_equal(small, large)
    assert int(small.sum()) == len(primes_upto(100_000))
    assert small[2] == 1 and small[3] == 1


def test_frobenius_is_residue():
    assert frobenius_cyclotomic(8, 17) == 1
    assert frobenius_cyclotomic(8, 3) == 3
    with pytest.raises(RamifiedPrimeError):
        frobenius_cyclotomic(8, 2)
    with pytest.raises(InputError):
        frobenius_cyclotomic(8, 9)


def test_context():
    ctx = CyclotomicContext.of(8)
    assert ctx.residues == (1, 3, 5, 7)
    assert ctx.element_of(11) == 1
    assert ctx.subgroup([7]).order == 2
    assert ctx.subgroup([]).order == 1
    with pytest.raises(InputError):
        ctx.element_of(2)
    with pytest.raises(InputError):
        CyclotomicContext.of(2)


def test_uniform_density_mod_5():
    estimate = empirical_density(5, [1], X)
    assert estimate.theoretical.to_fraction() == Fraction(1, 4)
    assert abs(estimate.estimate - 0.25) < 0.01
    assert estimate.total == prime_counts(X) - 1


def test_uniform_density_mod_8():
    estimate = empirical_density(8, [1], X)
    assert estimate.theoretical.to_fraction() == Fraction(1, 4)
    assert abs(estimate.estimate - 0.25) < 0.01
    assert estimate.total == prime_counts(X) - 1


def test_induced_density_mod_7():
    estimate = empirical_density(7, [6], X, weighting="induced", subgroup=[1, 6])
    assert estimate.theoretical.to_fraction() == Fraction(1, 2)
    assert abs(estimate.estimate - 0.5) < 0.02
    assert estimate.subgroup == [1, 6]


def test_induced_error_shrinks_with_the_bound():
    errors = [
        empirical_density(7, [6], bound, weighting="induced", subgroup=[1, 6]).abs_error
        for bound in (10_000, 100_000, 1_000_000)
    ]
    assert all(err < 0.05 for err in errors)
    assert errors[-1] < errors[0]


def test_all_units_have_density_one():
    assert empirical_density(12, [1, 5, 7, 11], X).estimate == 1.0


def test_bad_inputs():
    with pytest.raises(InputError):
        empirical_density(5, [1], 100)
    with pytest.raises(InputError):
        empirical_density(5, [], X)
    with pytest.raises(InputError):
        empirical_density(5, [1], X, weighting="log")
    with pytest.raises(InputError):
        relative_density(9, [2], [1, 4, 7], X)


def test_pm_frequencies_mod_7():
    frequencies = pm_frequencies(7, [1, 6], X)
    assert set(frequencies) == {0, 3}
    assert abs(frequencies[3] - 1 / 3) < 0.01
    assert abs(sum(frequencies.values()) - 1) < 1e-9


def test_compare_theoretical():
    report = compare_theoretical(7, [6], [6], X)
    assert report.exact.to_fraction() == Fraction(1, 2)
    assert report.abs_error < 0.02
    assert {m: p.to_fraction() for m, p in report.pm_exact.items()} == {"0": Fraction(2, 3), "3": Fraction(1, 3)}
    assert set(report.pm_empirical) == set(report.pm_exact)


@pytest.mark.parametrize("n", range(3, 25))
def test_primes_equidistribute_over_units(n):
    counts = residue_counts(n, X)
    units = [r for r in range(n) if np.gcd(r, n) == 1]
    total = int(sum(counts[r] for r in units))
    for r in units:
        assert abs(counts[r] / total - 1 / int(totient(n))) < 0.01


def test_split_primes_in_mu9_over_mu3():
    assert abs(relative_density(9, [1], [1, 4, 7], X) - 1 / 3) < 0.02


def test_lab_with_own_sieve():
    lab = CyclotomicLab(PrimeSieve(segment_size=4096, workers=2))
    assert lab.empirical_density(4, [3], 100_000).total == prime_counts(100_000) - 1


@pytest.mark.parametrize("name", scenario_names())
def test_scenarios_match_expectations(name):
    bundle = scenario_catalog(name, bound=100_000)
    assert bundle.name == name
    for key, expected in bundle.expected.items():
        assert bundle.computed[key] == expected


def test_completely_split_scenario_arithmetic():
    bundle = scenario_catalog("section-5.2", bound=100_000)
    assert bundle.arithmetic["abs_error"] < 0.05
    assert bundle.computed["sha1_factors"] == [3]


def test_unknown_scenario():
    with pytest.raises(UnknownScenarioError):
        scenario_catalog("no-such-scenario")


def test_scenarios_keep_their_names():
    assert scenario_names() == ["section-5.2", "example-3.8", "example-3.9", "example-3.10", "section-3.4"]
    for name in ("section-3.4", "example-3.8"):
        assert scenario_catalog(name).name == name


@pytest.mark.parametrize("name", ["example-3.9", "example-3.10"])
def test_stability_without_a_tower_is_an_assumption(name):
    bundle = scenario_catalog(name)
    assert "star" not in bundle.computed
    assert any("p-stable for every p" in line for line in bundle.assumptions)
