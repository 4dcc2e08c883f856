"""Property-based checks of the factorization guarantees."""

import math

import numpy as np
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from commutator_lab.harness import verify
from commutator_lab.matcore import operator_norm, random_nilpotent, random_normal_traceless, random_traceless
from commutator_lab.nilfact import factor_nilpotent, strict_triangular_factor
from commutator_lab.normalfact import factor_normal
from commutator_lab.shoda import factor_traceless
from commutator_lab.steinitz import exhaustive_best_order, greedy_order
from commutator_lab.tucci import b_l2_formula_check

SQRT5_HALF = math.sqrt(5) / 2
SEEDS = st.integers(min_value=0, max_value=2**32 - 1)


@seed(1)
@settings(deadline=None, max_examples=40)
@given(n=st.integers(min_value=2, max_value=8), sample=SEEDS)
def test_normal_factorization_bound(n, sample):
    a = random_normal_traceless(n, seed=sample)
    f = factor_normal(a)
    assert verify(a, f).passed
    assert f.norm_product <= SQRT5_HALF * operator_norm(a) + 1e-9


@seed(2)
@settings(deadline=None, max_examples=40)
@given(
    upper=arrays(np.float64, (6, 6), elements=st.floats(min_value=-10, max_value=10, allow_nan=False)),
)
def test_strict_recurrence_is_exact(upper):
    a = np.triu(upper, 1)
    f = strict_triangular_factor(a)
    assert f.residual_op <= 1e-12 * 6 * max(1.0, float(np.max(np.abs(a))))


@seed(3)
@settings(deadline=None, max_examples=60)
@given(
    parts=st.lists(
        st.tuples(st.integers(min_value=-50, max_value=50), st.integers(min_value=-50, max_value=50)),
        min_size=1,
        max_size=7,
    )
)
def test_optimal_order_bounds(parts):
    values = np.array([complex(re, im) for re, im in parts])
    values -= values.mean()
    best = exhaustive_best_order(values)
    greedy = greedy_order(values)
    best.validate()
    greedy.validate()
    assert best.prefix_max <= SQRT5_HALF * best.max_modulus + 1e-9
    assert best.prefix_max <= greedy.prefix_max + 1e-12


@seed(4)
@settings(deadline=None, max_examples=25)
@given(n=st.integers(min_value=2, max_value=10), sample=SEEDS)
def test_baseline_factors_anything(n, sample):
    a = random_traceless(n, seed=sample)
    assert verify(a, factor_traceless(a)).passed


@seed(5)
@settings(deadline=None, max_examples=25)
@given(n=st.integers(min_value=2, max_value=40), sample=SEEDS)
def test_nilpotent_pipeline(n, sample):
    t = random_nilpotent(n, seed=sample)
    f = factor_nilpotent(t)
    assert verify(t, f).passed
    assert operator_norm(f.b) <= 1 + 1e-12


@seed(6)
@settings(deadline=None, max_examples=30)
@given(
    b=arrays(np.float64, (5,), elements=st.floats(min_value=-3, max_value=3, allow_nan=False)),
    legs=st.sets(st.integers(min_value=1, max_value=5)),
)
def test_b_l2_formula(b, legs):
    lhs, rhs = b_l2_formula_check(b, legs, 5)
    assert math.isclose(lhs, rhs, rel_tol=1e-10, abs_tol=1e-12)
