"""Acceptance criteria, one test each, at their stated tolerances.

Criteria 2 and 7 (repelling half) assert constants that the derived
dynamics place outside the stated windows; they are implemented exactly as
stated and fail honestly.  The analysis lives in the repository notes:

* criterion 2: the invariant-manifold series gives the linear strip exit
  x1 = 2 eps - 16 eps^2 + O(eps^3), so |x1 - 2 eps| ~ 16 eps^2 > 5 eps^2;
* criterion 7 (repelling): fixed points exist only for mu >= |Delta| eps
  (the contraction condition gamma < Delta eps), so the probe at
  +0.5 |Delta| eps lies inside the empty window.
"""

import pytest

from slidekick import acceptance


def _check(fn):
    res = fn()
    print(res.line())
    assert res.passed, res.line() + ("\n  " + res.detail if res.detail else "")


def test_criterion_01_linear_profile_map():
    _check(acceptance.criterion_1)


def test_criterion_02_linear_strip_exit():
    _check(acceptance.criterion_2)


def test_criterion_03_exponent_law():
    _check(acceptance.criterion_3)


def test_criterion_04_inner_prefactor():
    _check(acceptance.criterion_4)


def test_criterion_05_distinguished_solution():
    _check(acceptance.criterion_5)


def test_criterion_06_exponential_attraction():
    _check(acceptance.criterion_6)


def test_criterion_07a_grazing_attracting():
    _check(acceptance.criterion_7a)


def test_criterion_07b_grazing_repelling():
    _check(acceptance.criterion_7b)


def test_criterion_08_coulomb_semistability():
    _check(acceptance.criterion_8)


def test_criterion_09_stribeck_attractor():
    _check(acceptance.criterion_9)


def test_criterion_10_homoclinic():
    _check(acceptance.criterion_10)


def test_criterion_11_expansion_residuals():
    _check(acceptance.criterion_11)
