"""Seeded random admissible parameter sets."""

import random
from fractions import Fraction

from closure14.ring import LambdaScalar
from closure14.series import make_delta_term
from closure14.solutions import InvariantFunction, SolutionParams

F_CHOICES = ("0", "G0", "G1", "G2", "G1^2")


def random_params(seed: int, with_ttH0: bool = False) -> SolutionParams:
    rng = random.Random(seed)

    def q():
        return Fraction(rng.randint(-6, 6), rng.randint(1, 4))

    beta = {r: q() for r in rng.sample([1, 2, 3], rng.randint(1, 3))}
    psi_const = {r: q() for r in rng.sample([0, 2], rng.randint(0, 2))}
    F = InvariantFunction.from_json(rng.choice(F_CHOICES))
    ttH0 = None
    if with_ttH0:
        ttH0 = (make_delta_term(0, 1, 2, 0, LambdaScalar.lam_power(-1, q()))
                + make_delta_term(0, 2, 0, 0, q()))
    return SolutionParams(beta=beta, psi_const=psi_const, F=F, ttH0=ttH0)
