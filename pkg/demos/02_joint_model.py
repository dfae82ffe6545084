"""Joint lifetimes for a couple.

Loads the bundled reference model (a ten-state joint model for spousal
lifetimes, with initial vectors driven by the two ages at policy start) and
walks through the quantities an annuity desk cares about: joint survival,
conditioning on the partner's status, and expected remaining lifetimes.

Times are in units of 100 years throughout the library, so 0.12 means 12
years. Ages enter through the design row (1, a1, a2, a1*a2) with the ages
scaled the same way.

Run from the repository root:

    python3 demos/02_joint_model.py
"""

from pathlib import Path

import numpy as np

from miph import (
    condition_on_survival,
    condition_on_value,
    conditional_expectation,
    joint_cdf,
    joint_density,
    joint_survival,
    load_model,
    marginal_survival,
    standard_design,
)

MODEL_PATH = Path(__file__).parent / "models" / "spousal_reference.json"


def initial_vector(model, age1_years, age2_years):
    a = np.array([age1_years / 100.0]), np.array([age2_years / 100.0])
    return model.initial_vectors(standard_design(*a))[0]


def main():
    model = load_model(MODEL_PATH)
    print(f"states: {model.dim}, margins: {model.n_margins}")

    pi = initial_vector(model, 63, 63)
    print("\ninitial vector for a (63, 63) couple:")
    print(np.array2string(pi, precision=4, suppress_small=True))

    # Joint survival at asymmetric horizons. The asymmetry comes from the
    # margins, not the start vector: both partners share the start state.
    for y1, y2 in ((0.12, 0.30), (0.30, 0.12), (0.20, 0.20)):
        s = joint_survival(model, pi, np.array([y1, y2]))
        print(f"P(Y1 > {y1*100:.0f}y, Y2 > {y2*100:.0f}y) = {s:.4f}")

    f = joint_density(model, pi, np.array([0.20, 0.20]))
    c = joint_cdf(model, pi, np.array([0.20, 0.20]))
    print(f"\njoint density at (20y, 20y): {f:.4f} per (100y)^2")
    print(f"joint CDF     at (20y, 20y): {c:.4f}")

    # Conditioning. Knowing the partner is alive at 20 years shifts the
    # start-state mixture toward the longer-lived states.
    alive, nu = condition_on_survival(model, pi, margin=1, y=0.20)
    dead, alpha = condition_on_value(model, pi, margin=1, y=0.20)
    base = marginal_survival(model, pi, 0, 0.20)
    s_alive = marginal_survival(alive, nu, 0, 0.20)
    s_dead = marginal_survival(dead, alpha, 0, 0.20)
    print(f"\nP(Y1 > 20y)                      = {base:.4f}")
    print(f"P(Y1 > 20y | partner alive @20y) = {s_alive:.4f}")
    print(f"P(Y1 > 20y | partner died  @20y) = {s_dead:.4f}")

    # Expected lifetimes, unconditional and given the partner's survival.
    e0 = conditional_expectation(model, pi, margin=0)
    e0_given = conditional_expectation(model, pi, margin=0, given=(1, 0.20))
    print(f"\nE[Y1]                        = {e0*100:.2f} years")
    print(f"E[Y1 | partner alive @ 20y]  = {e0_given*100:.2f} years")

    # Older couples start further along the chain: survival drops.
    print("\n  ages     P(both survive 15 more years)")
    for ages in ((63, 63), (68, 63), (63, 68), (73, 63)):
        pi_c = initial_vector(model, *ages)
        s = joint_survival(model, pi_c, np.array([0.15, 0.15]))
        print(f"  {ages}   {s:.4f}")


if __name__ == "__main__":
    main()
