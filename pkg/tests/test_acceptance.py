"""End-to-end acceptance checks, one test per criterion.

Every test here validates a shipped behaviour against an independent
reference — dense-grid conjugation, exhaustive grid minimization, hand-derived
closed forms, or a held-out second solver — at a stated tolerance.  Run

    pytest -v tests/test_acceptance.py

to get one pass/fail line per criterion; each test also prints the residuals
it measured (shown with ``-s`` or in the captured output of a failure).
"""

import math

import numpy as np

from selfpaced import (
    CurriculumRegion,
    Dataset,
    GridSpec,
    Halfspace,
    SampledFunction,
    SuiteConfig,
    TrainConfig,
    affine_action,
    biconjugate,
    catalog,
    concave_conjugate,
    critical_region_side,
    curriculum_action_numeric,
    design_from_regularizer,
    design_from_weight,
    get_regularizer,
    graded_unit_grid,
    gradient_norm,
    grid_constrained_inf,
    group_latent,
    homogeneous_closed_form,
    make_regression,
    random_concave,
    run_compare,
    spl_fit,
    sup_convolution,
    w_step,
)

AGES = (0.25, 1.0, 4.0)

# Scalar restatements of the catalog base penalties, written independently of
# the library's vectorized forms, for use inside grid-oracle objectives.
R_BASE_SCALAR = {
    "hard": lambda u: -u,
    "linear": lambda u: 0.5 * (1.0 - u) ** 2,
    "log": lambda u: math.inf if u <= 0.0 else -math.log(u),
    "exp": lambda u: 1.0 if u <= 0.0 else u * math.log(u) - u + 1.0,
}


def test_01_each_catalog_latent_equals_the_dense_grid_conjugate_of_its_penalty():
    vgrid = graded_unit_grid(4097)
    worst = {}
    for reg in catalog():
        err = 0.0
        for lam in AGES:
            neg_penalty = SampledFunction(vgrid, -reg.r_sp(vgrid, lam))
            losses = np.linspace(0.0, 8.0 * lam, 2049)
            conj = concave_conjugate(neg_penalty, losses)
            normalized = conj.values - lam * reg.r_base_min
            err = max(err, float(np.max(np.abs(normalized - reg.latent(lam, losses)))))
        worst[reg.name] = err
    print(f"latent vs grid conjugate, max abs error by regularizer: {worst}")
    assert all(e <= 1e-4 for e in worst.values()), worst


def test_02_central_difference_of_each_latent_recovers_its_weight_function():
    worst = {}
    for reg in catalog():
        err = 0.0
        for lam in AGES:
            h = 1e-5 * lam
            losses = np.linspace(2 * h, 8.0 * lam, 1601)
            losses = losses[np.abs(losses - lam) > 10 * h]  # skip the kink at l = lam
            deriv = (reg.latent(lam, losses + h) - reg.latent(lam, losses - h)) / (2 * h)
            err = max(err, float(np.max(np.abs(deriv - reg.weight(lam, losses)))))
        worst[reg.name] = err
    print(f"latent derivative vs weight, max abs error by regularizer: {worst}")
    assert all(e <= 1e-4 for e in worst.values()), worst


def test_03_age_scaling_of_weights_and_latents_holds_to_1e_minus_10():
    ages = (0.25, 0.7, 1.0, 2.5, 4.0, 9.0)
    losses = np.linspace(0.0, 10.0, 401)
    worst = 0.0
    for reg in catalog():
        for lam in ages:
            dw = np.max(np.abs(reg.weight(lam, losses) - reg.weight(1.0, losses / lam)))
            df = np.max(
                np.abs(reg.latent(lam, losses) - lam * reg.latent(1.0, losses / lam))
            )
            worst = max(worst, float(dw), float(df))
    print(f"age-scaling identity, max abs deviation: {worst:.3e}")
    assert worst <= 1e-10


def test_04_biconjugation_returns_100_random_concave_functions():
    worst = 0.0
    for seed in range(100):
        g = random_concave(seed)
        gg = biconjugate(g)
        i0, i1 = g.domain_indices
        interior = slice(i0 + 1, i1)  # strictly inside the effective domain
        err = float(np.max(np.abs(gg.values[interior] - g.values[interior])))
        step = float(np.max(np.diff(g.grid)))
        assert err <= 10 * step, f"seed {seed}: error {err} exceeds {10 * step}"
        worst = max(worst, err)
    print(f"biconjugate round trip over 100 seeds, max interior error: {worst:.3e}")


def test_05_conjugate_of_a_sum_matches_the_sup_convolution_of_conjugates():
    # Input slopes stay within +/-4, so every conjugate is affine outside
    # [-4, 4] and an optimal split of any l in [-4, 4] can be chosen with both
    # pieces in [-8, 8]; sampling the conjugates on [-9, 9] therefore loses
    # nothing on the comparison window.
    slope_grid = np.linspace(-9.0, 9.0, 2049)
    out_grid = np.linspace(-4.0, 4.0, 1025)
    worst = 0.0
    for seed in range(50):
        g1 = random_concave(seed, domain=(0, 256))
        g2 = random_concave(1000 + seed, domain=(64, 192))
        total = SampledFunction(g1.grid, g1.values + g2.values)
        lhs = concave_conjugate(total, out_grid)
        rhs = sup_convolution(
            concave_conjugate(g1, slope_grid),
            concave_conjugate(g2, slope_grid),
            out_grid,
        )
        worst = max(worst, float(np.max(np.abs(lhs.values - rhs.values))))
    tol = 20.0 * (1.0 / 256.0)
    print(f"sum-conjugate vs sup-convolution over 50 pairs: {worst:.3e} (tol {tol:.3e})")
    assert worst <= tol


def test_06_pairwise_order_latent_matches_closed_form_and_grid_search():
    reg = get_regularizer("exp")
    h = Halfspace(np.array([1.0, -1.0]), 0.0)
    region = CurriculumRegion("halfspace", (h,))
    lattice = np.linspace(0.0, 4.0, 21)
    cell = 1.0 / 200.0  # the numeric search quantizes weights to this lattice
    value_vs_formula = weight_vs_formula = value_vs_grid = weight_vs_grid = 0.0
    for l1 in lattice:
        for l2 in lattice:
            point = np.array([l1, l2])
            res = homogeneous_closed_form(reg, 1.0, point, h)
            if l1 <= l2:  # order already satisfied: separable branch
                ref_w = np.exp(-point)
                ref_val = float(np.sum(1.0 - ref_w))
            else:  # pooled branch: both samples share the mean loss
                mean = 0.5 * (l1 + l2)
                ref_w = np.full(2, math.exp(-mean))
                ref_val = 2.0 * (1.0 - math.exp(-mean))
            value_vs_formula = max(value_vs_formula, abs(res.value - ref_val))
            weight_vs_formula = max(
                weight_vs_formula, float(np.max(np.abs(res.weights - ref_w)))
            )
            num = curriculum_action_numeric(reg, 1.0, point, region, points_per_axis=201)
            value_vs_grid = max(value_vs_grid, abs(num.value - res.value))
            weight_vs_grid = max(
                weight_vs_grid, float(np.max(np.abs(num.weights - res.weights)))
            )
    # the diagonal is the branch boundary: classified inactive, branches agree
    for t in lattice:
        point = np.array([t, t])
        res = homogeneous_closed_form(reg, 1.0, point, h)
        assert res.side == "unaffected"
        assert critical_region_side(reg, 1.0, point, h) == "unaffected"
        assert abs(res.value - 2.0 * (1.0 - math.exp(-t))) <= 1e-12
    # independent exhaustive reference at a few points
    for point in (np.array([3.0, 1.0]), np.array([0.5, 2.5]), np.array([2.0, 2.0])):
        res = homogeneous_closed_form(reg, 1.0, point, h)
        r = R_BASE_SCALAR["exp"]

        def objective(p, point=point, r=r):
            return float(p @ point) + r(float(p[0])) + r(float(p[1]))

        val, _, _ = grid_constrained_inf(
            objective,
            GridSpec.unit_box(2, 201),
            feasible=lambda p: p[0] >= p[1] - 1e-12,
        )
        assert abs(val - res.value) <= 1e-3
    print(
        "pairwise-order latent: value vs formula "
        f"{value_vs_formula:.3e}, weights vs formula {weight_vs_formula:.3e}, "
        f"value vs grid {value_vs_grid:.3e}, weights vs grid {weight_vs_grid:.3e}"
    )
    assert value_vs_formula <= 1e-3
    assert weight_vs_formula <= 1e-3
    assert value_vs_grid <= 1e-3
    # the grid argmin itself lives on a cell/1 lattice; allow that quantization
    assert weight_vs_grid <= 0.5 * cell + 1e-3


def test_07_affine_halfspace_latent_matches_grid_oracle_and_bisection_root():
    reg = get_regularizer("exp")
    # worked instance: constraint v_0 >= 0.5 with losses (2, 1)
    res = affine_action(reg, 1.0, np.array([2.0, 1.0]), Halfspace(np.array([1.0, 0.0]), 0.5))
    beta_ref = 2.0 - math.log(2.0)
    root_residual = abs(math.exp(-(2.0 - res.beta)) - 0.5)
    value_ref = 0.5 + (1.0 - math.exp(-1.0)) + 0.5 * beta_ref
    print(
        f"affine worked case: |beta - (2 - log 2)| = {abs(res.beta - beta_ref):.3e}, "
        f"root residual {root_residual:.3e}, value error {abs(res.value - value_ref):.3e}"
    )
    assert res.side == "penalized"
    assert abs(res.beta - beta_ref) <= 1e-9
    assert root_residual <= 1e-10
    assert abs(res.value - value_ref) <= 1e-8

    r = R_BASE_SCALAR["exp"]
    cases = (
        (np.array([2.0, 1.0]), np.array([1.0, 0.0]), 0.5),
        (np.array([1.5, 0.7]), np.array([1.0, 1.0]), 1.2),
        (np.array([3.0, 2.0]), np.array([0.6, 0.8]), 0.9),
        (np.array([0.3, 0.2]), np.array([1.0, 0.0]), 0.2),  # constraint inactive
    )
    worst = 0.0
    for losses, k, b in cases:
        res = affine_action(reg, 1.0, losses, Halfspace(k, b))

        def objective(p, losses=losses, r=r):
            return float(p @ losses) + r(float(p[0])) + r(float(p[1]))

        val, _, _ = grid_constrained_inf(
            objective,
            GridSpec.unit_box(2, 321),
            feasible=lambda p, k=k, b=b: float(p @ k) >= b - 1e-12,
        )
        worst = max(worst, abs(val - res.value))
    print(f"affine halfspace latent vs exhaustive grid over {len(cases)} cases: {worst:.3e}")
    assert worst <= 1e-3


def test_08_group_pooled_latents_match_equal_weight_grid_minima():
    cases = (
        ("exp", 1.0, np.array([2.0, 1.0]), ((0, 1),)),
        ("linear", 2.0, np.array([0.5, 1.5, 1.0]), ((0, 2), (1,))),
        ("log", 1.0, np.array([0.3, 2.5]), ((0, 1),)),
        ("hard", 1.5, np.array([2.0, 1.0]), ((0, 1),)),
    )
    worst = 0.0
    for name, lam, losses, partition in cases:
        reg = get_regularizer(name)
        res = group_latent(reg, lam, losses, partition)
        blocks = [list(b) for b in partition]
        block_sums = [float(np.sum(losses[b])) for b in blocks]
        r = R_BASE_SCALAR[name]
        shift = losses.size * lam * reg.r_base_min

        def objective(p, blocks=blocks, sums=block_sums, r=r, lam=lam, shift=shift):
            total = 0.0
            for a, block in enumerate(blocks):
                u = float(p[a])
                total += u * sums[a] + len(block) * lam * r(u)
            return total - shift

        count = 4001 if len(blocks) == 1 else 641
        spec = GridSpec(axes=tuple((0.0, 1.0, count) for _ in blocks))
        val, _, _ = grid_constrained_inf(objective, spec)
        worst = max(worst, abs(val - res.value))
    print(f"group latent vs equal-weight grid minimum over {len(cases)} cases: {worst:.3e}")
    assert worst <= 1e-3


def test_09_designed_triples_recover_entropy_penalty_and_linear_weight():
    designed = design_from_weight(lambda l: np.exp(-np.asarray(l, dtype=float)))
    v = np.linspace(0.01, 1.0, 199)
    penalty_err = float(np.max(np.abs(designed.r_sp_base(v) - (v * np.log(v) - v + 1.0))))

    designed2 = design_from_regularizer(lambda u: 0.5 * (1.0 - np.asarray(u)) ** 2)
    losses = np.linspace(0.0, 2.0, 401)
    weight_err = float(
        np.max(np.abs(designed2.weight(1.0, losses) - np.clip(1.0 - losses, 0.0, 1.0)))
    )
    print(
        f"designed-from-weight penalty error {penalty_err:.3e}, "
        f"designed-from-penalty weight error {weight_err:.3e}"
    )
    assert penalty_err <= 1e-4
    assert weight_err <= 1e-4


def test_10_training_descends_within_each_stage_and_lands_on_stationary_points():
    worst_increase = -math.inf
    worst_grad = 0.0
    for seed in range(10):
        dataset, _, _ = make_regression(
            n=40, d=3, noise=0.1, outlier_fraction=0.2, outlier_scale=30.0, seed=seed
        )
        for name in ("hard", "linear", "exp"):
            config = TrainConfig(regularizer=name, stages=8)
            state = spl_fit(dataset, config)
            lams = np.array(state.lambdas)
            trace = np.array(state.latent_objectives)
            same_stage = lams[1:] == lams[:-1]
            if same_stage.any():
                worst_increase = max(
                    worst_increase, float(np.max((trace[1:] - trace[:-1])[same_stage]))
                )
            if name != "hard":  # gradient is single-valued away from binary weights
                assert state.converged
                grad = gradient_norm(state.w, dataset, config, state.lam, get_regularizer(name))
                worst_grad = max(worst_grad, grad)
    print(
        f"within-stage trace increase (10 seeds x 3 regularizers): {worst_increase:.3e}; "
        f"gradient norm at fixed points: {worst_grad:.3e}"
    )
    assert worst_increase <= 1e-9
    assert worst_grad <= 1e-6


def test_11_self_paced_fits_beat_ridge_on_outliers_and_match_it_when_clean():
    result = run_compare(SuiteConfig())
    summary = result["summary"]
    print(f"wins over ridge across 10 seeds: {summary['wins']}")
    assert summary["all_seeds_beat_ridge"]["hard"] is True
    assert summary["all_seeds_beat_ridge"]["exp"] is True

    worst_gap = 0.0
    for seed in (0, 1, 2):
        dataset, _, outliers = make_regression(
            n=100, d=5, noise=0.1, outlier_fraction=0.0, outlier_scale=50.0, seed=seed
        )
        assert outliers.size == 0
        w_ridge = w_step(np.ones(dataset.n), dataset, TrainConfig())
        for name in ("hard", "exp"):
            config = TrainConfig(
                regularizer=name,
                stages=200,
                full_weight_threshold=0.99 if name == "hard" else 1.0 - 1e-9,
            )
            state = spl_fit(dataset, config)
            worst_gap = max(worst_gap, float(np.max(np.abs(state.w - w_ridge))))
    print(f"clean-data gap to the ridge fit over 3 seeds: {worst_gap:.3e}")
    assert worst_gap <= 1e-6


def test_12_order_constraint_withholds_the_later_sample_until_the_earlier_one_enters():
    base, _, _ = make_regression(
        n=20, d=2, noise=0.1, outlier_fraction=0.0, outlier_scale=1.0, seed=7
    )
    y = base.y.copy()
    y[0] += 8.0  # sample 0 becomes by far the hardest sample
    dataset = Dataset(base.X, y)
    normal = np.zeros(20)
    normal[0], normal[1] = 1.0, -1.0  # require v_0 >= v_1
    region = CurriculumRegion("halfspace", (Halfspace(normal, 0.0),))
    config = TrainConfig(regularizer="hard", region=region, stages=10)
    state = spl_fit(dataset, config)
    # without the constraint, the easy sample 1 does get weight while the
    # hard sample 0 is still excluded — the pattern the ordering forbids
    free = spl_fit(dataset, TrainConfig(regularizer="hard", stages=10))
    assert any(v[1] > 0.5 and v[0] <= 1e-12 for v in free.weight_history)
    zero_first = violations = 0
    for v in state.weight_history:
        if v[0] <= 1e-12:
            zero_first += 1
            if v[1] > 1e-12:
                violations += 1
    print(
        f"iterations with sample 0 at zero weight: {zero_first} of "
        f"{len(state.weight_history)}; precedence violations: {violations}"
    )
    assert len(state.stage_starts) >= 2
    assert zero_first > 0  # the check is not vacuous
    assert violations == 0
